#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rht/noise.hpp"
#include "rht/stepper.hpp"

namespace rht {

struct FieldConfig {
  enum class Type { Periodic, Inclusions, File, Constant };
  Type type = Type::Periodic;
  double eps = 0.1;
  double background = 1.0;
  double contrast = 1e5;  // inclusion value = background * contrast
  int count = 10;
  double r_min = 0.05, r_max = 0.1;
  bool overlap = false;
  std::string file;
  std::string tile_file;
  double value = 1.0;  // Type::Constant
};

struct SigmaConfig {
  enum class Mode { SameAsKappa, Constant, File };
  Mode mode = Mode::SameAsKappa;
  double value = 1.0;
  std::string file;
};

struct NoiseConfig {
  NoiseForm form = NoiseForm::Fourier;
  int n = 8;
  DecayRule decay = DecayRule::K32;
  bool paper_time_scaling = false;
};

struct ExperimentConfig {
  int nx = 100, Nx = 10;
  int layers = -1;  // -1: default_layers(H)
  int basis = 6;
  FieldConfig field;
  SigmaConfig sigma;
  NoiseConfig noise;
  double dt = 1e-3, T = 0.1;
  int paths = 100;
  std::uint64_t seed = 100;
  int threads = 0;  // 0: all hardware threads
  std::vector<double> snapshots;
  bool series = false;  // per-time energy-error series

  int resolved_layers() const;
};

struct RunResult {
  Vec mean_fine;    // all nodes
  Vec mean_coarse;  // all nodes, lifted
  double eps_l2 = 0, eps_a = 0;
  double lambda = 0;
  int n_ms = 0, n_f = 0;
  std::vector<double> series_times;
  std::vector<double> series_eps_a;
  StepFlags flags;
  double wall_basis_s = 0, wall_paths_s = 0;
  std::vector<std::uint64_t> eta_hashes;
  std::vector<std::pair<double, Vec>> snapshots_fine, snapshots_coarse;  // full nodes
};

/// Source and initial condition of the reference setup.
double default_source(double x, double y, double t);
double default_initial(double x, double y);

/// Everything deterministic that paths share: grids, fields, fine operators,
/// per-step loads.
struct Problem {
  FineGrid grid;
  CoarseGrid coarse;
  ScalarField kappa, sigma;
  FemOperators fem;
  TimeGrid tg;
  std::vector<Vec> loads_ii;  // F^j on interior dofs, j = 1..steps
  Vec u0_full, u0_ii;
  NoiseSpec noise;
};

/// Heap-allocated: internal structures point at the grid, so the object must
/// not move.
std::unique_ptr<Problem> build_problem(const ExperimentConfig& cfg);

struct CoarseSpace {
  MultiscaleBasis basis;
  Mat Mhat, Ahat;
  std::vector<Vec> loads_hat;
  Vec noise_hat;
  Vec y0;  // L2 projection of u0
};

CoarseSpace build_space(const Problem& p, int basis_count, int layers, int threads);
CoarseSpace build_space(const Problem& p, const AuxiliarySpace& aux, int layers, int threads);

RunResult run_mc(const ExperimentConfig& cfg);

struct SweepCell {
  double eps_l2 = 0, eps_a = 0;
};

/// Energy-error table over oversampling layers x contrast values. Fine
/// trajectories are shared across the layer dimension.
struct ContrastSweep {
  std::vector<double> contrasts;
  std::vector<int> layer_list;
  std::vector<std::vector<SweepCell>> cells;  // [layer][contrast]
};
ContrastSweep sweep_contrast(ExperimentConfig cfg, const std::vector<double>& contrasts,
                             const std::vector<int>& layer_list);

struct CountSweep {
  std::vector<int> counts;
  std::vector<SweepCell> cells;
};
CountSweep sweep_basis(ExperimentConfig cfg, const std::vector<int>& counts);
CountSweep sweep_layers(ExperimentConfig cfg, const std::vector<int>& layer_list);
CountSweep sweep_inclusions(ExperimentConfig cfg, const std::vector<int>& inclusion_counts);

/// Relative energy error against the shared fine reference at every time
/// step, one curve per basis count.
struct EnergySeries {
  std::vector<int> counts;
  std::vector<double> times;
  Mat eps_a;  // times x counts
};
EnergySeries energy_error_series(ExperimentConfig cfg, const std::vector<int>& counts);

/// Analytic noise tails and Monte Carlo solution-difference decay against a
/// reference truncation n_ref = 4 * max(n_list), with fitted log-log slopes.
struct TruncationStudy {
  std::vector<int> n_list;
  std::vector<double> analytic_tail;
  std::vector<double> mc_diff_sq;  // E ||u_h(n) - u_h(n_ref)||_{L2}^2 at T
  double tail_slope = 0, mc_slope = 0;
  int n_ref = 0;
};
TruncationStudy truncation_study(ExperimentConfig cfg, const std::vector<int>& n_list);

double rel_l2_error(const Vec& approx, const Vec& ref, const SpMat& M);
double rel_energy_error(const Vec& approx, const Vec& ref, const SpMat& A);
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
std::uint64_t hash_bytes(const void* data, std::size_t n);

}  // namespace rht
