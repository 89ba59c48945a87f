#include "rht/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "rht/parallel.hpp"

namespace rht {

int ExperimentConfig::resolved_layers() const {
  return layers >= 0 ? layers : default_layers(1.0 / Nx);
}

double default_source(double x, double y, double t) {
  return 3.0 * M_PI * M_PI * std::exp(M_PI * M_PI * t) * std::sin(M_PI * x) * std::sin(M_PI * y);
}

double default_initial(double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); }

double rel_l2_error(const Vec& approx, const Vec& ref, const SpMat& M) {
  return l2_norm(approx - ref, M) / l2_norm(ref, M);
}

double rel_energy_error(const Vec& approx, const Vec& ref, const SpMat& A) {
  return energy_norm(approx - ref, A) / energy_norm(ref, A);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(x.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::uint64_t hash_bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

double wall_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::uint8_t> load_tile_mask(const std::string& path, int& res) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("tile mask: cannot open " + path);
  if (!(in >> res) || res < 1) throw std::runtime_error("tile mask: bad resolution header in " + path);
  std::vector<std::uint8_t> mask(static_cast<size_t>(res) * res);
  for (auto& m : mask) {
    int v;
    if (!(in >> v)) throw std::runtime_error("tile mask: truncated data in " + path);
    m = v != 0;
  }
  return mask;
}

ScalarField make_kappa(const ExperimentConfig& cfg, const FineGrid& grid) {
  switch (cfg.field.type) {
    case FieldConfig::Type::Periodic: {
      PeriodicSpec s;
      s.eps = cfg.field.eps;
      s.background = cfg.field.background;
      s.inclusion = cfg.field.background * cfg.field.contrast;
      if (!cfg.field.tile_file.empty()) s.tile_mask = load_tile_mask(cfg.field.tile_file, s.tile_res);
      return gen_periodic(grid, s);
    }
    case FieldConfig::Type::Inclusions: {
      InclusionSpec s;
      s.count = cfg.field.count;
      s.r_min = cfg.field.r_min;
      s.r_max = cfg.field.r_max;
      s.background = cfg.field.background;
      s.inclusion = cfg.field.background * cfg.field.contrast;
      s.overlap_allowed = cfg.field.overlap;
      SplitMix64 rng = make_rng(cfg.seed, RngStream::Field, 0);
      return gen_inclusions(grid, s, rng);
    }
    case FieldConfig::Type::File:
      return read_field(cfg.field.file, grid);
    case FieldConfig::Type::Constant:
      return constant_field(grid, cfg.field.value);
  }
  throw std::invalid_argument("make_kappa: unknown field type");
}

ScalarField make_sigma(const ExperimentConfig& cfg, const FineGrid& grid, const ScalarField& kappa) {
  switch (cfg.sigma.mode) {
    case SigmaConfig::Mode::SameAsKappa:
      return kappa;
    case SigmaConfig::Mode::Constant:
      if (cfg.sigma.value < 0.0) throw std::invalid_argument("sigma: constant must be >= 0");
      return constant_field(grid, cfg.sigma.value);
    case SigmaConfig::Mode::File:
      return read_field(cfg.sigma.file, grid);
  }
  throw std::invalid_argument("make_sigma: unknown mode");
}

}  // namespace

std::unique_ptr<Problem> build_problem(const ExperimentConfig& cfg) {
  if (!(cfg.T > 0.0) || !(cfg.dt > 0.0) || cfg.dt > cfg.T)
    throw std::invalid_argument("build_problem: need 0 < dt <= T");
  if (cfg.paths < 1) throw std::invalid_argument("build_problem: paths must be >= 1");
  if (cfg.basis < 1) throw std::invalid_argument("build_problem: basis count must be >= 1");

  auto p = std::make_unique<Problem>();
  p->grid = build_fine_grid(cfg.nx);
  p->coarse = build_coarse_grid(p->grid, cfg.Nx);
  p->kappa = make_kappa(cfg, p->grid);
  p->kappa.grid = &p->grid;
  p->sigma = make_sigma(cfg, p->grid, p->kappa);
  p->sigma.grid = &p->grid;
  p->fem = build_fem_operators(p->grid, p->kappa);

  p->tg.T = cfg.T;
  p->tg.steps = static_cast<int>(std::llround(cfg.T / cfg.dt));
  if (p->tg.steps < 1) p->tg.steps = 1;

  p->noise.form = cfg.noise.form;
  p->noise.n = cfg.noise.n;
  p->noise.rule = cfg.noise.decay;
  p->noise.T = cfg.T;
  p->noise.paper_time_scaling = cfg.noise.paper_time_scaling;

  p->loads_ii.reserve(p->tg.steps);
  for (int j = 1; j <= p->tg.steps; ++j)
    p->loads_ii.push_back(p->fem.dofs.reduce(assemble_load(p->grid, default_source, p->tg.time(j))));

  p->u0_full.resize(p->grid.n_nodes());
  for (int iy = 0; iy <= p->grid.nx; ++iy)
    for (int ix = 0; ix <= p->grid.nx; ++ix)
      p->u0_full[p->grid.node(ix, iy)] = default_initial(p->grid.node_x(ix), p->grid.node_x(iy));
  p->u0_ii = p->fem.dofs.reduce(p->u0_full);
  return p;
}

CoarseSpace build_space(const Problem& p, const AuxiliarySpace& aux, int layers, int threads) {
  CoarseSpace s;
  s.basis = build_cem_basis_all(p.coarse, p.kappa, p.fem.dofs, p.fem.M_ii, aux, layers, threads);
  CoarseOperators ops = project_operators(s.basis, p.fem.M_ii, p.fem.A_ii);
  s.Mhat = std::move(ops.Mhat);
  s.Ahat = std::move(ops.Ahat);
  s.loads_hat.reserve(p.loads_ii.size());
  for (const Vec& F : p.loads_ii) s.loads_hat.push_back(s.basis.Phi.transpose() * F);
  s.noise_hat = s.basis.Phi.transpose() * p.fem.phi_ints_ii;

  Eigen::LLT<Mat> mllt(s.Mhat);
  if (mllt.info() != Eigen::Success)
    throw SolverFailure("build_space: projected mass matrix not SPD", 0.0);
  Vec b0 = p.fem.dofs.reduce(p.fem.M_full * p.u0_full);
  s.y0 = mllt.solve(s.basis.Phi.transpose() * b0);
  return s;
}

CoarseSpace build_space(const Problem& p, int basis_count, int layers, int threads) {
  PartitionOfUnity pou = compute_pou(p.coarse);
  ScalarField kt = kappa_tilde(p.kappa, pou);
  AuxiliarySpace aux = build_auxiliary_space(p.coarse, p.kappa, kt, basis_count, threads);
  return build_space(p, aux, layers, threads);
}

namespace {

struct PathWork {
  Vec fine_final;
  std::vector<Vec> coarse_final;              // per space, coarse coordinates
  std::vector<Vec> fine_traj;                 // series mode, j = 0..steps
  std::vector<std::vector<Vec>> coarse_traj;  // [space][step]
  std::map<int, Vec> snaps_fine;
  std::vector<std::map<int, Vec>> snaps_coarse;
  std::uint64_t eta_hash = 0;
  StepFlags flags;
};

template <class Get>
auto pairwise_sum(int lo, int hi, const Get& get) -> decltype(get(0)) {
  if (hi - lo == 1) return get(lo);
  int mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, get) + pairwise_sum(mid, hi, get);
}

struct MultiOut {
  Vec mean_fine_ii;
  std::vector<Vec> mean_coarse_y;
  std::vector<SweepCell> cells;
  Mat series_eps_a;  // (steps+1) x spaces, series mode
  std::vector<double> series_times;
  StepFlags flags;
  std::vector<std::uint64_t> eta_hashes;
  std::map<int, Vec> mean_snaps_fine;
  std::vector<std::map<int, Vec>> mean_snaps_coarse;
};

// Runs the shared-noise fine/coarse pair for every path and reduces the
// means by pairwise summation in fixed path order.
MultiOut run_paths_multi(const Problem& p, const std::vector<const CoarseSpace*>& spaces,
                         int paths, std::uint64_t seed, int threads, bool series,
                         const std::vector<int>& snapshot_steps) {
  const int S = static_cast<int>(spaces.size());
  const auto times = p.tg.step_times();
  std::vector<PathWork> work(paths);

  parallel_for(paths, threads, [&](int pid) {
    PathWork w;
    SplitMix64 rng = make_rng(seed, RngStream::Paths, static_cast<std::uint64_t>(pid));
    NoisePath np = sample_truncated_noise(p.noise, times, rng, static_cast<std::uint64_t>(pid));
    w.eta_hash = hash_bytes(np.eta.data(), static_cast<size_t>(np.eta.size()) * sizeof(double));

    FineSystem fine(p.fem, p.sigma, p.loads_ii, p.tg.dt());
    std::function<void(int, const Vec&)> fine_cb;
    if (series || !snapshot_steps.empty())
      fine_cb = [&](int j, const Vec& st) {
        if (series) w.fine_traj.push_back(st);
        if (std::binary_search(snapshot_steps.begin(), snapshot_steps.end(), j)) w.snaps_fine[j] = st;
      };
    w.fine_final = run(p.u0_ii, fine, p.tg, np.wdot, fine_cb);
    w.flags.merge(fine.flags);

    w.coarse_final.resize(S);
    if (series) w.coarse_traj.resize(S);
    w.snaps_coarse.resize(S);
    for (int s = 0; s < S; ++s) {
      const CoarseSpace& cs = *spaces[s];
      CoarseSystem sys(p.fem, p.sigma, cs.basis.Phi, cs.Mhat, cs.Ahat, cs.loads_hat, cs.noise_hat,
                       p.tg.dt());
      std::function<void(int, const Vec&)> cb;
      if (series || !snapshot_steps.empty())
        cb = [&](int j, const Vec& st) {
          if (series) w.coarse_traj[s].push_back(st);
          if (std::binary_search(snapshot_steps.begin(), snapshot_steps.end(), j))
            w.snaps_coarse[s][j] = st;
        };
      w.coarse_final[s] = run(cs.y0, sys, p.tg, np.wdot, cb);
      w.flags.merge(sys.flags);
    }
    work[pid] = std::move(w);
  });

  const double invP = 1.0 / paths;
  MultiOut out;
  out.mean_fine_ii = pairwise_sum(0, paths, [&](int i) { return work[i].fine_final; }) * invP;
  out.mean_coarse_y.reserve(S);
  out.cells.resize(S);
  for (int s = 0; s < S; ++s) {
    Vec my = pairwise_sum(0, paths, [&](int i) { return work[i].coarse_final[s]; }) * invP;
    Vec lifted = spaces[s]->basis.Phi * my;
    out.cells[s].eps_l2 = rel_l2_error(lifted, out.mean_fine_ii, p.fem.M_ii);
    out.cells[s].eps_a = rel_energy_error(lifted, out.mean_fine_ii, p.fem.A_ii);
    out.mean_coarse_y.push_back(std::move(my));
  }

  if (series) {
    const int J = p.tg.steps + 1;
    out.series_eps_a.resize(J, S);
    out.series_times.resize(J);
    for (int j = 0; j < J; ++j) {
      out.series_times[j] = p.tg.time(j);
      Vec mf = pairwise_sum(0, paths, [&](int i) { return work[i].fine_traj[j]; }) * invP;
      for (int s = 0; s < S; ++s) {
        Vec mc = pairwise_sum(0, paths, [&](int i) { return work[i].coarse_traj[s][j]; }) * invP;
        out.series_eps_a(j, s) = rel_energy_error(spaces[s]->basis.Phi * mc, mf, p.fem.A_ii);
      }
    }
  }

  for (int step : snapshot_steps) {
    out.mean_snaps_fine[step] =
        pairwise_sum(0, paths, [&](int i) { return work[i].snaps_fine.at(step); }) * invP;
  }
  out.mean_snaps_coarse.resize(S);
  for (int s = 0; s < S; ++s)
    for (int step : snapshot_steps)
      out.mean_snaps_coarse[s][step] =
          pairwise_sum(0, paths, [&](int i) { return work[i].snaps_coarse[s].at(step); }) * invP;

  out.eta_hashes.reserve(paths);
  for (const auto& w : work) {
    out.eta_hashes.push_back(w.eta_hash);
    out.flags.merge(w.flags);
  }
  return out;
}

std::vector<int> snapshot_steps_for(const ExperimentConfig& cfg, const TimeGrid& tg) {
  std::vector<int> steps;
  for (double t : cfg.snapshots) {
    int j = static_cast<int>(std::llround(t / tg.dt()));
    steps.push_back(std::clamp(j, 0, tg.steps));
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

}  // namespace

RunResult run_mc(const ExperimentConfig& cfg) {
  auto p = build_problem(cfg);

  auto t0 = std::chrono::steady_clock::now();
  CoarseSpace space = build_space(*p, cfg.basis, cfg.resolved_layers(), cfg.threads);
  double wall_basis = wall_seconds(t0);

  auto snaps = snapshot_steps_for(cfg, p->tg);
  t0 = std::chrono::steady_clock::now();
  MultiOut out = run_paths_multi(*p, {&space}, cfg.paths, cfg.seed, cfg.threads, cfg.series, snaps);

  RunResult r;
  r.mean_fine = p->fem.dofs.expand(out.mean_fine_ii);
  r.mean_coarse = p->fem.dofs.expand(space.basis.Phi * out.mean_coarse_y[0]);
  r.eps_l2 = out.cells[0].eps_l2;
  r.eps_a = out.cells[0].eps_a;
  r.lambda = space.basis.Lambda;
  r.n_ms = static_cast<int>(space.basis.Phi.cols());
  r.n_f = p->fem.dofs.n_interior();
  r.flags = out.flags;
  r.wall_basis_s = wall_basis;
  r.wall_paths_s = wall_seconds(t0);
  r.eta_hashes = std::move(out.eta_hashes);
  if (cfg.series) {
    r.series_times = std::move(out.series_times);
    r.series_eps_a.assign(out.series_eps_a.col(0).data(),
                          out.series_eps_a.col(0).data() + out.series_eps_a.rows());
  }
  for (int step : snaps) {
    double t = p->tg.time(step);
    r.snapshots_fine.emplace_back(t, p->fem.dofs.expand(out.mean_snaps_fine.at(step)));
    r.snapshots_coarse.emplace_back(
        t, p->fem.dofs.expand(space.basis.Phi * out.mean_snaps_coarse[0].at(step)));
  }
  return r;
}

ContrastSweep sweep_contrast(ExperimentConfig cfg, const std::vector<double>& contrasts,
                             const std::vector<int>& layer_list) {
  if (contrasts.empty() || layer_list.empty())
    throw std::invalid_argument("sweep_contrast: lists must be nonempty");
  ContrastSweep sweep;
  sweep.contrasts = contrasts;
  sweep.layer_list = layer_list;
  sweep.cells.assign(layer_list.size(), std::vector<SweepCell>(contrasts.size()));
  for (size_t ci = 0; ci < contrasts.size(); ++ci) {
    cfg.field.contrast = contrasts[ci];
    auto p = build_problem(cfg);
    PartitionOfUnity pou = compute_pou(p->coarse);
    ScalarField kt = kappa_tilde(p->kappa, pou);
    AuxiliarySpace aux = build_auxiliary_space(p->coarse, p->kappa, kt, cfg.basis, cfg.threads);
    std::vector<CoarseSpace> spaces;
    spaces.reserve(layer_list.size());
    for (int m : layer_list) spaces.push_back(build_space(*p, aux, m, cfg.threads));
    std::vector<const CoarseSpace*> ptrs;
    for (const auto& s : spaces) ptrs.push_back(&s);
    MultiOut out = run_paths_multi(*p, ptrs, cfg.paths, cfg.seed, cfg.threads, false, {});
    for (size_t li = 0; li < layer_list.size(); ++li) sweep.cells[li][ci] = out.cells[li];
  }
  return sweep;
}

CountSweep sweep_basis(ExperimentConfig cfg, const std::vector<int>& counts) {
  if (counts.empty()) throw std::invalid_argument("sweep_basis: counts must be nonempty");
  if (!std::is_sorted(counts.begin(), counts.end()))
    throw std::invalid_argument("sweep_basis: counts must be ascending");
  CountSweep sweep;
  sweep.counts = counts;
  auto p = build_problem(cfg);
  PartitionOfUnity pou = compute_pou(p->coarse);
  ScalarField kt = kappa_tilde(p->kappa, pou);
  AuxiliarySpace aux =
      build_auxiliary_space(p->coarse, p->kappa, kt, counts.back(), cfg.threads);
  std::vector<CoarseSpace> spaces;
  spaces.reserve(counts.size());
  for (int a : counts)
    spaces.push_back(build_space(*p, restrict_modes(aux, a), cfg.resolved_layers(), cfg.threads));
  std::vector<const CoarseSpace*> ptrs;
  for (const auto& s : spaces) ptrs.push_back(&s);
  MultiOut out = run_paths_multi(*p, ptrs, cfg.paths, cfg.seed, cfg.threads, false, {});
  sweep.cells = out.cells;
  return sweep;
}

CountSweep sweep_layers(ExperimentConfig cfg, const std::vector<int>& layer_list) {
  if (layer_list.empty()) throw std::invalid_argument("sweep_layers: list must be nonempty");
  CountSweep sweep;
  sweep.counts = layer_list;
  auto p = build_problem(cfg);
  PartitionOfUnity pou = compute_pou(p->coarse);
  ScalarField kt = kappa_tilde(p->kappa, pou);
  AuxiliarySpace aux = build_auxiliary_space(p->coarse, p->kappa, kt, cfg.basis, cfg.threads);
  std::vector<CoarseSpace> spaces;
  spaces.reserve(layer_list.size());
  for (int m : layer_list) spaces.push_back(build_space(*p, aux, m, cfg.threads));
  std::vector<const CoarseSpace*> ptrs;
  for (const auto& s : spaces) ptrs.push_back(&s);
  MultiOut out = run_paths_multi(*p, ptrs, cfg.paths, cfg.seed, cfg.threads, false, {});
  sweep.cells = out.cells;
  return sweep;
}

CountSweep sweep_inclusions(ExperimentConfig cfg, const std::vector<int>& inclusion_counts) {
  if (inclusion_counts.empty()) throw std::invalid_argument("sweep_inclusions: list must be nonempty");
  CountSweep sweep;
  sweep.counts = inclusion_counts;
  cfg.field.type = FieldConfig::Type::Inclusions;
  for (int n : inclusion_counts) {
    cfg.field.count = n;
    RunResult r = run_mc(cfg);
    sweep.cells.push_back({r.eps_l2, r.eps_a});
  }
  return sweep;
}

EnergySeries energy_error_series(ExperimentConfig cfg, const std::vector<int>& counts) {
  if (counts.empty()) throw std::invalid_argument("energy_error_series: counts must be nonempty");
  EnergySeries series;
  series.counts = counts;
  auto p = build_problem(cfg);
  PartitionOfUnity pou = compute_pou(p->coarse);
  ScalarField kt = kappa_tilde(p->kappa, pou);
  int max_count = *std::max_element(counts.begin(), counts.end());
  AuxiliarySpace aux = build_auxiliary_space(p->coarse, p->kappa, kt, max_count, cfg.threads);
  std::vector<CoarseSpace> spaces;
  spaces.reserve(counts.size());
  for (int a : counts)
    spaces.push_back(build_space(*p, restrict_modes(aux, a), cfg.resolved_layers(), cfg.threads));
  std::vector<const CoarseSpace*> ptrs;
  for (const auto& s : spaces) ptrs.push_back(&s);
  MultiOut out = run_paths_multi(*p, ptrs, cfg.paths, cfg.seed, cfg.threads, true, {});
  series.times = std::move(out.series_times);
  series.eps_a = std::move(out.series_eps_a);
  return series;
}

TruncationStudy truncation_study(ExperimentConfig cfg, const std::vector<int>& n_list) {
  if (n_list.empty()) throw std::invalid_argument("truncation_study: n_list must be nonempty");
  if (!std::is_sorted(n_list.begin(), n_list.end()))
    throw std::invalid_argument("truncation_study: n_list must be ascending");

  TruncationStudy study;
  study.n_list = n_list;
  study.n_ref = 4 * n_list.back();
  cfg.noise.n = study.n_ref;
  auto p = build_problem(cfg);
  const auto times = p->tg.step_times();
  const int K = static_cast<int>(n_list.size());

  std::vector<std::vector<double>> diffs(cfg.paths);  // per path, per n
  parallel_for(cfg.paths, cfg.threads, [&](int pid) {
    SplitMix64 rng = make_rng(cfg.seed, RngStream::Paths, static_cast<std::uint64_t>(pid));
    NoisePath np = sample_truncated_noise(p->noise, times, rng, static_cast<std::uint64_t>(pid));
    auto solve_at = [&](const Vec& wdot) {
      FineSystem fine(p->fem, p->sigma, p->loads_ii, p->tg.dt());
      return run(p->u0_ii, fine, p->tg, wdot, {});
    };
    Vec ref = solve_at(np.wdot);
    std::vector<double> row(K);
    for (int i = 0; i < K; ++i) {
      Vec u_n = solve_at(wdot_from_eta(p->noise, np.eta, times, n_list[i]));
      Vec d = u_n - ref;
      row[i] = d.dot(p->fem.M_ii * d);
    }
    diffs[pid] = std::move(row);
  });

  study.analytic_tail.reserve(K);
  study.mc_diff_sq.reserve(K);
  DecayRule rule = cfg.noise.form == NoiseForm::Cons ? DecayRule::None : cfg.noise.decay;
  for (int i = 0; i < K; ++i) {
    study.analytic_tail.push_back(truncation_tail(rule, n_list[i]));
    double mean = pairwise_sum(0, cfg.paths, [&](int pd) { return diffs[pd][i]; }) / cfg.paths;
    study.mc_diff_sq.push_back(mean);
  }
  std::vector<double> ns(n_list.begin(), n_list.end());
  study.tail_slope = loglog_slope(ns, study.analytic_tail);
  study.mc_slope = loglog_slope(ns, study.mc_diff_sq);
  return study;
}

}  // namespace rht
