#pragma once

#include <functional>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "rht/assembly.hpp"
#include "rht/linalg.hpp"
#include "rht/msbasis.hpp"

namespace rht {

struct TimeGrid {
  double T = 0.1;
  int steps = 100;

  double dt() const { return T / steps; }
  double time(int j) const { return j * dt(); }
  std::vector<double> step_times() const {  // t_1..t_I
    std::vector<double> ts(steps);
    for (int j = 1; j <= steps; ++j) ts[j - 1] = time(j);
    return ts;
  }
};

struct StepFlags {
  int negative_weight_solves = 0;  // z^3 weight went negative somewhere
  int direct_fallbacks = 0;        // Cholesky gave way to LU / dense LDLT
  long pcg_iterations = 0;

  void merge(const StepFlags& o) {
    negative_weight_solves += o.negative_weight_solves;
    direct_fallbacks += o.direct_fallbacks;
    pcg_iterations += o.pcg_iterations;
  }
};

/// Abstract operator set shared by the fine and the projected coarse system.
/// States live in system coordinates (interior nodal values or coarse
/// coefficients).
class SystemOps {
 public:
  virtual ~SystemOps() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Vec apply_mass(const Vec& v) const = 0;
  virtual Vec load(int j) const = 0;              // F^j
  virtual Vec noise_load(double wdot) const = 0;  // Upsilon^j
  /// Solves (M + dt*A + dt*N(z)) x = rhs with the radiation weight frozen at z.
  virtual Vec solve_semi_implicit(const Vec& z, const Vec& rhs) = 0;
};

/// One predictor-corrector step. Both solves share a single right-hand side
/// dt*F^j + dt*Upsilon^j + M u^{j-1}; the predictor freezes the radiation
/// weight at u^{j-1}, the corrector at the predictor output.
Vec step(const Vec& prev, SystemOps& ops, int j, double wdot, double dt);

/// Applies `step` over the whole time grid. wdot_samples holds the noise at
/// t_1..t_I (empty means no noise). on_step, when set, sees every state
/// including the initial one (j = 0).
Vec run(Vec state, SystemOps& ops, const TimeGrid& tg, const Vec& wdot_samples,
        const std::function<void(int, const Vec&)>& on_step = {});

/// Fine-level system on interior dofs. Refactorizes per solve since the
/// radiation matrix tracks the state; with sigma identically zero the
/// constant factorization is reused.
class FineSystem : public SystemOps {
 public:
  FineSystem(const FemOperators& fem, const ScalarField& sigma, const std::vector<Vec>& loads_ii,
             double dt);

  Eigen::Index dim() const override { return fem_->M_ii.rows(); }
  Vec apply_mass(const Vec& v) const override { return fem_->M_ii * v; }
  Vec load(int j) const override { return (*loads_)[j - 1]; }
  Vec noise_load(double wdot) const override { return wdot * fem_->phi_ints_ii; }
  Vec solve_semi_implicit(const Vec& z, const Vec& rhs) override;

  StepFlags flags;

 private:
  const FemOperators* fem_;
  const std::vector<Vec>* loads_;
  double dt_;
  bool sigma_zero_;
  RadiationAssembler rad_;
  SpMat MA_;  // M + dt*A
  SpMat K_;   // MA + dt*N, same pattern
  Eigen::SimplicialLLT<SpMat> llt_;
  bool const_factored_ = false;
  Vec z_full_;
};

/// Projected coarse system. The radiation term is lift-assemble-project at
/// every solve: the state is lifted through Phi, the fine weighted-mass
/// matrix is rebuilt, and its Galerkin projection enters the solve. The
/// solve runs matrix-free PCG preconditioned by (Mhat + dt*Ahat); negative
/// radiation weights divert to a dense factorization.
class CoarseSystem : public SystemOps {
 public:
  CoarseSystem(const FemOperators& fem, const ScalarField& sigma, const Mat& Phi, const Mat& Mhat,
               const Mat& Ahat, const std::vector<Vec>& loads_hat, const Vec& noise_hat,
               double dt, double pcg_tol = 1e-12);

  Eigen::Index dim() const override { return Mhat_->rows(); }
  Vec apply_mass(const Vec& v) const override { return *Mhat_ * v; }
  Vec load(int j) const override { return (*loads_)[j - 1]; }
  Vec noise_load(double wdot) const override { return wdot * (*noise_hat_); }
  Vec solve_semi_implicit(const Vec& z, const Vec& rhs) override;

  StepFlags flags;

 private:
  const FemOperators* fem_;
  const Mat* Phi_;
  const Mat* Mhat_;
  const Mat* Ahat_;
  const std::vector<Vec>* loads_;
  const Vec* noise_hat_;
  double dt_, pcg_tol_;
  RadiationAssembler rad_;
  Mat MAhat_;
  Eigen::LLT<Mat> prec_;
  Vec z_full_;

  Vec apply_system(const Vec& v) const;  // (Mhat + dt*Ahat + dt*Phi^T N Phi) v
  Vec solve_dense(const Vec& rhs);
};

}  // namespace rht
