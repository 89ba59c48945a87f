#include "rht/stepper.hpp"

#include <algorithm>
#include <cmath>

namespace rht {

Vec step(const Vec& prev, SystemOps& ops, int j, double wdot, double dt) {
  Vec rhs = dt * (ops.load(j) + ops.noise_load(wdot)) + ops.apply_mass(prev);
  Vec predictor = ops.solve_semi_implicit(prev, rhs);
  return ops.solve_semi_implicit(predictor, rhs);
}

Vec run(Vec state, SystemOps& ops, const TimeGrid& tg, const Vec& wdot_samples,
        const std::function<void(int, const Vec&)>& on_step) {
  if (on_step) on_step(0, state);
  for (int j = 1; j <= tg.steps; ++j) {
    double wdot = wdot_samples.size() > 0 ? wdot_samples[j - 1] : 0.0;
    state = step(state, ops, j, wdot, tg.dt());
    if (on_step) on_step(j, state);
  }
  return state;
}

namespace {

bool same_pattern(const SpMat& a, const SpMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1, b.outerIndexPtr()) &&
         std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

}  // namespace

FineSystem::FineSystem(const FemOperators& fem, const ScalarField& sigma,
                       const std::vector<Vec>& loads_ii, double dt)
    : fem_(&fem), loads_(&loads_ii), dt_(dt), rad_(*fem.grid, fem.dofs, sigma) {
  sigma_zero_ = rad_.sigma_max() == 0.0;
  MA_ = fem.M_ii + dt * fem.A_ii;
  K_ = MA_;
  if (!same_pattern(MA_, rad_.matrix()) || !same_pattern(MA_, K_))
    throw std::logic_error("FineSystem: operator sparsity patterns disagree");
  llt_.analyzePattern(K_);
  z_full_ = Vec::Zero(fem.grid->n_nodes());
}

Vec FineSystem::solve_semi_implicit(const Vec& z, const Vec& rhs) {
  if (sigma_zero_) {
    if (!const_factored_) {
      llt_.factorize(MA_);
      if (llt_.info() != Eigen::Success) throw SolverFailure("FineSystem: M + dt*A not SPD", 0.0);
      const_factored_ = true;
    }
    return llt_.solve(rhs);
  }

  z_full_.setZero();
  for (int i = 0; i < fem_->dofs.n_interior(); ++i) z_full_[fem_->dofs.to_node[i]] = z[i];
  double wmin = rad_.assemble(z_full_);
  if (wmin < 0.0) flags.negative_weight_solves++;

  const double* ma = MA_.valuePtr();
  const double* nv = rad_.matrix().valuePtr();
  double* kv = K_.valuePtr();
  for (Eigen::Index i = 0; i < K_.nonZeros(); ++i) kv[i] = ma[i] + dt_ * nv[i];

  llt_.factorize(K_);
  if (llt_.info() == Eigen::Success) {
    Vec x = llt_.solve(rhs);
    if (x.allFinite()) return x;
  }
  // indefinite system: direct unsymmetric factorization
  flags.direct_fallbacks++;
  Eigen::SparseLU<SpMat> lu(K_);
  if (lu.info() != Eigen::Success)
    throw SolverFailure("FineSystem: direct factorization failed", std::numeric_limits<double>::quiet_NaN());
  return lu.solve(rhs);
}

CoarseSystem::CoarseSystem(const FemOperators& fem, const ScalarField& sigma, const Mat& Phi,
                           const Mat& Mhat, const Mat& Ahat, const std::vector<Vec>& loads_hat,
                           const Vec& noise_hat, double dt, double pcg_tol)
    : fem_(&fem),
      Phi_(&Phi),
      Mhat_(&Mhat),
      Ahat_(&Ahat),
      loads_(&loads_hat),
      noise_hat_(&noise_hat),
      dt_(dt),
      pcg_tol_(pcg_tol),
      rad_(*fem.grid, fem.dofs, sigma) {
  MAhat_ = Mhat + dt * Ahat;
  prec_.compute(MAhat_);
  if (prec_.info() != Eigen::Success)
    throw SolverFailure("CoarseSystem: Mhat + dt*Ahat not SPD", 0.0);
  z_full_ = Vec::Zero(fem.grid->n_nodes());
}

Vec CoarseSystem::apply_system(const Vec& v) const {
  Vec fine = *Phi_ * v;
  Vec nfine = rad_.matrix() * fine;
  return MAhat_ * v + dt_ * (Phi_->transpose() * nfine);
}

Vec CoarseSystem::solve_dense(const Vec& rhs) {
  flags.direct_fallbacks++;
  Mat Nhat = project_matrix(*Phi_, rad_.matrix());
  Mat K = MAhat_ + dt_ * Nhat;
  Eigen::LDLT<Mat> ldlt(K);
  if (ldlt.info() != Eigen::Success)
    throw SolverFailure("CoarseSystem: dense factorization failed",
                        std::numeric_limits<double>::quiet_NaN());
  return ldlt.solve(rhs);
}

Vec CoarseSystem::solve_semi_implicit(const Vec& z, const Vec& rhs) {
  Vec z_fine = *Phi_ * z;
  z_full_.setZero();
  for (int i = 0; i < fem_->dofs.n_interior(); ++i) z_full_[fem_->dofs.to_node[i]] = z_fine[i];
  double wmin = rad_.assemble(z_full_);
  if (wmin < 0.0) {
    flags.negative_weight_solves++;
    return solve_dense(rhs);
  }

  // PCG preconditioned by (Mhat + dt*Ahat); the radiation term is a modest
  // PSD perturbation, so a handful of iterations reaches solver tolerance.
  double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return Vec::Zero(rhs.size());
  Vec x = z;  // the frozen state is an excellent initial guess
  Vec r = rhs - apply_system(x);
  Vec zp = prec_.solve(r);
  Vec p = zp;
  double rz = r.dot(zp);
  const int max_iter = 400;
  for (int it = 0; it < max_iter; ++it) {
    if (r.norm() <= pcg_tol_ * rhs_norm) {
      flags.pcg_iterations += it;
      return x;
    }
    Vec Kp = apply_system(p);
    double pKp = p.dot(Kp);
    if (!(pKp > 0.0)) break;  // lost definiteness
    double alpha = rz / pKp;
    x += alpha * p;
    r -= alpha * Kp;
    zp = prec_.solve(r);
    double rz_new = r.dot(zp);
    p = zp + (rz_new / rz) * p;
    rz = rz_new;
  }
  flags.pcg_iterations += max_iter;
  return solve_dense(rhs);
}

}  // namespace rht
