#include "rht/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace rht {

Vec solve_spd(const SpMat& A, const Vec& b, double tol) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw std::invalid_argument("solve_spd: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_spd: tol must be positive");

  if (A.rows() <= 20000) {
    Eigen::SimplicialLLT<SpMat> llt(A);
    if (llt.info() == Eigen::Success) {
      Vec x = llt.solve(b);
      double res = (A * x - b).norm();
      if (res <= tol * std::max(b.norm(), 1e-300)) return x;
      // fall through to CG if Cholesky lost too much accuracy
    }
  }

  const Eigen::Index n = A.rows();
  Vec dinv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = A.coeff(i, i);
    dinv[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  Vec x = Vec::Zero(n);
  Vec r = b;
  Vec z = dinv.cwiseProduct(r);
  Vec p = z;
  double rz = r.dot(z);
  double bnorm = std::max(b.norm(), 1e-300);
  long max_iter = 10 * static_cast<long>(n);
  for (long it = 0; it < max_iter; ++it) {
    if (r.norm() <= tol * bnorm) return x;
    Vec Ap = A * p;
    double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = dinv.cwiseProduct(r);
    double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  double res = (A * x - b).norm() / bnorm;
  if (res <= tol) return x;
  throw SolverFailure("solve_spd: PCG did not converge after " + std::to_string(max_iter) +
                          " iterations, relative residual " + std::to_string(res),
                      res);
}

EigPairs eig_sym_gen(const Mat& A, const Mat& S, int count) {
  if (A.rows() != A.cols() || S.rows() != S.cols() || A.rows() != S.rows())
    throw std::invalid_argument("eig_sym_gen: dimension mismatch");
  if (count < 1 || count > A.rows()) throw std::invalid_argument("eig_sym_gen: bad count");

  Eigen::LLT<Mat> chol(S);
  if (chol.info() != Eigen::Success)
    throw std::invalid_argument("eig_sym_gen: S is not positive definite");

  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(A, S, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw std::invalid_argument("eig_sym_gen: eigensolver failed");

  EigPairs out;
  out.values = es.eigenvalues().head(count);
  out.vectors = es.eigenvectors().leftCols(count);
  return out;
}

Vec solve_saddle(const SpMat& A, const Mat& B, const Vec& rhs_c) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.rows();
  if (A.cols() != n || B.cols() != n || rhs_c.size() != m)
    throw std::invalid_argument("solve_saddle: dimension mismatch");
  if (m > n) throw std::invalid_argument("solve_saddle: more constraints than unknowns (B rank-deficient)");

  SpMat K(n + m, n + m);
  std::vector<Triplet> trips;
  trips.reserve(A.nonZeros() + 2 * static_cast<size_t>(m) * n);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double v = B(i, j);
      if (v != 0.0) {
        trips.emplace_back(n + i, j, v);
        trips.emplace_back(j, n + i, v);
      }
    }
  K.setFromTriplets(trips.begin(), trips.end());

  Eigen::SparseLU<SpMat> lu(K);
  if (lu.info() != Eigen::Success)
    throw std::invalid_argument("solve_saddle: KKT factorization failed (B rank-deficient or A singular)");
  Vec rhs = Vec::Zero(n + m);
  rhs.tail(m) = rhs_c;
  Vec sol = lu.solve(rhs);
  // guard against a silently singular factor
  double cres = (B * sol.head(n) - rhs_c).norm();
  if (!sol.allFinite() || cres > 1e-8 * std::max(1.0, rhs_c.norm()))
    throw std::invalid_argument("solve_saddle: constraints not satisfied (B rank-deficient?)");
  return sol.head(n);
}

}  // namespace rht
