#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>

namespace rht {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct SolverFailure : std::runtime_error {
  SolverFailure(const std::string& msg, double res) : std::runtime_error(msg), residual(res) {}
  double residual;
};

/// Solves Ax=b for symmetric positive definite A: sparse Cholesky up to
/// n=20000, diagonally preconditioned CG beyond. Guarantees
/// ||Ax-b|| <= tol*||b||.
Vec solve_spd(const SpMat& A, const Vec& b, double tol = 1e-10);

struct EigPairs {
  Vec values;   // ascending
  Mat vectors;  // S-normalized columns, v^T S v = 1
};

/// Smallest `count` eigenpairs of the symmetric pencil A v = lambda S v
/// (A symmetric PSD, S symmetric positive definite).
EigPairs eig_sym_gen(const Mat& A, const Mat& S, int count);

/// Minimizes psi^T A psi subject to B psi = rhs_c through the KKT system
/// [[A, B^T], [B, 0]]. A must be SPD on the given dof set and B full row
/// rank; a singular factorization reports invalid-argument.
Vec solve_saddle(const SpMat& A, const Mat& B, const Vec& rhs_c);

}  // namespace rht
