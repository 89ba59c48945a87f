#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "rht/assembly.hpp"
#include "rht/field.hpp"
#include "rht/grid.hpp"
#include "rht/linalg.hpp"

namespace rht {

/// Coarse bilinear hats. Only the aggregated per-cell sum of squared
/// gradients is stored; individual hats are evaluated on demand.
struct PartitionOfUnity {
  const CoarseGrid* coarse = nullptr;
  std::vector<double> sum_grad2;  // per fine cell, evaluated at cell centers
};

PartitionOfUnity compute_pou(const CoarseGrid& coarse);
double hat_value(const CoarseGrid& coarse, int vertex, double x, double y);
std::pair<double, double> hat_grad(const CoarseGrid& coarse, int vertex, double x, double y);

/// Spectral weight: kappa_tilde = kappa * sum_j |grad chi_j|^2 per cell.
ScalarField kappa_tilde(const ScalarField& kappa, const PartitionOfUnity& pou);

/// Eigen-pairs of the local pencil a_i(u,v) = lambda s_i(u,v) on one coarse
/// block, free boundary, S-normalized, ascending.
struct BlockSpectrum {
  std::vector<int> nodes;  // fine node ids of the block, row-major
  Vec eigenvalues;
  Mat eigenvectors;    // block_nodes x count
  Mat constraint_vec;  // S_i * eigenvectors; rows of the CEM constraint system
};

BlockSpectrum local_spectral(const CoarseGrid& coarse, const ScalarField& kappa,
                             const ScalarField& ktilde, int block, int count);

struct AuxiliarySpace {
  const CoarseGrid* coarse = nullptr;
  int modes_per_block = 0;  // L, uniform across blocks
  double Lambda = 0;        // min over blocks of eigenvalue L+1 (inf if all modes kept)
  std::vector<BlockSpectrum> blocks;
};

/// Solves every block eigenproblem with count = L+1 (clamped to the local
/// dimension) and records Lambda.
AuxiliarySpace build_auxiliary_space(const CoarseGrid& coarse, const ScalarField& kappa,
                                     const ScalarField& ktilde, int L, int threads = 1);

/// Trims an auxiliary space to fewer modes per block (shares the eigen
/// solves across basis-count sweeps).
AuxiliarySpace restrict_modes(const AuxiliarySpace& aux, int L);

/// One constrained-energy-minimizing basis function, extended by zero to the
/// whole domain (interior dofs). Constraints couple against every auxiliary
/// function of every block inside the oversampled region.
Vec build_cem_basis(const CoarseGrid& coarse, const ScalarField& kappa, const DirichletMap& dofs,
                    const AuxiliarySpace& aux, int block, int mode, int layers);

struct MultiscaleBasis {
  Mat Phi;  // n_interior x N_ms projection map
  int layers = 0;
  double Lambda = 0;
  std::vector<std::pair<int, int>> columns;  // (block, mode) per column
  // Overcomplete constraint sets (all modes kept on a region that covers the
  // dof count) are reduced to a maximal independent subset; dependent
  // columns are then pruned to an M-orthonormal basis of the same span.
  bool degenerate = false;
  int pruned_columns = 0;
};

MultiscaleBasis build_cem_basis_all(const CoarseGrid& coarse, const ScalarField& kappa,
                                    const DirichletMap& dofs, const SpMat& M_ii,
                                    const AuxiliarySpace& aux, int layers, int threads = 1);

struct CoarseOperators {
  Mat Mhat, Ahat;
};

/// Galerkin projection Phi^T K Phi of the fine operators.
CoarseOperators project_operators(const MultiscaleBasis& basis, const SpMat& M_ii, const SpMat& A_ii);
Mat project_matrix(const Mat& Phi, const SpMat& K_ii);
Vec project_vector(const Mat& Phi, const Vec& v);
Vec lift(const Mat& Phi, const Vec& y);

}  // namespace rht
