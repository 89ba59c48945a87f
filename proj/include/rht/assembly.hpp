#pragma once

#include <functional>
#include <vector>

#include "rht/field.hpp"
#include "rht/grid.hpp"
#include "rht/linalg.hpp"

namespace rht {

/// Q1 reference element matrices with local node order
/// (0,0),(1,0),(0,1),(1,1). Mass scales with h^2, stiffness is h-independent.
extern const double kMassRef[4][4];   // unit square; multiply by h^2
extern const double kStiffRef[4][4];  // per unit conductivity

/// Interior/boundary dof bookkeeping for homogeneous Dirichlet conditions.
struct DirichletMap {
  int n_nodes = 0;
  std::vector<int> to_interior;  // node id -> interior dof, -1 on the boundary
  std::vector<int> to_node;      // interior dof -> node id

  int n_interior() const { return static_cast<int>(to_node.size()); }
  Vec reduce(const Vec& full) const;
  Vec expand(const Vec& interior) const;
  SpMat reduce(const SpMat& full) const;
};

DirichletMap interior_map(const FineGrid& grid);

using SpaceTimeFn = std::function<double(double, double, double)>;  // f(x, y, t)

SpMat assemble_mass(const FineGrid& grid);
SpMat assemble_stiffness(const FineGrid& grid, const ScalarField& kappa);

/// Weighted mass matrix n_lq(z) with per-cell weight sigma * zbar^3, where
/// zbar is the mean of the four corner values of the nodal field z.
SpMat assemble_radiation(const FineGrid& grid, const ScalarField& sigma, const Vec& z_nodal);

/// Load vector by cell-midpoint quadrature: each cell adds f(center,t)*h^2/4
/// to its four corners.
Vec assemble_load(const FineGrid& grid, const SpaceTimeFn& f, double t);

/// Basis-function integrals (mass row sums).
Vec phi_integrals(const SpMat& M);

/// Noise load: spatially homogeneous wdot times the basis integrals.
Vec assemble_noise_load(const Vec& phi_ints, double wdot);

double l2_norm(const Vec& v, const SpMat& M);
double energy_norm(const Vec& v, const SpMat& A);

/// Fine operators shared by every path of a run. Immutable once built.
struct FemOperators {
  const FineGrid* grid = nullptr;
  DirichletMap dofs;
  SpMat M_full, A_full;  // all nodes
  SpMat M_ii, A_ii;      // interior dofs only
  Vec phi_ints;          // all nodes
  Vec phi_ints_ii;
};

FemOperators build_fem_operators(const FineGrid& grid, const ScalarField& kappa);

/// Re-assembles the interior radiation matrix in place for a new nodal field
/// without reallocating; the sparsity pattern is fixed at construction.
class RadiationAssembler {
 public:
  RadiationAssembler() = default;
  RadiationAssembler(const FineGrid& grid, const DirichletMap& dofs, const ScalarField& sigma);

  /// z_full is the nodal field on all nodes (zeros on the boundary).
  /// Returns the minimum cell weight sigma*zbar^3.
  double assemble(const Vec& z_full);
  const SpMat& matrix() const { return N_; }
  double sigma_max() const { return sigma_max_; }

 private:
  const FineGrid* grid_ = nullptr;
  std::vector<double> sigma_;
  double sigma_max_ = 0.0;
  SpMat N_;
  std::vector<int> corners_;  // 4 per cell, full node ids
  std::vector<int> dof_of_corner_;
  std::vector<int> slots_;  // 16 per cell, value index in N_, -1 if boundary
};

}  // namespace rht
