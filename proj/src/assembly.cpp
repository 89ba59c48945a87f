#include "rht/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace rht {

// Tensor products of the 1D segment matrices [[1/3,1/6],[1/6,1/3]] and
// [[1,-1],[-1,1]] in (y,x) local order.
const double kMassRef[4][4] = {
    {1.0 / 9, 1.0 / 18, 1.0 / 18, 1.0 / 36},
    {1.0 / 18, 1.0 / 9, 1.0 / 36, 1.0 / 18},
    {1.0 / 18, 1.0 / 36, 1.0 / 9, 1.0 / 18},
    {1.0 / 36, 1.0 / 18, 1.0 / 18, 1.0 / 9},
};
const double kStiffRef[4][4] = {
    {2.0 / 3, -1.0 / 6, -1.0 / 6, -1.0 / 3},
    {-1.0 / 6, 2.0 / 3, -1.0 / 3, -1.0 / 6},
    {-1.0 / 6, -1.0 / 3, 2.0 / 3, -1.0 / 6},
    {-1.0 / 3, -1.0 / 6, -1.0 / 6, 2.0 / 3},
};

namespace {

inline void cell_corner_nodes(const FineGrid& g, int cx, int cy, int out[4]) {
  out[0] = g.node(cx, cy);
  out[1] = g.node(cx + 1, cy);
  out[2] = g.node(cx, cy + 1);
  out[3] = g.node(cx + 1, cy + 1);
}

SpMat assemble_weighted_mass(const FineGrid& g, const std::vector<double>& cell_weight) {
  std::vector<Triplet> trips;
  trips.reserve(16 * static_cast<size_t>(g.n_cells()));
  const double h2 = g.h * g.h;
  int corners[4];
  for (int cy = 0; cy < g.nx; ++cy)
    for (int cx = 0; cx < g.nx; ++cx) {
      double w = cell_weight[g.cell(cx, cy)] * h2;
      if (w == 0.0) continue;
      cell_corner_nodes(g, cx, cy, corners);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) trips.emplace_back(corners[a], corners[b], w * kMassRef[a][b]);
    }
  SpMat M(g.n_nodes(), g.n_nodes());
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

}  // namespace

DirichletMap interior_map(const FineGrid& grid) {
  DirichletMap m;
  m.n_nodes = grid.n_nodes();
  m.to_interior.assign(m.n_nodes, -1);
  m.to_node.reserve(grid.n_interior());
  for (int iy = 1; iy < grid.nx; ++iy)
    for (int ix = 1; ix < grid.nx; ++ix) {
      int id = grid.node(ix, iy);
      m.to_interior[id] = static_cast<int>(m.to_node.size());
      m.to_node.push_back(id);
    }
  return m;
}

Vec DirichletMap::reduce(const Vec& full) const {
  Vec out(n_interior());
  for (int i = 0; i < n_interior(); ++i) out[i] = full[to_node[i]];
  return out;
}

Vec DirichletMap::expand(const Vec& interior) const {
  Vec out = Vec::Zero(n_nodes);
  for (int i = 0; i < n_interior(); ++i) out[to_node[i]] = interior[i];
  return out;
}

SpMat DirichletMap::reduce(const SpMat& full) const {
  std::vector<Triplet> trips;
  trips.reserve(full.nonZeros());
  for (int k = 0; k < full.outerSize(); ++k)
    for (SpMat::InnerIterator it(full, k); it; ++it) {
      int r = to_interior[it.row()], c = to_interior[it.col()];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  SpMat out(n_interior(), n_interior());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SpMat assemble_mass(const FineGrid& grid) {
  return assemble_weighted_mass(grid, std::vector<double>(grid.n_cells(), 1.0));
}

SpMat assemble_stiffness(const FineGrid& grid, const ScalarField& kappa) {
  if (kappa.kind != FieldKind::Coefficient || static_cast<int>(kappa.v.size()) != grid.n_cells())
    throw std::invalid_argument("assemble_stiffness: kappa must be a per-cell coefficient field");
  for (double k : kappa.v)
    if (!(k > 0.0)) throw std::invalid_argument("assemble_stiffness: kappa must be positive");

  std::vector<Triplet> trips;
  trips.reserve(16 * static_cast<size_t>(grid.n_cells()));
  int corners[4];
  for (int cy = 0; cy < grid.nx; ++cy)
    for (int cx = 0; cx < grid.nx; ++cx) {
      double k = kappa.v[grid.cell(cx, cy)];
      cell_corner_nodes(grid, cx, cy, corners);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) trips.emplace_back(corners[a], corners[b], k * kStiffRef[a][b]);
    }
  SpMat A(grid.n_nodes(), grid.n_nodes());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat assemble_radiation(const FineGrid& grid, const ScalarField& sigma, const Vec& z_nodal) {
  if (static_cast<int>(sigma.v.size()) != grid.n_cells())
    throw std::invalid_argument("assemble_radiation: sigma must be a per-cell field");
  if (z_nodal.size() != grid.n_nodes())
    throw std::invalid_argument("assemble_radiation: z must be a nodal field");
  std::vector<double> w(grid.n_cells());
  int corners[4];
  for (int cy = 0; cy < grid.nx; ++cy)
    for (int cx = 0; cx < grid.nx; ++cx) {
      cell_corner_nodes(grid, cx, cy, corners);
      double zbar =
          0.25 * (z_nodal[corners[0]] + z_nodal[corners[1]] + z_nodal[corners[2]] + z_nodal[corners[3]]);
      w[grid.cell(cx, cy)] = sigma.v[grid.cell(cx, cy)] * zbar * zbar * zbar;
    }
  return assemble_weighted_mass(grid, w);
}

Vec assemble_load(const FineGrid& grid, const SpaceTimeFn& f, double t) {
  Vec F = Vec::Zero(grid.n_nodes());
  const double q = grid.h * grid.h / 4.0;
  int corners[4];
  for (int cy = 0; cy < grid.nx; ++cy)
    for (int cx = 0; cx < grid.nx; ++cx) {
      double fc = f(grid.cell_center_x(cx), grid.cell_center_x(cy), t) * q;
      cell_corner_nodes(grid, cx, cy, corners);
      for (int a = 0; a < 4; ++a) F[corners[a]] += fc;
    }
  return F;
}

Vec phi_integrals(const SpMat& M) { return M * Vec::Ones(M.cols()); }

Vec assemble_noise_load(const Vec& phi_ints, double wdot) { return wdot * phi_ints; }

double l2_norm(const Vec& v, const SpMat& M) { return std::sqrt(v.dot(M * v)); }

double energy_norm(const Vec& v, const SpMat& A) { return std::sqrt(v.dot(A * v)); }

FemOperators build_fem_operators(const FineGrid& grid, const ScalarField& kappa) {
  FemOperators ops;
  ops.grid = &grid;
  ops.dofs = interior_map(grid);
  ops.M_full = assemble_mass(grid);
  ops.A_full = assemble_stiffness(grid, kappa);
  ops.M_ii = ops.dofs.reduce(ops.M_full);
  ops.A_ii = ops.dofs.reduce(ops.A_full);
  ops.phi_ints = phi_integrals(ops.M_full);
  ops.phi_ints_ii = ops.dofs.reduce(ops.phi_ints);
  return ops;
}

RadiationAssembler::RadiationAssembler(const FineGrid& grid, const DirichletMap& dofs,
                                       const ScalarField& sigma)
    : grid_(&grid), sigma_(sigma.v) {
  if (static_cast<int>(sigma_.size()) != grid.n_cells())
    throw std::invalid_argument("RadiationAssembler: sigma must be a per-cell field");
  sigma_max_ = sigma_.empty() ? 0.0 : *std::max_element(sigma_.begin(), sigma_.end());

  // fixed pattern: reduced unit-weight mass
  SpMat M = assemble_weighted_mass(grid, std::vector<double>(grid.n_cells(), 1.0));
  N_ = dofs.reduce(M);

  const int nc = grid.n_cells();
  corners_.resize(4 * static_cast<size_t>(nc));
  dof_of_corner_.resize(4 * static_cast<size_t>(nc));
  slots_.assign(16 * static_cast<size_t>(nc), -1);
  int corners[4];
  for (int cy = 0; cy < grid.nx; ++cy)
    for (int cx = 0; cx < grid.nx; ++cx) {
      int c = grid.cell(cx, cy);
      cell_corner_nodes(grid, cx, cy, corners);
      for (int a = 0; a < 4; ++a) {
        corners_[4 * c + a] = corners[a];
        dof_of_corner_[4 * c + a] = dofs.to_interior[corners[a]];
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          int ra = dof_of_corner_[4 * c + a], cb = dof_of_corner_[4 * c + b];
          if (ra < 0 || cb < 0) continue;
          // locate (ra, cb) in the column-major storage
          const int* begin = N_.innerIndexPtr() + N_.outerIndexPtr()[cb];
          const int* end = N_.innerIndexPtr() + N_.outerIndexPtr()[cb + 1];
          const int* pos = std::lower_bound(begin, end, ra);
          slots_[16 * c + 4 * a + b] = static_cast<int>(pos - N_.innerIndexPtr());
        }
    }
}

double RadiationAssembler::assemble(const Vec& z_full) {
  double* vals = N_.valuePtr();
  std::fill(vals, vals + N_.nonZeros(), 0.0);
  const double h2 = grid_->h * grid_->h;
  double wmin = std::numeric_limits<double>::infinity();
  const int nc = grid_->n_cells();
  for (int c = 0; c < nc; ++c) {
    const int* g = &corners_[4 * c];
    double zbar = 0.25 * (z_full[g[0]] + z_full[g[1]] + z_full[g[2]] + z_full[g[3]]);
    double w = sigma_[c] * zbar * zbar * zbar;
    wmin = std::min(wmin, w);
    if (w == 0.0) continue;
    double wh2 = w * h2;
    const int* slot = &slots_[16 * c];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        int s = slot[4 * a + b];
        if (s >= 0) vals[s] += wh2 * kMassRef[a][b];
      }
  }
  return nc > 0 ? wmin : 0.0;
}

}  // namespace rht
