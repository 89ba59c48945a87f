#include "rht/msbasis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include "rht/parallel.hpp"

namespace rht {

double hat_value(const CoarseGrid& coarse, int vertex, double x, double y) {
  auto [vx, vy] = coarse.vertex_coords(vertex);
  double dx = std::abs(x - coarse.vertex_x(vx)) / coarse.H;
  double dy = std::abs(y - coarse.vertex_x(vy)) / coarse.H;
  if (dx >= 1.0 || dy >= 1.0) return 0.0;
  return (1.0 - dx) * (1.0 - dy);
}

std::pair<double, double> hat_grad(const CoarseGrid& coarse, int vertex, double x, double y) {
  auto [vx, vy] = coarse.vertex_coords(vertex);
  double rx = x - coarse.vertex_x(vx);
  double ry = y - coarse.vertex_x(vy);
  double dx = std::abs(rx) / coarse.H, dy = std::abs(ry) / coarse.H;
  if (dx >= 1.0 || dy >= 1.0) return {0.0, 0.0};
  double gx = (rx > 0 ? -1.0 : 1.0) / coarse.H * (1.0 - dy);
  double gy = (ry > 0 ? -1.0 : 1.0) / coarse.H * (1.0 - dx);
  return {gx, gy};
}

PartitionOfUnity compute_pou(const CoarseGrid& coarse) {
  const FineGrid& fg = *coarse.fine;
  PartitionOfUnity pou;
  pou.coarse = &coarse;
  pou.sum_grad2.assign(fg.n_cells(), 0.0);
  for (int cy = 0; cy < fg.nx; ++cy)
    for (int cx = 0; cx < fg.nx; ++cx) {
      double x = fg.cell_center_x(cx), y = fg.cell_center_x(cy);
      int bx = cx / coarse.r, by = cy / coarse.r;
      double s = 0.0;
      for (int oy = 0; oy <= 1; ++oy)
        for (int ox = 0; ox <= 1; ++ox) {
          auto [gx, gy] = hat_grad(coarse, coarse.vertex(bx + ox, by + oy), x, y);
          s += gx * gx + gy * gy;
        }
      pou.sum_grad2[fg.cell(cx, cy)] = s;
    }
  return pou;
}

ScalarField kappa_tilde(const ScalarField& kappa, const PartitionOfUnity& pou) {
  if (kappa.kind != FieldKind::Coefficient)
    throw std::invalid_argument("kappa_tilde: kappa must be a coefficient field");
  ScalarField kt = kappa;
  for (size_t c = 0; c < kt.v.size(); ++c) kt.v[c] *= pou.sum_grad2[c];
  return kt;
}

namespace {

// Dense pencil (stiffness, weighted mass) on one coarse block with free
// boundary conditions; all (r+1)^2 block nodes are dofs.
void block_pencil(const CoarseGrid& coarse, const ScalarField& kappa, const ScalarField& ktilde,
                  int block, std::vector<int>& nodes, Mat& A, Mat& S) {
  const FineGrid& fg = *coarse.fine;
  const int r = coarse.r;
  auto [bx, by] = coarse.block_coords(block);
  const int nb = (r + 1) * (r + 1);
  nodes.clear();
  nodes.reserve(nb);
  for (int iy = by * r; iy <= (by + 1) * r; ++iy)
    for (int ix = bx * r; ix <= (bx + 1) * r; ++ix) nodes.push_back(fg.node(ix, iy));

  A = Mat::Zero(nb, nb);
  S = Mat::Zero(nb, nb);
  const double h2 = fg.h * fg.h;
  for (int cy = by * r; cy < (by + 1) * r; ++cy)
    for (int cx = bx * r; cx < (bx + 1) * r; ++cx) {
      int c = fg.cell(cx, cy);
      int lx = cx - bx * r, ly = cy - by * r;
      int loc[4] = {ly * (r + 1) + lx, ly * (r + 1) + lx + 1, (ly + 1) * (r + 1) + lx,
                    (ly + 1) * (r + 1) + lx + 1};
      double k = kappa.v[c], kt = ktilde.v[c] * h2;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          A(loc[a], loc[b]) += k * kStiffRef[a][b];
          S(loc[a], loc[b]) += kt * kMassRef[a][b];
        }
    }
}

}  // namespace

BlockSpectrum local_spectral(const CoarseGrid& coarse, const ScalarField& kappa,
                             const ScalarField& ktilde, int block, int count) {
  BlockSpectrum spec;
  Mat A, S;
  block_pencil(coarse, kappa, ktilde, block, spec.nodes, A, S);
  int dim = static_cast<int>(spec.nodes.size());
  count = std::min(count, dim);
  EigPairs pairs = eig_sym_gen(A, S, count);
  spec.eigenvalues = pairs.values;
  spec.eigenvectors = pairs.vectors;
  spec.constraint_vec = S * pairs.vectors;
  return spec;
}

AuxiliarySpace build_auxiliary_space(const CoarseGrid& coarse, const ScalarField& kappa,
                                     const ScalarField& ktilde, int L, int threads) {
  if (L < 1) throw std::invalid_argument("build_auxiliary_space: need at least one mode per block");
  const int dim = (coarse.r + 1) * (coarse.r + 1);
  if (L > dim)
    throw std::invalid_argument("build_auxiliary_space: L exceeds the local dimension " +
                                std::to_string(dim));
  AuxiliarySpace aux;
  aux.coarse = &coarse;
  aux.modes_per_block = L;
  aux.blocks.resize(coarse.n_blocks());
  parallel_for(coarse.n_blocks(), threads, [&](int b) {
    aux.blocks[b] = local_spectral(coarse, kappa, ktilde, b, std::min(L + 1, dim));
  });
  double lam = std::numeric_limits<double>::infinity();
  for (const auto& b : aux.blocks)
    if (b.eigenvalues.size() > L) lam = std::min(lam, b.eigenvalues[L]);
  aux.Lambda = lam;
  return aux;
}

AuxiliarySpace restrict_modes(const AuxiliarySpace& aux, int L) {
  if (L < 1 || L > aux.modes_per_block)
    throw std::invalid_argument("restrict_modes: L outside the computed mode range");
  AuxiliarySpace out;
  out.coarse = aux.coarse;
  out.modes_per_block = L;
  out.blocks.resize(aux.blocks.size());
  double lam = std::numeric_limits<double>::infinity();
  for (size_t b = 0; b < aux.blocks.size(); ++b) {
    const BlockSpectrum& src = aux.blocks[b];
    BlockSpectrum& dst = out.blocks[b];
    dst.nodes = src.nodes;
    int keep = std::min<int>(L + 1, static_cast<int>(src.eigenvalues.size()));
    dst.eigenvalues = src.eigenvalues.head(keep);
    dst.eigenvectors = src.eigenvectors.leftCols(keep);
    dst.constraint_vec = src.constraint_vec.leftCols(keep);
    if (keep > L) lam = std::min(lam, dst.eigenvalues[L]);
  }
  out.Lambda = lam;
  return out;
}

namespace {

struct RegionSystem {
  OversampleRegion region;
  std::vector<int> loc;        // full node id -> region interior index, -1 outside
  SpMat A_loc;                 // stiffness on region-interior dofs
  SpMat B;                     // constraint rows over all blocks inside the region
  std::vector<int> blocks;     // block ids in region order (row-major)
  int target_row = -1;         // row of the (block, mode=0) constraint of the owner
  int L = 0;
};

RegionSystem build_region_system(const CoarseGrid& coarse, const ScalarField& kappa,
                                 const AuxiliarySpace& aux, int block, int layers) {
  const FineGrid& fg = *coarse.fine;
  RegionSystem rs;
  rs.region = oversample(coarse, block, layers);
  rs.L = aux.modes_per_block;

  rs.loc.assign(fg.n_nodes(), -1);
  for (size_t i = 0; i < rs.region.interior.size(); ++i)
    rs.loc[rs.region.interior[i]] = static_cast<int>(i);
  const int n_loc = static_cast<int>(rs.region.interior.size());

  // stiffness restricted to the region interior (zero on the region boundary)
  std::vector<Triplet> trips;
  trips.reserve(16 * static_cast<size_t>(rs.region.ix1 - rs.region.ix0) *
                (rs.region.iy1 - rs.region.iy0));
  for (int cy = rs.region.iy0; cy < rs.region.iy1; ++cy)
    for (int cx = rs.region.ix0; cx < rs.region.ix1; ++cx) {
      double k = kappa.v[fg.cell(cx, cy)];
      int corners[4] = {fg.node(cx, cy), fg.node(cx + 1, cy), fg.node(cx, cy + 1),
                        fg.node(cx + 1, cy + 1)};
      for (int a = 0; a < 4; ++a) {
        int ra = rs.loc[corners[a]];
        if (ra < 0) continue;
        for (int b = 0; b < 4; ++b) {
          int cb = rs.loc[corners[b]];
          if (cb >= 0) trips.emplace_back(ra, cb, k * kStiffRef[a][b]);
        }
      }
    }
  rs.A_loc.resize(n_loc, n_loc);
  rs.A_loc.setFromTriplets(trips.begin(), trips.end());

  // constraint rows: s_i'(psi, phi_j') for every block inside the region
  auto [obx, oby] = coarse.block_coords(block);
  std::vector<Triplet> btrips;
  int row_base = 0;
  for (int by = rs.region.by0; by <= rs.region.by1; ++by)
    for (int bx = rs.region.bx0; bx <= rs.region.bx1; ++bx) {
      int b = coarse.block(bx, by);
      rs.blocks.push_back(b);
      if (bx == obx && by == oby) rs.target_row = row_base;
      const BlockSpectrum& spec = aux.blocks[b];
      for (int j = 0; j < rs.L; ++j)
        for (size_t q = 0; q < spec.nodes.size(); ++q) {
          int lq = rs.loc[spec.nodes[q]];
          if (lq >= 0) {
            double v = spec.constraint_vec(static_cast<Eigen::Index>(q), j);
            if (v != 0.0) btrips.emplace_back(row_base + j, lq, v);
          }
        }
      row_base += rs.L;
    }
  rs.B.resize(row_base, n_loc);
  rs.B.setFromTriplets(btrips.begin(), btrips.end());
  return rs;
}

// Minimum-energy solutions for all modes of the region owner via the Schur
// complement: psi = A^{-1} B^T (B A^{-1} B^T)^{-1} e. When the constraint set
// is overcomplete (more rows than dofs) it is first reduced to a maximal
// independent row subset; modes whose own row drops out get a zero column.
Mat region_solutions(const RegionSystem& rs, bool* degenerate) {
  const int n_loc = static_cast<int>(rs.A_loc.rows());
  const int rows = static_cast<int>(rs.B.rows());

  std::vector<int> kept(rows);
  for (int i = 0; i < rows; ++i) kept[i] = i;
  if (rows > n_loc) {
    Mat Bt = Mat(rs.B).transpose();
    Eigen::ColPivHouseholderQR<Mat> qr(Bt);
    int rank = static_cast<int>(qr.rank());
    kept.assign(qr.colsPermutation().indices().data(),
                qr.colsPermutation().indices().data() + rank);
    std::sort(kept.begin(), kept.end());
    if (degenerate) *degenerate = true;
  }
  const int m = static_cast<int>(kept.size());

  Eigen::SimplicialLLT<SpMat> allt(rs.A_loc);
  if (allt.info() != Eigen::Success)
    throw std::invalid_argument("region_solutions: local stiffness not SPD");

  Mat Bk(m, n_loc);
  for (int i = 0; i < m; ++i) Bk.row(i) = rs.B.row(kept[i]);
  Mat X = allt.solve(Bk.transpose());  // A^{-1} B^T
  Mat S = Bk * X;
  Eigen::LLT<Mat> sllt(0.5 * (S + S.transpose()));
  if (sllt.info() != Eigen::Success)
    throw std::invalid_argument("region_solutions: constraint matrix rank-deficient");

  // right-hand sides: unit at the owner's constraint rows that survived
  Mat E = Mat::Zero(m, rs.L);
  for (int j = 0; j < rs.L; ++j) {
    auto it = std::lower_bound(kept.begin(), kept.end(), rs.target_row + j);
    if (it != kept.end() && *it == rs.target_row + j)
      E(static_cast<int>(it - kept.begin()), j) = 1.0;
  }
  return X * sllt.solve(E);  // n_loc x L
}

}  // namespace

Vec build_cem_basis(const CoarseGrid& coarse, const ScalarField& kappa, const DirichletMap& dofs,
                    const AuxiliarySpace& aux, int block, int mode, int layers) {
  if (mode < 0 || mode >= aux.modes_per_block)
    throw std::invalid_argument("build_cem_basis: mode out of range");
  RegionSystem rs = build_region_system(coarse, kappa, aux, block, layers);

  Vec psi_loc;
  if (rs.B.rows() <= rs.A_loc.rows()) {
    Vec rhs = Vec::Zero(rs.B.rows());
    rhs[rs.target_row + mode] = 1.0;
    psi_loc = solve_saddle(rs.A_loc, Mat(rs.B), rhs);
  } else {
    psi_loc = region_solutions(rs, nullptr).col(mode);
  }

  Vec out = Vec::Zero(dofs.n_interior());
  for (size_t i = 0; i < rs.region.interior.size(); ++i) {
    int dof = dofs.to_interior[rs.region.interior[i]];
    if (dof >= 0) out[dof] = psi_loc[static_cast<Eigen::Index>(i)];
  }
  return out;
}

MultiscaleBasis build_cem_basis_all(const CoarseGrid& coarse, const ScalarField& kappa,
                                    const DirichletMap& dofs, const SpMat& M_ii,
                                    const AuxiliarySpace& aux, int layers, int threads) {
  const int L = aux.modes_per_block;
  const int N = coarse.n_blocks();
  MultiscaleBasis basis;
  basis.layers = layers;
  basis.Lambda = aux.Lambda;
  basis.Phi = Mat::Zero(dofs.n_interior(), static_cast<Eigen::Index>(N) * L);
  basis.columns.reserve(static_cast<size_t>(N) * L);
  for (int b = 0; b < N; ++b)
    for (int j = 0; j < L; ++j) basis.columns.emplace_back(b, j);

  std::vector<char> degen(N, 0);
  parallel_for(N, threads, [&](int b) {
    RegionSystem rs = build_region_system(coarse, kappa, aux, b, layers);
    bool d = false;
    Mat psi = region_solutions(rs, &d);
    degen[b] = d ? 1 : 0;
    for (int j = 0; j < L; ++j) {
      double* col = basis.Phi.col(static_cast<Eigen::Index>(b) * L + j).data();
      for (size_t i = 0; i < rs.region.interior.size(); ++i)
        col[dofs.to_interior[rs.region.interior[i]]] = psi(static_cast<Eigen::Index>(i), j);
    }
  });
  basis.degenerate = std::any_of(degen.begin(), degen.end(), [](char c) { return c != 0; });

  if (basis.degenerate) {
    // Restrict to an M-orthonormal basis of the same span; the Galerkin
    // solution depends on the span only.
    Mat G = basis.Phi.transpose() * (M_ii * basis.Phi);
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    double lmax = es.eigenvalues().maxCoeff();
    double tol = 1e-12 * lmax;
    std::vector<int> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > tol) keep.push_back(static_cast<int>(i));
    Mat V(G.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t i = 0; i < keep.size(); ++i)
      V.col(static_cast<Eigen::Index>(i)) =
          es.eigenvectors().col(keep[i]) / std::sqrt(es.eigenvalues()[keep[i]]);
    basis.pruned_columns = static_cast<int>(G.rows() - V.cols());
    basis.Phi = (basis.Phi * V).eval();
    basis.columns.clear();
  }
  return basis;
}

Mat project_matrix(const Mat& Phi, const SpMat& K_ii) {
  Mat tmp = K_ii * Phi;
  Mat out = Phi.transpose() * tmp;
  return 0.5 * (out + out.transpose());
}

Vec project_vector(const Mat& Phi, const Vec& v) { return Phi.transpose() * v; }

Vec lift(const Mat& Phi, const Vec& y) { return Phi * y; }

CoarseOperators project_operators(const MultiscaleBasis& basis, const SpMat& M_ii,
                                  const SpMat& A_ii) {
  CoarseOperators ops;
  ops.Mhat = project_matrix(basis.Phi, M_ii);
  ops.Ahat = project_matrix(basis.Phi, A_ii);
  return ops;
}

}  // namespace rht
