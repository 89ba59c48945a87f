#pragma once

#include <utility>
#include <vector>

namespace rht {

/// Uniform square mesh of [0,1]^2 with nx*nx cells and row-major node
/// numbering. Immutable after construction.
struct FineGrid {
  int nx = 0;    // cells per axis (square grids only)
  double h = 0;  // mesh size, 1/nx

  int n_nodes() const { return (nx + 1) * (nx + 1); }
  int n_cells() const { return nx * nx; }
  int n_interior() const { return (nx - 1) * (nx - 1); }

  int node(int ix, int iy) const { return iy * (nx + 1) + ix; }
  int cell(int cx, int cy) const { return cy * nx + cx; }
  std::pair<int, int> node_coords(int id) const { return {id % (nx + 1), id / (nx + 1)}; }
  std::pair<int, int> cell_coords(int id) const { return {id % nx, id / nx}; }

  bool is_boundary(int ix, int iy) const { return ix == 0 || iy == 0 || ix == nx || iy == nx; }
  bool is_boundary_node(int id) const {
    auto [ix, iy] = node_coords(id);
    return is_boundary(ix, iy);
  }

  double node_x(int ix) const { return ix * h; }
  double cell_center_x(int cx) const { return (cx + 0.5) * h; }
};

FineGrid build_fine_grid(int nx);

/// Conforming coarse partition into Nx*Nx blocks; r fine cells per coarse
/// cell per axis.
struct CoarseGrid {
  const FineGrid* fine = nullptr;
  int Nx = 0;
  double H = 0;
  int r = 0;  // refinement ratio nx/Nx

  int n_blocks() const { return Nx * Nx; }
  int n_vertices() const { return (Nx + 1) * (Nx + 1); }

  int block(int bx, int by) const { return by * Nx + bx; }
  std::pair<int, int> block_coords(int b) const { return {b % Nx, b / Nx}; }
  int vertex(int vx, int vy) const { return vy * (Nx + 1) + vx; }
  std::pair<int, int> vertex_coords(int v) const { return {v % (Nx + 1), v / (Nx + 1)}; }

  /// Inclusive fine-node index range covered by block b along one axis.
  std::pair<int, int> block_node_range_x(int bx) const { return {bx * r, (bx + 1) * r}; }

  double vertex_x(int vx) const { return vx * H; }
};

CoarseGrid build_coarse_grid(const FineGrid& fine, int Nx);

/// Coarse block K_i dilated by m rings of coarse blocks, clipped to the
/// domain. Nodes are listed row-major; the interior mask drops everything on
/// the region boundary (which includes any overlap with the domain boundary).
struct OversampleRegion {
  int block = -1;
  int layers = 0;
  int bx0 = 0, bx1 = 0, by0 = 0, by1 = 0;  // inclusive coarse-block bounds
  int ix0 = 0, ix1 = 0, iy0 = 0, iy1 = 0;  // inclusive fine-node bounds
  std::vector<int> nodes;     // all fine nodes in the closed region
  std::vector<int> interior;  // fine nodes strictly inside the region box

  bool contains_node(int ix, int iy) const {
    return ix >= ix0 && ix <= ix1 && iy >= iy0 && iy <= iy1;
  }
  bool contains_block(int bx, int by) const {
    return bx >= bx0 && bx <= bx1 && by >= by0 && by <= by1;
  }
};

OversampleRegion oversample(const CoarseGrid& coarse, int block, int m);

/// Default oversampling layer count: round(4*log(H)/log(1/10)), half-up.
int default_layers(double H);

}  // namespace rht
