#include "rht/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rht {

FineGrid build_fine_grid(int nx) {
  if (nx < 2) throw std::invalid_argument("build_fine_grid: nx must be >= 2, got " + std::to_string(nx));
  FineGrid g;
  g.nx = nx;
  g.h = 1.0 / nx;
  return g;
}

CoarseGrid build_coarse_grid(const FineGrid& fine, int Nx) {
  if (Nx < 1) throw std::invalid_argument("build_coarse_grid: Nx must be >= 1");
  if (fine.nx % Nx != 0)
    throw std::invalid_argument("build_coarse_grid: nx=" + std::to_string(fine.nx) +
                                " is not divisible by Nx=" + std::to_string(Nx));
  CoarseGrid c;
  c.fine = &fine;
  c.Nx = Nx;
  c.H = 1.0 / Nx;
  c.r = fine.nx / Nx;
  return c;
}

OversampleRegion oversample(const CoarseGrid& coarse, int block, int m) {
  if (block < 0 || block >= coarse.n_blocks()) throw std::invalid_argument("oversample: bad block index");
  if (m < 0) throw std::invalid_argument("oversample: layer count must be >= 0");

  OversampleRegion reg;
  reg.block = block;
  reg.layers = m;
  auto [bx, by] = coarse.block_coords(block);
  reg.bx0 = std::max(0, bx - m);
  reg.bx1 = std::min(coarse.Nx - 1, bx + m);
  reg.by0 = std::max(0, by - m);
  reg.by1 = std::min(coarse.Nx - 1, by + m);

  reg.ix0 = reg.bx0 * coarse.r;
  reg.ix1 = (reg.bx1 + 1) * coarse.r;
  reg.iy0 = reg.by0 * coarse.r;
  reg.iy1 = (reg.by1 + 1) * coarse.r;

  const FineGrid& fg = *coarse.fine;
  reg.nodes.reserve((reg.ix1 - reg.ix0 + 1) * (reg.iy1 - reg.iy0 + 1));
  for (int iy = reg.iy0; iy <= reg.iy1; ++iy)
    for (int ix = reg.ix0; ix <= reg.ix1; ++ix) {
      reg.nodes.push_back(fg.node(ix, iy));
      if (ix > reg.ix0 && ix < reg.ix1 && iy > reg.iy0 && iy < reg.iy1)
        reg.interior.push_back(fg.node(ix, iy));
    }
  return reg;
}

int default_layers(double H) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("default_layers: H must be in (0,1)");
  double raw = 4.0 * std::log(H) / std::log(0.1);
  return static_cast<int>(std::floor(raw + 0.5));
}

}  // namespace rht
