#include <doctest.h>

#include <set>
#include <stdexcept>

#include "rht/grid.hpp"

using namespace rht;

TEST_CASE("fine grid construction") {
  FineGrid g = build_fine_grid(100);
  CHECK(g.n_nodes() == 101 * 101);
  CHECK(g.n_interior() == 99 * 99);

  FineGrid small = build_fine_grid(2);
  CHECK(small.n_nodes() == 9);
  CHECK(small.n_interior() == 1);

  FineGrid ten = build_fine_grid(10);
  CHECK(ten.h == doctest::Approx(0.1));
  CHECK(ten.n_interior() == 81);

  CHECK_THROWS_AS(build_fine_grid(1), std::invalid_argument);
  CHECK_THROWS_AS(build_fine_grid(0), std::invalid_argument);
}

TEST_CASE("fine grid boundary flags and index round trip") {
  FineGrid g = build_fine_grid(7);
  int boundary = 0;
  for (int iy = 0; iy <= g.nx; ++iy)
    for (int ix = 0; ix <= g.nx; ++ix) {
      int id = g.node(ix, iy);
      auto [jx, jy] = g.node_coords(id);
      CHECK(jx == ix);
      CHECK(jy == iy);
      if (g.is_boundary(ix, iy)) ++boundary;
    }
  CHECK(boundary == g.n_nodes() - g.n_interior());
}

TEST_CASE("coarse grid construction") {
  FineGrid f100 = build_fine_grid(100);
  CoarseGrid c = build_coarse_grid(f100, 10);
  CHECK(c.H == doctest::Approx(0.1));
  CHECK(c.r == 10);
  CHECK(c.n_blocks() == 100);

  CoarseGrid c20 = build_coarse_grid(f100, 20);
  CHECK(c20.H == doctest::Approx(1.0 / 20));
  CHECK(c20.r == 5);

  FineGrid f20 = build_fine_grid(20);
  CoarseGrid c4 = build_coarse_grid(f20, 4);
  CHECK(c4.n_blocks() == 16);
  CHECK(c4.n_vertices() == 25);

  CHECK_THROWS_AS(build_coarse_grid(f100, 7), std::invalid_argument);
}

TEST_CASE("block tiling covers the fine grid exactly") {
  FineGrid f = build_fine_grid(24);
  CoarseGrid c = build_coarse_grid(f, 6);
  long cells = 0;
  for (int b = 0; b < c.n_blocks(); ++b) {
    auto [bx, by] = c.block_coords(b);
    auto [x0, x1] = c.block_node_range_x(bx);
    auto [y0, y1] = c.block_node_range_x(by);
    cells += static_cast<long>(x1 - x0) * (y1 - y0);
  }
  CHECK(cells == f.n_cells());
}

TEST_CASE("oversampling regions") {
  FineGrid f = build_fine_grid(20);
  CoarseGrid c = build_coarse_grid(f, 4);

  SUBCASE("interior block, one layer -> 3x3 block patch") {
    OversampleRegion reg = oversample(c, c.block(1, 1), 1);
    CHECK(reg.bx1 - reg.bx0 + 1 == 3);
    CHECK(reg.by1 - reg.by0 + 1 == 3);
    CHECK(static_cast<int>(reg.nodes.size()) == (3 * c.r + 1) * (3 * c.r + 1));
  }
  SUBCASE("corner block clipped to 2x2") {
    OversampleRegion reg = oversample(c, c.block(0, 0), 1);
    CHECK(reg.bx1 - reg.bx0 + 1 == 2);
    CHECK(reg.by1 - reg.by0 + 1 == 2);
  }
  SUBCASE("m = Nx saturates to the whole domain for every block") {
    for (int b = 0; b < c.n_blocks(); ++b) {
      OversampleRegion reg = oversample(c, b, c.Nx);
      CHECK(static_cast<int>(reg.nodes.size()) == f.n_nodes());
      CHECK(static_cast<int>(reg.interior.size()) == f.n_interior());
    }
  }
  SUBCASE("m = 0 is the block itself") {
    OversampleRegion reg = oversample(c, c.block(2, 1), 0);
    CHECK(static_cast<int>(reg.nodes.size()) == (c.r + 1) * (c.r + 1));
  }
  SUBCASE("nesting in m") {
    for (int m = 0; m < 3; ++m) {
      OversampleRegion a = oversample(c, c.block(3, 0), m);
      OversampleRegion b = oversample(c, c.block(3, 0), m + 1);
      std::set<int> bs(b.nodes.begin(), b.nodes.end());
      for (int n : a.nodes) CHECK(bs.count(n) == 1);
    }
  }
  SUBCASE("interior mask excludes the region boundary") {
    OversampleRegion reg = oversample(c, c.block(0, 0), 1);
    for (int n : reg.interior) {
      auto [ix, iy] = f.node_coords(n);
      CHECK(ix > reg.ix0);
      CHECK(ix < reg.ix1);
      CHECK(iy > reg.iy0);
      CHECK(iy < reg.iy1);
      CHECK(!f.is_boundary(ix, iy));
    }
  }
}

TEST_CASE("default oversampling layers") {
  CHECK(default_layers(1.0 / 10) == 4);
  CHECK(default_layers(1.0 / 100) == 8);
  CHECK(default_layers(1.0 / 5) == 3);  // round(2.796)
  CHECK_THROWS_AS(default_layers(1.0), std::invalid_argument);
}
