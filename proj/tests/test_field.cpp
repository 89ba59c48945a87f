#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <set>

#include "rht/field.hpp"

using namespace rht;

TEST_CASE("periodic field requires a compatible period") {
  FineGrid g100 = build_fine_grid(100);
  PeriodicSpec spec;
  spec.eps = 1.0 / 8;
  spec.inclusion = 1e5;
  CHECK_THROWS_AS(gen_periodic(g100, spec), std::invalid_argument);  // 100/8 not integer
}

TEST_CASE("periodic field tiles exactly") {
  FineGrid g = build_fine_grid(96);
  PeriodicSpec spec;
  spec.eps = 1.0 / 8;
  spec.background = 1.0;
  spec.inclusion = 1e5;
  ScalarField f = gen_periodic(g, spec);

  const int p = 12;  // cells per period
  // every tile matches the (0,0) tile -> exactly one distinct tile pattern
  for (int cy = 0; cy < g.nx; ++cy)
    for (int cx = 0; cx < g.nx; ++cx)
      CHECK(f.v[g.cell(cx, cy)] == f.v[g.cell(cx % p, cy % p)]);

  // periodicity in the domain sense: value(x) == value(x + eps)
  for (int cy = 0; cy < g.nx; ++cy)
    for (int cx = 0; cx + p < g.nx; ++cx)
      CHECK(f.v[g.cell(cx, cy)] == f.v[g.cell(cx + p, cy)]);

  // both phases present and positive
  CHECK(contrast(f) == doctest::Approx(1e5));
}

TEST_CASE("degenerate periodic spec gives a constant field") {
  FineGrid g = build_fine_grid(16);
  PeriodicSpec spec;
  spec.eps = 0.25;
  spec.background = 3.0;
  spec.inclusion = 3.0;
  ScalarField f = gen_periodic(g, spec);
  for (double v : f.v) CHECK(v == 3.0);
}

TEST_CASE("periodic field with a custom tile mask") {
  FineGrid g = build_fine_grid(16);
  PeriodicSpec spec;
  spec.eps = 0.25;  // 4 cells per period
  spec.tile_res = 2;
  spec.tile_mask = {1, 0, 0, 0};  // inclusion in one quadrant
  spec.inclusion = 10.0;
  ScalarField f = gen_periodic(g, spec);
  CHECK(f.v[g.cell(0, 0)] == 10.0);
  CHECK(f.v[g.cell(2, 0)] == 1.0);
  CHECK(f.v[g.cell(0, 2)] == 1.0);
  CHECK(f.v[g.cell(4, 0)] == 10.0);  // next tile
}

TEST_CASE("inclusion fields") {
  FineGrid g = build_fine_grid(100);

  SUBCASE("no inclusions -> constant background") {
    InclusionSpec spec;
    spec.count = 0;
    SplitMix64 rng = make_rng(7, RngStream::Field);
    ScalarField f = gen_inclusions(g, spec, rng);
    for (double v : f.v) CHECK(v == spec.background);
  }

  SUBCASE("forty non-overlapping disks") {
    InclusionSpec spec;
    spec.count = 40;
    spec.inclusion = 1e5;
    spec.overlap_allowed = false;
    SplitMix64 rng = make_rng(100, RngStream::Field);
    std::vector<Disk> disks;
    ScalarField f = gen_inclusions(g, spec, rng, &disks);
    REQUIRE(disks.size() == 40);
    for (size_t i = 0; i < disks.size(); ++i)
      for (size_t j = i + 1; j < disks.size(); ++j) {
        double dx = disks[i].x - disks[j].x, dy = disks[i].y - disks[j].y;
        CHECK(std::sqrt(dx * dx + dy * dy) > disks[i].r + disks[j].r);
      }
    CHECK(contrast(f) == doctest::Approx(1e5));
  }

  SUBCASE("single disk covers ~ pi r^2 / h^2 cells") {
    InclusionSpec spec;
    spec.count = 1;
    spec.r_min = spec.r_max = 0.05;
    SplitMix64 rng = make_rng(3, RngStream::Field);
    std::vector<Disk> disks;
    ScalarField f = gen_inclusions(g, spec, rng, &disks);
    REQUIRE(disks.size() == 1);
    int count = 0;
    for (double v : f.v)
      if (v == spec.inclusion) ++count;
    double expected = M_PI * 0.05 * 0.05 / (g.h * g.h);  // 78.5
    double ring = 2 * M_PI * 0.05 / g.h + 4;             // one ring of boundary cells
    CHECK(std::abs(count - expected) <= ring);
  }

  SUBCASE("determinism: same seed gives a bitwise identical field") {
    InclusionSpec spec;
    spec.count = 12;
    SplitMix64 a = make_rng(42, RngStream::Field), b = make_rng(42, RngStream::Field);
    ScalarField fa = gen_inclusions(g, spec, a), fb = gen_inclusions(g, spec, b);
    CHECK(fa.v == fb.v);
  }

  SUBCASE("impossible packing reports the partial count") {
    InclusionSpec spec;
    spec.count = 500;  // cannot fit disjointly
    spec.max_attempts = 200;
    SplitMix64 rng = make_rng(1, RngStream::Field);
    try {
      gen_inclusions(g, spec, rng);
      FAIL("expected PlacementFailure");
    } catch (const PlacementFailure& e) {
      CHECK(e.placed > 0);
      CHECK(e.placed < 500);
    }
  }
}

TEST_CASE("contrast") {
  FineGrid g = build_fine_grid(4);
  ScalarField f = constant_field(g, 2.0);
  CHECK(contrast(f) == 1.0);

  f.v[3] = 8.0;
  CHECK(contrast(f) == doctest::Approx(4.0));

  f.v[5] = 0.0;
  CHECK_THROWS_AS(contrast(f), std::invalid_argument);
}

TEST_CASE("field dump round-trips bit-exactly") {
  FineGrid g = build_fine_grid(8);
  PeriodicSpec spec;
  spec.eps = 0.25;
  spec.inclusion = 1.0 / 3.0 * 1e5;  // not representable in few digits
  ScalarField f = gen_periodic(g, spec);
  f.v[0] = 0.1 + 0.2;  // classic non-exact decimal

  std::string path = "round_trip_test.field";
  write_field(path, f);
  ScalarField back = read_field(path, g);
  CHECK(back.v == f.v);
  std::remove(path.c_str());
}
