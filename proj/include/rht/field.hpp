#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rht/grid.hpp"
#include "rht/rng.hpp"

namespace rht {

enum class FieldKind { Coefficient, Nodal };

/// Piecewise-constant-per-cell coefficient field (kappa, sigma) or a nodal
/// solution field, depending on the kind tag.
struct ScalarField {
  const FineGrid* grid = nullptr;
  FieldKind kind = FieldKind::Coefficient;
  std::vector<double> v;

  int expected_size() const {
    return kind == FieldKind::Coefficient ? grid->n_cells() : grid->n_nodes();
  }
  double operator[](int i) const { return v[i]; }
  double& operator[](int i) { return v[i]; }
};

ScalarField constant_field(const FineGrid& grid, double value, FieldKind kind = FieldKind::Coefficient);

/// Periodic microstructure: the unit cell of size eps is stamped across the
/// domain. An empty tile mask selects the default geometry, a centered disk
/// of diameter eps/2; otherwise the mask is a tile_res x tile_res 0/1 grid
/// (row-major, 1 = inclusion) resolved onto the fine cells of one period.
struct PeriodicSpec {
  double eps = 0.125;
  double background = 1.0;
  double inclusion = 1e5;
  std::vector<std::uint8_t> tile_mask;
  int tile_res = 0;
};

/// Random circular inclusions; centers uniform in D, radii uniform in
/// [r_min, r_max]. With overlap_allowed=false, disks are kept pairwise
/// disjoint by rejection sampling (center and radius redrawn per attempt).
struct InclusionSpec {
  int count = 10;
  double r_min = 0.05;
  double r_max = 0.1;
  double background = 1.0;
  double inclusion = 1e5;
  bool overlap_allowed = false;
  int max_attempts = 10000;
};

struct PlacementFailure : std::runtime_error {
  PlacementFailure(const std::string& msg, int placed_count)
      : std::runtime_error(msg), placed(placed_count) {}
  int placed;
};

struct Disk {
  double x, y, r;
};

ScalarField gen_periodic(const FineGrid& grid, const PeriodicSpec& spec);
ScalarField gen_inclusions(const FineGrid& grid, const InclusionSpec& spec, SplitMix64& rng,
                           std::vector<Disk>* placed = nullptr);

/// max/min of a positive field.
double contrast(const ScalarField& field);

/// Text dump: header "nx ny", then nx*ny values row-major, one per line at
/// full decimal precision (round-trips bit-exactly). Nodal fields use node
/// counts in the header.
void write_field(const std::string& path, const ScalarField& field);
ScalarField read_field(const std::string& path, const FineGrid& grid,
                       FieldKind kind = FieldKind::Coefficient);

}  // namespace rht
