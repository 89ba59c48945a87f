#include "rht/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace rht {

ScalarField constant_field(const FineGrid& grid, double value, FieldKind kind) {
  ScalarField f;
  f.grid = &grid;
  f.kind = kind;
  f.v.assign(f.expected_size(), value);
  return f;
}

ScalarField gen_periodic(const FineGrid& grid, const PeriodicSpec& spec) {
  if (!(spec.eps > 0.0 && spec.eps <= 1.0))
    throw std::invalid_argument("gen_periodic: eps must be in (0,1]");
  double cells_per_period = grid.nx * spec.eps;
  int p = static_cast<int>(std::llround(cells_per_period));
  if (p < 1 || std::abs(cells_per_period - p) > 1e-9 * grid.nx)
    throw std::invalid_argument("gen_periodic: eps=" + std::to_string(spec.eps) +
                                " incompatible with nx=" + std::to_string(grid.nx) +
                                " (nx*eps must be an integer)");
  if (!spec.tile_mask.empty() && spec.tile_res < 1)
    throw std::invalid_argument("gen_periodic: tile_res must be >= 1 when a tile mask is given");
  if (!spec.tile_mask.empty() &&
      spec.tile_mask.size() != static_cast<size_t>(spec.tile_res) * spec.tile_res)
    throw std::invalid_argument("gen_periodic: tile mask size does not match tile_res^2");
  if (!(spec.background > 0.0) || !(spec.inclusion > 0.0))
    throw std::invalid_argument("gen_periodic: coefficient values must be positive");

  ScalarField f = constant_field(grid, spec.background);
  const double radius = spec.eps / 4.0;  // default tile: centered disk, diameter eps/2
  for (int cy = 0; cy < grid.nx; ++cy) {
    for (int cx = 0; cx < grid.nx; ++cx) {
      // local cell index within the period tile
      int lx = cx % p, ly = cy % p;
      bool inside;
      if (spec.tile_mask.empty()) {
        double dx = (lx + 0.5) / p - 0.5;  // tile-local center offset, units of eps
        double dy = (ly + 0.5) / p - 0.5;
        inside = (dx * dx + dy * dy) * spec.eps * spec.eps <= radius * radius;
      } else {
        int mx = lx * spec.tile_res / p;
        int my = ly * spec.tile_res / p;
        inside = spec.tile_mask[my * spec.tile_res + mx] != 0;
      }
      if (inside) f.v[grid.cell(cx, cy)] = spec.inclusion;
    }
  }
  return f;
}

ScalarField gen_inclusions(const FineGrid& grid, const InclusionSpec& spec, SplitMix64& rng,
                           std::vector<Disk>* placed_out) {
  if (spec.count < 0) throw std::invalid_argument("gen_inclusions: count must be >= 0");
  if (!(spec.r_min > 0.0) || spec.r_min > spec.r_max)
    throw std::invalid_argument("gen_inclusions: need 0 < r_min <= r_max");
  if (!(spec.background > 0.0) || spec.inclusion < spec.background)
    throw std::invalid_argument("gen_inclusions: need inclusion >= background > 0");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> rad(spec.r_min, spec.r_max);

  std::vector<double> cxs, cys, rs;
  for (int i = 0; i < spec.count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      double x = unit(rng), y = unit(rng), rr = rad(rng);
      if (!spec.overlap_allowed) {
        bool clash = false;
        for (size_t j = 0; j < rs.size() && !clash; ++j) {
          double dx = x - cxs[j], dy = y - cys[j], d = rr + rs[j];
          clash = dx * dx + dy * dy <= d * d;
        }
        if (clash) continue;
      }
      cxs.push_back(x);
      cys.push_back(y);
      rs.push_back(rr);
      placed = true;
    }
    if (!placed)
      throw PlacementFailure("gen_inclusions: failed to place disk " + std::to_string(i + 1) +
                                 " of " + std::to_string(spec.count) + " after " +
                                 std::to_string(spec.max_attempts) + " attempts (placed " +
                                 std::to_string(i) + ")",
                             i);
  }

  if (placed_out) {
    placed_out->clear();
    for (size_t j = 0; j < rs.size(); ++j) placed_out->push_back({cxs[j], cys[j], rs[j]});
  }

  ScalarField f = constant_field(grid, spec.background);
  for (int cy = 0; cy < grid.nx; ++cy)
    for (int cx = 0; cx < grid.nx; ++cx) {
      double x = grid.cell_center_x(cx), y = grid.cell_center_x(cy);
      for (size_t j = 0; j < rs.size(); ++j) {
        double dx = x - cxs[j], dy = y - cys[j];
        if (dx * dx + dy * dy <= rs[j] * rs[j]) {
          f.v[grid.cell(cx, cy)] = spec.inclusion;
          break;
        }
      }
    }
  return f;
}

double contrast(const ScalarField& field) {
  if (field.v.empty()) throw std::invalid_argument("contrast: empty field");
  auto [mn, mx] = std::minmax_element(field.v.begin(), field.v.end());
  if (!(*mn > 0.0)) throw std::invalid_argument("contrast: field must be strictly positive");
  return *mx / *mn;
}

void write_field(const std::string& path, const ScalarField& field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_field: cannot open " + path);
  int n = field.kind == FieldKind::Coefficient ? field.grid->nx : field.grid->nx + 1;
  char buf[64];
  out << n << ' ' << n << '\n';
  for (double x : field.v) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("write_field: write failed for " + path);
}

ScalarField read_field(const std::string& path, const FineGrid& grid, FieldKind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_field: cannot open " + path);
  int nx = 0, ny = 0;
  if (!(in >> nx >> ny)) throw std::runtime_error("read_field: bad header in " + path);
  ScalarField f;
  f.grid = &grid;
  f.kind = kind;
  int expected_n = kind == FieldKind::Coefficient ? grid.nx : grid.nx + 1;
  if (nx != expected_n || ny != expected_n)
    throw std::runtime_error("read_field: " + path + " has dimensions " + std::to_string(nx) +
                             "x" + std::to_string(ny) + ", expected " + std::to_string(expected_n) +
                             "x" + std::to_string(expected_n));
  f.v.resize(static_cast<size_t>(nx) * ny);
  for (double& x : f.v)
    if (!(in >> x)) throw std::runtime_error("read_field: truncated data in " + path);
  return f;
}

}  // namespace rht
