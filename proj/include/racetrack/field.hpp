#pragma once

#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace racetrack {

// Per-node scalar values tied to a grid (population density, price index,
// wages, ...).
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.n, fill) {}
  Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != g.n)
      throw std::invalid_argument("field: value count does not match grid");
  }

  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
  int size() const { return static_cast<int>(values.size()); }
};

inline void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument("fields live on different grids");
}

// rotate(f, m)[i] = f[(i-m) mod n]: shifts the pattern m nodes forward.
inline Field rotate(const Field& f, int m) {
  Field out(f.grid);
  for (int i = 0; i < f.grid.n; ++i) out.values[i] = f.values[f.grid.wrap(i - m)];
  return out;
}

}  // namespace racetrack
