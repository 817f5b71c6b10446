#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace racetrack {

// Periodic discretization of a circle of radius `radius`: n equally spaced
// nodes r_i = -pi + i*dr, i = 0..n-1, with dr = 2*pi/n and node n wrapping
// back to node 0. n must be even so the antipodal point of every node falls
// exactly on a node.
struct Grid {
  int n = 256;
  double radius = 1.0;

  Grid() = default;
  Grid(int n_nodes, double radius_) : n(n_nodes), radius(radius_) {
    if (n < 8 || n % 2 != 0)
      throw std::invalid_argument("grid: n_nodes must be even and >= 8");
    if (!std::isfinite(radius) || !(radius > 0.0))
      throw std::invalid_argument("grid: radius must be positive and finite");
  }

  double dr() const { return 2.0 * std::numbers::pi / n; }
  double node(int i) const { return -std::numbers::pi + i * dr(); }

  int wrap(int i) const {
    int m = i % n;
    return m < 0 ? m + n : m;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace racetrack
