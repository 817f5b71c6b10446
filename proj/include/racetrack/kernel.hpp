#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "field.hpp"
#include "grid.hpp"

namespace racetrack {

// Shorter arc length between angles r and s on a circle of radius rho.
inline double circle_distance(double r, double s, double rho) {
  double d = std::abs(r - s);
  return rho * std::min(d, 2.0 * std::numbers::pi - d);
}

// Circulant quadrature weights K_m = exp(-alpha * D(rho r_0, rho r_m)) * rho * dr.
// Applying them (see convolve) is the periodic trapezoidal rule for the
// integral operator f |-> \int f(rho s) exp(-alpha D(rho r, rho s)) rho ds.
struct TransportKernel {
  Grid grid;
  double alpha = 0.0;
  std::vector<double> weights;
};

inline TransportKernel build_kernel(const Grid& grid, double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw std::invalid_argument("kernel: alpha must be finite and >= 0");
  TransportKernel k{grid, alpha, std::vector<double>(grid.n)};
  double cell = grid.radius * grid.dr();
  for (int m = 0; m < grid.n; ++m)
    k.weights[m] = std::exp(-alpha * circle_distance(grid.node(0), grid.node(m), grid.radius)) * cell;
  return k;
}

namespace detail {

// out_i = sum_m w[m] * buf[i+m], where buf holds the field values twice back
// to back so the inner loop stays contiguous (no modular indexing). The sum
// runs over eight independent accumulator lanes; that fixed order is part of
// the function's contract (results replay bit-for-bit) and it breaks the
// add dependency chain so the loop vectorizes without reassociation.
inline void circulant_apply(const std::vector<double>& w, const std::vector<double>& buf,
                            std::vector<double>& out) {
  int n = static_cast<int>(w.size());
  const double* wp = w.data();
  for (int i = 0; i < n; ++i) {
    const double* f = buf.data() + i;
    double acc[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    int m = 0;
    for (; m + 8 <= n; m += 8)
      for (int l = 0; l < 8; ++l) acc[l] += wp[m + l] * f[m + l];
    double tail = 0.0;
    for (; m < n; ++m) tail += wp[m] * f[m];
    out[i] = ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
             ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
  }
}

}  // namespace detail

// out_i = sum_j K_{(j-i) mod n} * field_j. Direct O(n^2) product with the
// circulant generator row; this is the reference evaluation path.
inline Field convolve(const TransportKernel& kernel, const Field& field) {
  if (!(kernel.grid == field.grid))
    throw std::invalid_argument("convolve: kernel and field grids differ");
  int n = field.grid.n;
  std::vector<double> buf(2 * n);
  std::copy(field.values.begin(), field.values.end(), buf.begin());
  std::copy(field.values.begin(), field.values.end(), buf.begin() + n);
  Field out(field.grid);
  detail::circulant_apply(kernel.weights, buf, out.values);
  return out;
}

// Exact response of the continuum kernel operator to the Fourier mode
// e^{iks}: 2 alpha rho^2 (1 - (-1)^k e^{-alpha rho pi}) / (k^2 + alpha^2 rho^2).
// The k = 0, alpha = 0 case returns the circle length 2 pi rho instead of
// evaluating the 0/0 form. Used as the quadrature verification oracle.
inline double kernel_fourier_response(int k, double alpha, double rho) {
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw std::invalid_argument("kernel_fourier_response: alpha must be finite and >= 0");
  if (!std::isfinite(rho) || !(rho > 0.0))
    throw std::invalid_argument("kernel_fourier_response: rho must be positive");
  if (k == 0 && alpha == 0.0) return 2.0 * std::numbers::pi * rho;
  double em = std::expm1(-alpha * rho * std::numbers::pi);  // e^{-alpha rho pi} - 1
  double num = (k % 2 == 0) ? -em : 2.0 + em;
  return 2.0 * alpha * rho * rho * num / (static_cast<double>(k) * k + alpha * alpha * rho * rho);
}

}  // namespace racetrack
