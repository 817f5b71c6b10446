#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <vector>

#include "field.hpp"

namespace racetrack {

// A contiguous arc of nodes where the density exceeds the uniform level.
// `end` is inclusive and may be smaller than `start` when the arc wraps
// across the periodic boundary.
struct UrbanArea {
  int start = 0;
  int end = 0;
  double peak = 0.0;
  double mass = 0.0;
};

struct UrbanAreaReport {
  int count = 0;
  std::vector<UrbanArea> areas;
};

// Connected periodic components of { j : lambda_j > lambda_bar }, keeping
// those whose peak reaches peak_factor * lambda_bar. The threshold pair
// (above uniform, peak well above uniform) separates genuine agglomerations
// from the shallow ripples a near-uniform solution carries.
inline UrbanAreaReport count_urban_areas(const Field& lambda, double lambda_bar,
                                         double peak_factor = 1.5) {
  if (!(lambda_bar > 0.0))
    throw std::invalid_argument("count_urban_areas: lambda_bar must be > 0");
  if (!(peak_factor > 1.0))
    throw std::invalid_argument("count_urban_areas: peak_factor must be > 1");
  int n = lambda.size();
  double cell = lambda.grid.radius * lambda.grid.dr();
  UrbanAreaReport report;

  int first_below = -1;
  for (int i = 0; i < n; ++i)
    if (!(lambda[i] > lambda_bar)) {
      first_below = i;
      break;
    }
  if (first_below < 0) {
    // Everything above the uniform level: one arc covering the whole circle.
    UrbanArea area{0, n - 1, 0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      area.peak = std::max(area.peak, lambda[i]);
      area.mass += lambda[i] * cell;
    }
    if (area.peak >= peak_factor * lambda_bar) report.areas.push_back(area);
    report.count = static_cast<int>(report.areas.size());
    return report;
  }

  // Walk one full revolution starting just past a below-threshold node so no
  // component is split by the seam.
  int i = first_below;
  int visited = 0;
  while (visited < n) {
    if (lambda[lambda.grid.wrap(i)] > lambda_bar) {
      UrbanArea area;
      area.start = lambda.grid.wrap(i);
      while (visited < n && lambda[lambda.grid.wrap(i)] > lambda_bar) {
        int j = lambda.grid.wrap(i);
        area.end = j;
        area.peak = std::max(area.peak, lambda[j]);
        area.mass += lambda[j] * cell;
        ++i;
        ++visited;
      }
      if (area.peak >= peak_factor * lambda_bar) report.areas.push_back(area);
    } else {
      ++i;
      ++visited;
    }
  }
  std::sort(report.areas.begin(), report.areas.end(),
            [](const UrbanArea& a, const UrbanArea& b) { return a.start < b.start; });
  report.count = static_cast<int>(report.areas.size());
  return report;
}

// |sum_j (f_j - mean) e^{-i k r_j} dr|: discrete counterpart of the Fourier
// coefficient of the deviation from the mean.
inline double mode_amplitude(const Field& f, int k) {
  int n = f.size();
  if (2 * std::abs(k) >= n)
    throw std::invalid_argument("mode_amplitude: |k| must be below n/2 (aliasing)");
  double mean = 0.0;
  for (int j = 0; j < n; ++j) mean += f[j];
  mean /= n;
  double re = 0.0, im = 0.0;
  for (int j = 0; j < n; ++j) {
    double dv = f[j] - mean;
    double th = k * f.grid.node(j);
    re += dv * std::cos(th);
    im -= dv * std::sin(th);
  }
  return std::hypot(re, im) * f.grid.dr();
}

// Least-squares slope of ln(amplitude) against t over (t, amplitude) samples.
inline double growth_rate(const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 10)
    throw std::invalid_argument("growth_rate: need at least 10 samples");
  double t_mean = 0.0, x_mean = 0.0;
  for (const auto& [t, amp] : series) {
    if (!(amp > 0.0))
      throw std::invalid_argument("growth_rate: amplitudes must be positive");
    t_mean += t;
    x_mean += std::log(amp);
  }
  t_mean /= static_cast<double>(series.size());
  x_mean /= static_cast<double>(series.size());
  double num = 0.0, den = 0.0;
  for (const auto& [t, amp] : series) {
    double dt = t - t_mean;
    num += dt * (std::log(amp) - x_mean);
    den += dt * dt;
  }
  if (!(den > 0.0)) throw std::invalid_argument("growth_rate: degenerate time samples");
  return num / den;
}

inline double max_norm(const Field& a, const Field& b) {
  require_same_grid(a, b);
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double total_mass(const Field& f) {
  double cell = f.grid.radius * f.grid.dr();
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += f[i];
  return s * cell;
}

}  // namespace racetrack
