#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "params.hpp"

namespace racetrack {

// The four linearized models: quasi-linear log utility vs. classic
// core-periphery market structure, each with advection-diffusion (AD) or
// replicator (R) population dynamics.
enum class ModelVariant { QLLU_AD, QLLU_R, CP_AD, CP_R };

inline std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::QLLU_AD: return "qllu_ad";
    case ModelVariant::QLLU_R: return "qllu_r";
    case ModelVariant::CP_AD: return "cp_ad";
    case ModelVariant::CP_R: return "cp_r";
  }
  throw std::logic_error("to_string: bad ModelVariant");
}

inline ModelVariant variant_from_string(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "qllu_ad") return ModelVariant::QLLU_AD;
  if (s == "qllu_r") return ModelVariant::QLLU_R;
  if (s == "cp_ad") return ModelVariant::CP_AD;
  if (s == "cp_r") return ModelVariant::CP_R;
  throw std::invalid_argument("unknown variant '" + s + "' (expected qllu_ad, qllu_r, cp_ad, cp_r)");
}

// Z_k: the per-frequency trade-cost index, the only channel through which
// alpha*rho enters the linearized system. Rises monotonically from 0
// (free trade) to 1 (prohibitive costs). For even k the oscillatory factor
// cancels exactly, leaving a pure rational form.
inline double trade_cost_index(int k, double alpha, double rho) {
  if (k == 0) throw std::invalid_argument("trade_cost_index: k must be nonzero");
  if (!std::isfinite(alpha) || alpha < 0.0 || !(rho > 0.0))
    throw std::invalid_argument("trade_cost_index: need alpha >= 0 and rho > 0");
  double ar = alpha * rho;
  if (ar == 0.0) return 0.0;
  double ar2 = ar * ar;
  if (!std::isfinite(ar2)) return 1.0;
  double k2 = static_cast<double>(k) * k;
  if (k % 2 == 0) return ar2 / (k2 + ar2);
  double em = std::expm1(-ar * std::numbers::pi);  // e^{-ar pi} - 1
  return ar2 * (2.0 + em) / ((k2 + ar2) * (-em));
}

// Growth rate of the k-th Fourier mode around the homogeneous state.
struct SpectralPoint {
  ModelVariant variant = ModelVariant::QLLU_AD;
  int k = 0;
  double z = 0.0;
  double gamma = 0.0;
  bool pole = false;  // CP bracket denominator within 1e-12 of zero
};

namespace detail {

// Shared bracket of the CP variants:
//   (1 - mu Z)(mu Z - Z^2) / (sigma q(Z)) + mu Z / (sigma - 1),
//   q(Z) = 1 - mu Z / sigma - (sigma - 1) Z^2 / sigma.
// q is positive on Z in [0, 1) whenever mu is in [0, 1) -- q(0) = 1,
// q(1) = (1 - mu)/sigma, q concave -- so the pole cannot fire for admissible
// parameters; it is still detected and reported rather than skipped.
inline double cp_bracket(double z, double mu, double sigma, bool& pole) {
  double q = 1.0 - mu * z / sigma - (sigma - 1.0) * z * z / sigma;
  if (std::abs(q) <= 1e-12) {
    pole = true;
    return std::numeric_limits<double>::quiet_NaN();
  }
  return (1.0 - mu * z) * (mu * z - z * z) / (sigma * q) + mu * z / (sigma - 1.0);
}

}  // namespace detail

// Gamma as an explicit function of the index Z; exposed separately so the
// shape of the dispersion relation (concavity, intercepts) can be probed
// without going through tau.
inline double growth_rate_from_index(ModelVariant variant, int k, double z, const ModelParams& p,
                                     bool* pole_out = nullptr) {
  double k2_rho2 = static_cast<double>(k) * k / (p.rho * p.rho);
  double ratio = (p.Phi + p.Lambda) / p.Lambda;  // (phi_bar + lambda_bar) / lambda_bar
  bool pole = false;
  double g = 0.0;
  switch (variant) {
    case ModelVariant::QLLU_AD: {
      double c = (2.0 * p.sigma - 1.0) / (p.sigma * (p.sigma - 1.0));
      g = k2_rho2 * (p.a * p.mu * z * (-(ratio / p.sigma) * z + c) - p.d);
      break;
    }
    case ModelVariant::QLLU_R: {
      double c = (2.0 * p.sigma - 1.0) / (p.sigma - 1.0);
      g = p.v * (p.mu / p.sigma) * (-ratio * z * z + c * z);
      break;
    }
    case ModelVariant::CP_R: {
      double b = detail::cp_bracket(z, p.mu, p.sigma, pole);
      g = p.v * std::pow(homogeneous_state(p).G_bar_cp, -p.mu) * b;
      break;
    }
    case ModelVariant::CP_AD: {
      double b = detail::cp_bracket(z, p.mu, p.sigma, pole);
      g = k2_rho2 * (p.a * std::pow(homogeneous_state(p).G_bar_cp, -p.mu) * b - p.d);
      break;
    }
  }
  if (pole_out) *pole_out = pole;
  return g;
}

inline SpectralPoint mode_growth_rate(ModelVariant variant, int k, const ModelParams& p) {
  validate(p);
  if (k == 0) throw std::invalid_argument("mode_growth_rate: k must be nonzero");
  SpectralPoint pt;
  pt.variant = variant;
  pt.k = k;
  pt.z = trade_cost_index(k, p.alpha(), p.rho);
  pt.gamma = growth_rate_from_index(variant, k, pt.z, p, &pt.pole);
  return pt;
}

struct PoleEvent {
  double tau = 0.0;
};

// tau values at which Gamma_k crosses zero, for fixed (variant, k, sigma).
struct CriticalCurve {
  ModelVariant variant = ModelVariant::QLLU_AD;
  int k = 0;
  double sigma = 0.0;
  std::vector<double> roots;      // strictly increasing
  std::vector<PoleEvent> poles;   // CP-bracket blow-ups hit during the scan
};

// Dense scan (the roots cluster tightly near the cascade regime) followed by
// bisection to 1e-8 in tau.
inline CriticalCurve critical_curve(ModelVariant variant, int k, double sigma, ModelParams p,
                                    double tau_lo, double tau_hi) {
  if (!(tau_lo > 0.0) || !(tau_hi > tau_lo))
    throw std::invalid_argument("critical_curve: need 0 < tau_lo < tau_hi");
  if (!(sigma > 1.01)) throw std::invalid_argument("critical_curve: sigma must be > 1.01");
  p.sigma = sigma;
  CriticalCurve out;
  out.variant = variant;
  out.k = k;
  out.sigma = sigma;

  auto eval = [&](double tau, bool& pole) {
    p.tau = tau;
    SpectralPoint pt = mode_growth_rate(variant, k, p);
    pole = pt.pole;
    return pt.gamma;
  };

  const int n_scan = 2000;
  const double root_tol = 1e-8;
  bool pole = false;
  double prev_tau = tau_lo;
  double prev_g = eval(tau_lo, pole);
  if (pole) out.poles.push_back({tau_lo});
  for (int i = 1; i < n_scan; ++i) {
    double tau = tau_lo + (tau_hi - tau_lo) * i / (n_scan - 1);
    double g = eval(tau, pole);
    if (pole) {
      out.poles.push_back({tau});
      prev_tau = tau;
      prev_g = g;
      continue;
    }
    if (prev_g == 0.0) {
      out.roots.push_back(prev_tau);
    } else if (g != 0.0 && std::isfinite(prev_g) &&
               std::signbit(g) != std::signbit(prev_g)) {
      double lo = prev_tau, hi = tau, g_lo = prev_g;
      while (hi - lo > root_tol) {
        double mid = 0.5 * (lo + hi);
        double g_mid = eval(mid, pole);
        if (pole) {
          out.poles.push_back({mid});
          break;
        }
        if (g_mid == 0.0) {
          lo = hi = mid;
          break;
        }
        if (std::signbit(g_mid) == std::signbit(g_lo)) {
          lo = mid;
          g_lo = g_mid;
        } else {
          hi = mid;
        }
      }
      out.roots.push_back(0.5 * (lo + hi));
    }
    prev_tau = tau;
    prev_g = g;
  }
  if (prev_g == 0.0) out.roots.push_back(prev_tau);
  return out;
}

// gamma[i][j] = spectral point at (sigma_grid[i], tau_grid[j]).
inline std::vector<std::vector<SpectralPoint>> heatmap(ModelVariant variant, int k,
                                                       const std::vector<double>& tau_grid,
                                                       const std::vector<double>& sigma_grid,
                                                       ModelParams p) {
  auto check_increasing = [](const std::vector<double>& g, const char* name) {
    if (g.empty()) throw std::invalid_argument(std::string("heatmap: empty ") + name + " grid");
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i] > g[i - 1]))
        throw std::invalid_argument(std::string("heatmap: ") + name + " grid must be strictly increasing");
  };
  check_increasing(tau_grid, "tau");
  check_increasing(sigma_grid, "sigma");
  std::vector<std::vector<SpectralPoint>> rows;
  rows.reserve(sigma_grid.size());
  for (double sigma : sigma_grid) {
    std::vector<SpectralPoint> row;
    row.reserve(tau_grid.size());
    for (double tau : tau_grid) {
      p.sigma = sigma;
      p.tau = tau;
      row.push_back(mode_growth_rate(variant, k, p));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// { k in [1, k_max] : Gamma_k > 0 }
inline std::set<int> unstable_modes(ModelVariant variant, const ModelParams& p, int k_max = 32) {
  if (k_max < 1) throw std::invalid_argument("unstable_modes: k_max must be >= 1");
  std::set<int> out;
  for (int k = 1; k <= k_max; ++k)
    if (mode_growth_rate(variant, k, p).gamma > 0.0) out.insert(k);
  return out;
}

}  // namespace racetrack
