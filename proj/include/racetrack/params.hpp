#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace racetrack {

// Economic and dynamical constants. alpha = (sigma - 1) * tau is always
// derived on demand, never stored, so it cannot go stale.
struct ModelParams {
  double mu = 0.6;      // expenditure share of manufactured goods, in [0, 1)
  double sigma = 5.0;   // elasticity of substitution between varieties, > 1
  double tau = 0.25;    // transport-cost rate, >= 0
  double F = 1.0;       // fixed input per firm
  double Lambda = 1.0;  // total mobile (manufacturing) population
  double Phi = 10.0;    // total immobile (agricultural) population
  double rho = 1.0;     // circle radius
  double a = 0.5;       // advection coefficient (drift up the real-wage gradient)
  double d = 0.005;     // diffusion coefficient
  double v = 1.0;       // replicator adjustment speed

  double alpha() const { return (sigma - 1.0) * tau; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline void validate(const ModelParams& p) {
  auto bad = [](const std::string& msg) { throw std::invalid_argument("params: " + msg); };
  auto fin = [](double x) { return std::isfinite(x); };
  if (!fin(p.mu) || p.mu < 0.0 || p.mu >= 1.0) bad("mu must lie in [0, 1)");
  if (!fin(p.sigma) || !(p.sigma > 1.0)) bad("sigma must be > 1");
  if (!fin(p.tau) || p.tau < 0.0) bad("tau must be >= 0");
  if (!fin(p.F) || !(p.F > 0.0)) bad("F must be > 0");
  if (!fin(p.Lambda) || !(p.Lambda > 0.0)) bad("Lambda must be > 0");
  if (!fin(p.Phi) || !(p.Phi > 0.0)) bad("Phi must be > 0");
  if (!fin(p.rho) || !(p.rho > 0.0)) bad("rho must be > 0");
  if (!fin(p.a) || p.a < 0.0) bad("a must be >= 0");
  if (!fin(p.d) || p.d < 0.0) bad("d must be >= 0");
  if (!fin(p.v) || !(p.v > 0.0)) bad("v must be > 0");
}

}  // namespace racetrack
