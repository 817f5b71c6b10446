#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "equilibrium.hpp"
#include "field.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "params.hpp"
#include "postproc.hpp"
#include "rng.hpp"

namespace racetrack {

enum class DynamicsKind { ADVECTION_DIFFUSION, REPLICATOR };

inline std::string to_string(DynamicsKind k) {
  return k == DynamicsKind::ADVECTION_DIFFUSION ? "advection_diffusion" : "replicator";
}

inline DynamicsKind dynamics_kind_from_string(const std::string& s) {
  if (s == "advection_diffusion") return DynamicsKind::ADVECTION_DIFFUSION;
  if (s == "replicator") return DynamicsKind::REPLICATOR;
  throw std::invalid_argument("unknown dynamics kind '" + s +
                              "' (expected advection_diffusion or replicator)");
}

struct DynamicsConfig {
  double dt = 0.01;
  long long max_steps = 50'000'000;
  double tol = 1e-11;  // stationarity: max-norm of one update below this
  DynamicsKind kind = DynamicsKind::ADVECTION_DIFFUSION;
  double perturbation = 1e-3;  // initial noise amplitude, as a fraction of lambda_bar
  std::uint64_t seed = 0;
  double peak_factor = 1.5;  // forwarded to the urban-area count on the result

  friend bool operator==(const DynamicsConfig&, const DynamicsConfig&) = default;
};

inline void validate(const DynamicsConfig& c, const ModelParams& p, const Grid& grid) {
  validate(p);
  if (!std::isfinite(c.dt) || !(c.dt > 0.0))
    throw std::invalid_argument("dynamics: dt must be > 0");
  if (c.max_steps < 1) throw std::invalid_argument("dynamics: max_steps must be >= 1");
  if (!(c.tol > 0.0)) throw std::invalid_argument("dynamics: tol must be > 0");
  if (!(c.perturbation >= 0.0 && c.perturbation <= 0.1))
    throw std::invalid_argument("dynamics: perturbation must lie in [0, 0.1]");
  if (!(c.peak_factor > 1.0))
    throw std::invalid_argument("dynamics: peak_factor must be > 1");
  if (c.kind == DynamicsKind::ADVECTION_DIFFUSION) {
    double dx = p.rho * grid.dr();
    double bound = 0.5 * dx * dx / c.dt;
    if (p.d > bound)
      throw std::invalid_argument(
          "dynamics: d = " + std::to_string(p.d) +
          " violates the explicit diffusion stability bound 0.5*(rho*dr)^2/dt = " +
          std::to_string(bound));
  }
}

// lambda_bar plus i.i.d. uniform noise on [-eps*lambda_bar, eps*lambda_bar],
// de-meaned so the perturbation carries exactly zero mass.
inline Field random_initial(const Grid& grid, double lambda_bar, double eps, std::uint64_t seed) {
  if (!(lambda_bar > 0.0))
    throw std::invalid_argument("random_initial: lambda_bar must be > 0");
  if (!(eps >= 0.0 && eps <= 0.1))
    throw std::invalid_argument("random_initial: eps must lie in [0, 0.1]");
  Field f(grid);
  std::mt19937_64 gen(seed);
  double amp = eps * lambda_bar;
  double sum = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    f[i] = amp * (2.0 * uniform01(gen) - 1.0);
    sum += f[i];
  }
  double mean = sum / grid.n;
  for (int i = 0; i < grid.n; ++i) f[i] = lambda_bar + (f[i] - mean);
  return f;
}

// flux[j] approximates the advective flux through the half node j-1/2
// (between nodes j-1 and j): density taken from the upwind side times the
// real-wage gradient. A zero gradient gives zero flux, the common limit of
// both one-sided choices.
inline std::vector<double> upwind_fluxes(const Field& lambda, const Field& omega, double dr) {
  require_same_grid(lambda, omega);
  int n = lambda.size();
  std::vector<double> flux(n);
  for (int j = 0; j < n; ++j) {
    int jm = j == 0 ? n - 1 : j - 1;
    double grad = (omega[j] - omega[jm]) / dr;
    if (grad > 0.0)
      flux[j] = lambda[jm] * grad;
    else if (grad < 0.0)
      flux[j] = lambda[j] * grad;
    else
      flux[j] = 0.0;
  }
  return flux;
}

// One explicit finite-volume step:
//   lambda_j' = lambda_j - (a/rho^2)(dt/dr)(f_{j+1/2} - f_{j-1/2})
//                        + (d/rho^2)(dt/dr^2)(lambda_{j+1} - 2 lambda_j + lambda_{j-1}).
// The flux form telescopes over the ring, so total mass is conserved exactly
// in exact arithmetic.
inline Field advection_diffusion_step(const Field& lambda, const Field& omega,
                                      const ModelParams& p, double dt, double dr) {
  std::vector<double> flux = upwind_fluxes(lambda, omega, dr);
  int n = lambda.size();
  double ca = (p.a / (p.rho * p.rho)) * (dt / dr);
  double cd = (p.d / (p.rho * p.rho)) * (dt / (dr * dr));
  Field out(lambda.grid);
  for (int j = 0; j < n; ++j) {
    int jp = j + 1 == n ? 0 : j + 1;
    int jm = j == 0 ? n - 1 : j - 1;
    out[j] = lambda[j] - ca * (flux[jp] - flux[j]) +
             cd * (lambda[jp] - 2.0 * lambda[j] + lambda[jm]);
    if (!std::isfinite(out[j]))
      throw std::domain_error("advection_diffusion_step: non-finite update at node " +
                              std::to_string(j) + " (blow-up)");
  }
  return out;
}

// One explicit replicator step: growth proportional to the real-wage
// deviation from the population-weighted average, then clamp at zero and
// rescale so the total mass is exactly Lambda.
inline Field replicator_step(const Field& lambda, const Field& omega, const ModelParams& p,
                             double dt) {
  require_same_grid(lambda, omega);
  int n = lambda.size();
  double cell = lambda.grid.radius * lambda.grid.dr();
  double omega_avg = 0.0;
  for (int j = 0; j < n; ++j) omega_avg += omega[j] * lambda[j];
  omega_avg *= cell / p.Lambda;
  Field out(lambda.grid);
  double mass = 0.0;
  for (int j = 0; j < n; ++j) {
    out[j] = lambda[j] * (1.0 + dt * p.v * (omega[j] - omega_avg));
    if (out[j] < 0.0) out[j] = 0.0;
    mass += out[j];
  }
  mass *= cell;
  if (!std::isfinite(mass) || !(mass > 0.0))
    throw std::domain_error("replicator_step: total mass degenerated (blow-up)");
  double scale = p.Lambda / mass;
  for (int j = 0; j < n; ++j) out[j] *= scale;
  return out;
}

struct SimulationResult {
  Field lambda_star;
  Field omega_star;
  long long steps_taken = 0;
  bool converged = false;
  double final_residual = std::numeric_limits<double>::infinity();
  int urban_count = 0;
  std::uint64_t seed = 0;
  double mass_drift = 0.0;  // |total mass - Lambda| / Lambda at the end
  bool blew_up = false;
  std::string diagnostic;
};

using ProgressFn = std::function<void(long long step, double residual)>;

// Evaluate equilibrium -> step -> residual until the max-norm of one update
// drops below tol, max_steps is hit, or the state blows up. The loop inlines
// the equilibrium evaluation and the stencils into preallocated buffers; the
// standalone step operations above define the semantics and the two paths
// agree to round-off (covered by tests).
inline SimulationResult run_to_stationary(const Field& lambda0, const ModelParams& p,
                                          const DynamicsConfig& cfg,
                                          const ProgressFn& progress = {},
                                          long long progress_every = 1'000'000) {
  const Grid grid = lambda0.grid;
  validate(cfg, p, grid);
  const int n = grid.n;
  const double dr = grid.dr();
  const double lambda_bar = p.Lambda / (2.0 * std::numbers::pi * p.rho);
  const double phi_bar = p.Phi / (2.0 * std::numbers::pi * p.rho);

  TransportKernel kernel = build_kernel(grid, p.alpha());
  EquilibriumWorkspace ws(n);
  std::vector<double> phi(n, phi_bar);
  std::vector<double> lam = lambda0.values;
  std::vector<double> lam_next(n);
  std::vector<double> flux(n);

  const double ca = (p.a / (p.rho * p.rho)) * (cfg.dt / dr);
  const double cd = (p.d / (p.rho * p.rho)) * (cfg.dt / (dr * dr));
  const double inv_dr = 1.0 / dr;
  const double cell = p.rho * dr;
  const bool advective = cfg.kind == DynamicsKind::ADVECTION_DIFFUSION;

  SimulationResult res;
  res.seed = cfg.seed;
  double residual = std::numeric_limits<double>::infinity();
  double worst_negative = 0.0;
  long long step = 0;
  try {
    while (step < cfg.max_steps) {
      ++step;
      real_wage_inplace(lam, phi, kernel, p, ws);
      const std::vector<double>& om = ws.omega;

      if (advective) {
        for (int j = 0; j < n; ++j) {
          int jm = j == 0 ? n - 1 : j - 1;
          double grad = (om[j] - om[jm]) * inv_dr;
          flux[j] = grad > 0.0 ? lam[jm] * grad : (grad < 0.0 ? lam[j] * grad : 0.0);
        }
        for (int j = 0; j < n; ++j) {
          int jp = j + 1 == n ? 0 : j + 1;
          int jm = j == 0 ? n - 1 : j - 1;
          lam_next[j] = lam[j] - ca * (flux[jp] - flux[j]) +
                        cd * (lam[jp] - 2.0 * lam[j] + lam[jm]);
        }
      } else {
        double omega_avg = 0.0;
        for (int j = 0; j < n; ++j) omega_avg += om[j] * lam[j];
        omega_avg *= cell / p.Lambda;
        double mass = 0.0;
        for (int j = 0; j < n; ++j) {
          double x = lam[j] * (1.0 + cfg.dt * p.v * (om[j] - omega_avg));
          lam_next[j] = x < 0.0 ? 0.0 : x;
          mass += lam_next[j];
        }
        mass *= cell;
        if (!std::isfinite(mass) || !(mass > 0.0))
          throw std::domain_error("replicator update: total mass degenerated (blow-up)");
        double scale = p.Lambda / mass;
        for (int j = 0; j < n; ++j) lam_next[j] *= scale;
      }

      residual = 0.0;
      for (int j = 0; j < n; ++j) {
        double dj = std::abs(lam_next[j] - lam[j]);
        if (dj > residual) residual = dj;
        if (lam_next[j] < worst_negative) worst_negative = lam_next[j];
      }
      lam.swap(lam_next);
      if (!std::isfinite(residual))
        throw std::domain_error("update produced non-finite values (blow-up)");
      if (progress && progress_every > 0 && step % progress_every == 0) progress(step, residual);
      if (residual < cfg.tol) {
        res.converged = true;
        break;
      }
    }
  } catch (const std::domain_error& e) {
    res.blew_up = true;
    res.diagnostic = e.what();
  }

  res.steps_taken = step;
  res.final_residual = residual;
  if (worst_negative < -1e-12)
    res.diagnostic += std::string(res.diagnostic.empty() ? "" : "; ") +
                      "density dipped to " + std::to_string(worst_negative) + " mid-run";

  // Round-off can leave harmless -1e-14-scale values; clamp those on output.
  for (double& x : lam)
    if (x < 0.0 && x >= -1e-14) x = 0.0;
  res.lambda_star = Field(grid, std::move(lam));

  if (!res.blew_up) {
    real_wage_inplace(res.lambda_star.values, phi, kernel, p, ws);
    res.omega_star = Field(grid, ws.omega);
    res.urban_count = count_urban_areas(res.lambda_star, lambda_bar, cfg.peak_factor).count;
  } else {
    res.omega_star = Field{};  // wages are not computable from a degenerate state
  }
  res.mass_drift = std::abs(total_mass(res.lambda_star) - p.Lambda) / p.Lambda;
  return res;
}

}  // namespace racetrack
