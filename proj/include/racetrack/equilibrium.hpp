#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "kernel.hpp"
#include "params.hpp"

namespace racetrack {

// Closed-form homogeneous stationary state (the exactly uniform solution).
// G_bar_cp is the price index of the classic core-periphery variant, which
// drops the 1/F factor.
struct HomogeneousState {
  double lambda_bar = 0.0;
  double phi_bar = 0.0;
  double w_bar = 0.0;
  double G_bar = 0.0;
  double omega_bar = 0.0;
  double G_bar_cp = 0.0;
};

inline HomogeneousState homogeneous_state(const ModelParams& p) {
  validate(p);
  if (!(p.tau > 0.0))
    throw std::invalid_argument("homogeneous_state: tau must be > 0 (G_bar has alpha in a denominator)");
  double circumference = 2.0 * std::numbers::pi * p.rho;
  HomogeneousState h;
  h.lambda_bar = p.Lambda / circumference;
  h.phi_bar = p.Phi / circumference;
  h.w_bar = p.mu * (h.phi_bar + h.lambda_bar) / (p.sigma * h.lambda_bar);
  double alpha = p.alpha();
  double one_minus_e = -std::expm1(-alpha * p.rho * std::numbers::pi);  // 1 - e^{-alpha rho pi}
  double expo = 1.0 / (1.0 - p.sigma);
  h.G_bar = std::pow(2.0 * h.lambda_bar * one_minus_e / (p.F * alpha), expo);
  h.G_bar_cp = std::pow(2.0 * h.lambda_bar * one_minus_e / alpha, expo);
  h.omega_bar = h.w_bar - p.mu * std::log(h.G_bar);
  return h;
}

// Homogeneous state as realized on a grid. The kernel has a kink at the
// antipodal point, so the trapezoidal row sum carries an O(dr^2)-scale
// quadrature error (~1e-5 at n = 256); the uniform field is a fixed point of
// the *discrete* maps with this G_bar, not the closed-form one. w_bar is
// unaffected: the row sums cancel algebraically in the wage map.
inline HomogeneousState discrete_homogeneous_state(const Grid& grid, const ModelParams& p) {
  HomogeneousState h = homogeneous_state(p);
  TransportKernel kernel = build_kernel(grid, p.alpha());
  double row_sum = 0.0;
  for (double w : kernel.weights) row_sum += w;
  double expo = 1.0 / (1.0 - p.sigma);
  h.G_bar = std::pow(h.lambda_bar * row_sum / p.F, expo);
  h.G_bar_cp = std::pow(h.lambda_bar * row_sum, expo);
  h.omega_bar = h.w_bar - p.mu * std::log(h.G_bar);
  return h;
}

// G_i = [ (1/F) * (K lambda)_i ]^{1/(1-sigma)}
inline Field price_index(const Field& lambda, const TransportKernel& kernel, const ModelParams& p) {
  validate(p);
  Field conv = convolve(kernel, lambda);
  double expo = 1.0 / (1.0 - p.sigma);
  Field G(lambda.grid);
  for (int i = 0; i < G.size(); ++i) {
    if (!(conv[i] > 0.0))
      throw std::domain_error("price_index: kernel average of lambda is non-positive at node " +
                              std::to_string(i));
    G[i] = std::pow(conv[i] / p.F, expo);
  }
  return G;
}

// w_i = (mu / (sigma F)) * ( K[ (phi + lambda) G^{sigma-1} ] )_i.
// G^{sigma-1} goes through exp((sigma-1) ln G) so non-integer sigma stays in
// the real domain for any positive G.
inline Field nominal_wage(const Field& lambda, const Field& phi, const Field& G,
                          const TransportKernel& kernel, const ModelParams& p) {
  require_same_grid(lambda, phi);
  require_same_grid(lambda, G);
  if (!(kernel.grid == lambda.grid))
    throw std::invalid_argument("nominal_wage: kernel and field grids differ");
  Field spend(lambda.grid);
  for (int i = 0; i < spend.size(); ++i) {
    if (!(G[i] > 0.0)) throw std::domain_error("nominal_wage: G must be positive");
    spend[i] = (phi[i] + lambda[i]) * std::exp((p.sigma - 1.0) * std::log(G[i]));
  }
  Field w = convolve(kernel, spend);
  double c = p.mu / (p.sigma * p.F);
  for (int i = 0; i < w.size(); ++i) w[i] *= c;
  return w;
}

// omega_i = w_i - mu ln G_i
inline Field real_wage(const Field& w, const Field& G, double mu) {
  require_same_grid(w, G);
  Field omega(w.grid);
  for (int i = 0; i < omega.size(); ++i) {
    if (!(G[i] > 0.0)) throw std::domain_error("real_wage: G must be positive");
    omega[i] = w[i] - mu * std::log(G[i]);
  }
  return omega;
}

// Allocation-free evaluation of lambda -> omega for time stepping. Uses the
// identities G^{sigma-1} = F / (K lambda) and
// mu ln G = -mu/(sigma-1) * ln((K lambda)/F), so the whole map costs two
// circulant products and one log per node. Agrees with the composition
// price_index -> nominal_wage -> real_wage to round-off.
struct EquilibriumWorkspace {
  std::vector<double> doubled, conv, spend, wage, omega;
  explicit EquilibriumWorkspace(int n)
      : doubled(2 * n), conv(n), spend(n), wage(n), omega(n) {}
};

inline void real_wage_inplace(const std::vector<double>& lambda, const std::vector<double>& phi,
                              const TransportKernel& kernel, const ModelParams& p,
                              EquilibriumWorkspace& ws) {
  int n = kernel.grid.n;
  std::copy(lambda.begin(), lambda.end(), ws.doubled.begin());
  std::copy(lambda.begin(), lambda.end(), ws.doubled.begin() + n);
  detail::circulant_apply(kernel.weights, ws.doubled, ws.conv);
  for (int i = 0; i < n; ++i) {
    if (!(ws.conv[i] > 0.0))
      throw std::domain_error("equilibrium: kernel average of lambda is non-positive at node " +
                              std::to_string(i));
    ws.spend[i] = (phi[i] + lambda[i]) * (p.F / ws.conv[i]);
  }
  std::copy(ws.spend.begin(), ws.spend.end(), ws.doubled.begin());
  std::copy(ws.spend.begin(), ws.spend.end(), ws.doubled.begin() + n);
  detail::circulant_apply(kernel.weights, ws.doubled, ws.wage);
  double cw = p.mu / (p.sigma * p.F);
  double cl = p.mu / (p.sigma - 1.0);
  for (int i = 0; i < n; ++i)
    ws.omega[i] = cw * ws.wage[i] + cl * std::log(ws.conv[i] / p.F);
}

}  // namespace racetrack
