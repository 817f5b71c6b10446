#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "racetrack/equilibrium.hpp"
#include "racetrack/rng.hpp"

#include "oracles.hpp"

using namespace racetrack;

TEST_CASE("homogeneous state matches frozen values at defaults", "[equilibrium]") {
  HomogeneousState h = homogeneous_state(ModelParams{});
  REQUIRE(std::abs(h.lambda_bar - oracle::lambda_bar) <= 1e-16);
  REQUIRE(std::abs(h.phi_bar - 10.0 * oracle::lambda_bar) <= 1e-14);
  REQUIRE(std::abs(h.w_bar - oracle::w_bar) <= 1e-15);
  REQUIRE(std::abs(h.G_bar - oracle::G_bar) / oracle::G_bar <= 1e-14);
  REQUIRE(std::abs(h.omega_bar - oracle::omega_bar) / oracle::omega_bar <= 1e-14);
  REQUIRE(h.G_bar_cp == h.G_bar);  // F = 1
}

TEST_CASE("fixed-cost factor only rescales the quasi-linear price index", "[equilibrium]") {
  ModelParams p;
  p.F = 2.0;
  HomogeneousState h = homogeneous_state(p);
  HomogeneousState h1 = homogeneous_state(ModelParams{});
  REQUIRE(std::abs(h.G_bar_cp - h1.G_bar_cp) <= 1e-15);
  REQUIRE(std::abs(h.G_bar - h1.G_bar * std::pow(2.0, 1.0 / (p.sigma - 1.0))) <= 1e-14);
  REQUIRE(h.w_bar == h1.w_bar);  // F cancels from the wage
}

TEST_CASE("homogeneous state rejects tau = 0 and invalid params", "[equilibrium]") {
  ModelParams p;
  p.tau = 0.0;
  REQUIRE_THROWS_AS(homogeneous_state(p), std::invalid_argument);
  p.tau = 0.25;
  p.mu = 1.0;
  REQUIRE_THROWS_AS(homogeneous_state(p), std::invalid_argument);
  p.mu = 0.6;
  p.sigma = 1.0;
  REQUIRE_THROWS_AS(homogeneous_state(p), std::invalid_argument);
}

// The kernel row sum carries the trapezoidal kink error, so the discrete
// G_bar must sit near, but measurably off, the closed form -- and the gap
// must shrink at second order with resolution.
TEST_CASE("discrete homogeneous state tracks the closed form", "[equilibrium]") {
  ModelParams p;
  HomogeneousState exact = homogeneous_state(p);
  HomogeneousState d256 = discrete_homogeneous_state(Grid(256, 1.0), p);
  HomogeneousState d2048 = discrete_homogeneous_state(Grid(2048, 1.0), p);
  double e256 = std::abs(d256.G_bar - exact.G_bar) / exact.G_bar;
  double e2048 = std::abs(d2048.G_bar - exact.G_bar) / exact.G_bar;
  REQUIRE(e256 <= 2e-5);
  REQUIRE(e256 >= 1e-7);
  REQUIRE(e2048 <= 5e-7);
  REQUIRE(e2048 < e256);
  REQUIRE(d256.w_bar == exact.w_bar);  // row sums cancel in the wage map
  REQUIRE(d256.lambda_bar == exact.lambda_bar);
}

TEST_CASE("uniform field is a fixed point of the discrete maps", "[equilibrium]") {
  Grid g(256, 1.0);
  ModelParams p;
  HomogeneousState hs = discrete_homogeneous_state(g, p);
  TransportKernel ker = build_kernel(g, p.alpha());
  Field lam(g, hs.lambda_bar), phi(g, hs.phi_bar);
  Field G = price_index(lam, ker, p);
  Field w = nominal_wage(lam, phi, G, ker, p);
  Field om = real_wage(w, G, p.mu);
  for (int i = 0; i < g.n; ++i) {
    REQUIRE(std::abs(G[i] - hs.G_bar) / hs.G_bar <= 1e-12);
    REQUIRE(std::abs(w[i] - hs.w_bar) / hs.w_bar <= 1e-12);
    REQUIRE(std::abs(om[i] - hs.omega_bar) / std::abs(hs.omega_bar) <= 1e-12);
  }
}

TEST_CASE("real wage is the stated combination of wage and price index", "[equilibrium]") {
  Grid g(64, 1.0);
  std::mt19937_64 gen(9);
  Field w(g), G(g);
  for (int i = 0; i < g.n; ++i) {
    w[i] = 0.5 + uniform01(gen);
    G[i] = 0.5 + uniform01(gen);
  }
  Field om = real_wage(w, G, 0.6);
  for (int i = 0; i < g.n; ++i)
    REQUIRE(om[i] == w[i] - 0.6 * std::log(G[i]));
}

TEST_CASE("more varieties lower the price index everywhere", "[equilibrium]") {
  Grid g(128, 1.0);
  ModelParams p;
  TransportKernel ker = build_kernel(g, p.alpha());
  std::mt19937_64 gen(11);
  Field lam(g);
  for (int i = 0; i < g.n; ++i) lam[i] = 0.1 + uniform01(gen);
  Field scaled(g);
  for (int i = 0; i < g.n; ++i) scaled[i] = 1.2 * lam[i];
  Field G1 = price_index(lam, ker, p);
  Field G2 = price_index(scaled, ker, p);
  for (int i = 0; i < g.n; ++i) REQUIRE(G2[i] < G1[i]);
}

TEST_CASE("equilibrium maps reject non-positive inputs with a node index", "[equilibrium]") {
  Grid g(16, 1.0);
  ModelParams p;
  TransportKernel ker = build_kernel(g, p.alpha());
  Field bad(g, -1.0);
  REQUIRE_THROWS_AS(price_index(bad, ker, p), std::domain_error);
  REQUIRE_THROWS_WITH(price_index(bad, ker, p),
                      Catch::Matchers::ContainsSubstring("node 0"));
  Field lam(g, 1.0), phi(g, 1.0), G(g, 0.0);
  REQUIRE_THROWS_AS(nominal_wage(lam, phi, G, ker, p), std::domain_error);
  REQUIRE_THROWS_AS(real_wage(lam, G, 0.6), std::domain_error);
}

TEST_CASE("fused evaluation agrees with the composed maps", "[equilibrium]") {
  Grid g(256, 1.0);
  ModelParams p;
  p.sigma = 5.0;
  p.tau = 0.45;
  TransportKernel ker = build_kernel(g, p.alpha());
  HomogeneousState hs = homogeneous_state(p);
  std::mt19937_64 gen(13);
  Field lam(g), phi(g, hs.phi_bar);
  for (int i = 0; i < g.n; ++i)
    lam[i] = hs.lambda_bar * (1.0 + 0.1 * (2.0 * uniform01(gen) - 1.0));

  Field G = price_index(lam, ker, p);
  Field w = nominal_wage(lam, phi, G, ker, p);
  Field om_ref = real_wage(w, G, p.mu);

  EquilibriumWorkspace ws(g.n);
  real_wage_inplace(lam.values, phi.values, ker, p, ws);
  for (int i = 0; i < g.n; ++i) REQUIRE(std::abs(ws.omega[i] - om_ref[i]) <= 1e-12);
}

TEST_CASE("fused evaluation reports blow-ups like the composed maps", "[equilibrium]") {
  Grid g(16, 1.0);
  ModelParams p;
  TransportKernel ker = build_kernel(g, p.alpha());
  EquilibriumWorkspace ws(g.n);
  std::vector<double> lam(g.n, -1.0), phi(g.n, 1.0);
  REQUIRE_THROWS_AS(real_wage_inplace(lam, phi, ker, p, ws), std::domain_error);
}
