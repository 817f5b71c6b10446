// Acceptance gate: one PASS/FAIL line per criterion, exit 0 only if all pass.
//
// The default invocation runs the smoke set (minutes of CPU); --full extends
// criterion 7 to the complete parameter matrix (hours of CPU) and is meant
// for occasional deep verification, not CI.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "racetrack/racetrack.hpp"
#include "racetrack/run.hpp"

using namespace racetrack;
constexpr double pi = std::numbers::pi;

namespace {

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s - %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// ---------------------------------------------------------------- spectral

void c1_free_trade_limit() {
  // tolerance 1e-6 on |Gamma(tau = 1e-8) + k^2 d / rho^2|, k = 1..8
  ModelParams p;
  p.tau = 1e-8;
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k) {
    double want = -static_cast<double>(k) * k * p.d / (p.rho * p.rho);
    for (ModelVariant v : {ModelVariant::QLLU_AD, ModelVariant::CP_AD})
      worst = std::max(worst, std::abs(mode_growth_rate(v, k, p).gamma - want));
    for (ModelVariant v : {ModelVariant::QLLU_R, ModelVariant::CP_R})
      worst = std::max(worst, std::abs(mode_growth_rate(v, k, p).gamma));
  }
  report("C1", worst <= 1e-6,
         "free-trade limit is pure diffusion (worst dev " + fmt(worst) + ", tol 1e-6)");
}

void c2_symmetry() {
  // |Gamma_k - Gamma_-k| <= 1e-12 on 100 random points, all variants; the
  // even-k trade-cost index matches its rational closed form to 1e-14 rel.
  std::mt19937_64 gen(2024);
  double worst_g = 0.0, worst_z = 0.0;
  for (int t = 0; t < 100; ++t) {
    ModelParams p;
    p.mu = 0.9 * uniform01(gen);
    p.sigma = 1.1 + 10.0 * uniform01(gen);
    p.tau = 0.01 + uniform01(gen);
    int k = 1 + static_cast<int>(uniform01(gen) * 8);
    for (ModelVariant v : {ModelVariant::QLLU_AD, ModelVariant::QLLU_R, ModelVariant::CP_AD,
                           ModelVariant::CP_R})
      worst_g = std::max(worst_g, std::abs(mode_growth_rate(v, k, p).gamma -
                                           mode_growth_rate(v, -k, p).gamma));
    int ke = 2 * (1 + static_cast<int>(uniform01(gen) * 4));
    double ar2 = p.alpha() * p.alpha() * p.rho * p.rho;
    double ref = ar2 / (static_cast<double>(ke) * ke + ar2);
    worst_z = std::max(worst_z, std::abs(trade_cost_index(ke, p.alpha(), p.rho) - ref) / ref);
  }
  report("C2", worst_g <= 1e-12 && worst_z <= 1e-14,
         "growth rates even in k (worst " + fmt(worst_g) + ", tol 1e-12); even-k index exact (worst rel " +
             fmt(worst_z) + ", tol 1e-14)");
}

void c3_quadrature() {
  // discrete kernel response vs closed form: <= 5e-3 at n=256, <= 1e-4 at n=2048
  auto worst_rel = [](int n) {
    Grid g(n, 1.0);
    double worst = 0.0;
    for (double alpha : {0.5, 1.0, 2.0}) {
      TransportKernel ker = build_kernel(g, alpha);
      for (int k = 1; k <= 8; ++k) {
        double discrete = 0.0;
        for (int m = 0; m < n; ++m) discrete += ker.weights[m] * std::cos(k * m * g.dr());
        double exact = kernel_fourier_response(k, alpha, 1.0);
        worst = std::max(worst, std::abs(discrete - exact) / std::abs(exact));
      }
    }
    return worst;
  };
  double w256 = worst_rel(256), w2048 = worst_rel(2048);
  report("C3", w256 <= 5e-3 && w2048 <= 1e-4,
         "kernel quadrature error " + fmt(w256) + " at n=256 (tol 5e-3), " + fmt(w2048) +
             " at n=2048 (tol 1e-4)");
}

void c4_root_counts() {
  ModelParams p;
  bool ok = true;
  std::string detail;
  CriticalCurve s3 = critical_curve(ModelVariant::QLLU_AD, 1, 3.0, p, 0.01, 1.0);
  CriticalCurve s12 = critical_curve(ModelVariant::QLLU_AD, 1, 12.0, p, 0.01, 1.0);
  ok = ok && s3.roots.size() == 2 && s12.roots.empty();
  detail += "qllu_ad k=1: sigma=3 has " + std::to_string(s3.roots.size()) +
            " roots (want 2), sigma=12 has " + std::to_string(s12.roots.size()) + " (want 0)";
  int bad = 0;
  for (int k = 1; k <= 6; ++k)
    for (double sigma : {3.0, 12.0})
      if (critical_curve(ModelVariant::QLLU_R, k, sigma, p, 0.01, 2.0).roots.size() != 1) ++bad;
  ok = ok && bad == 0;
  detail += "; qllu_r k=1..6 x sigma={3,12}: " + std::to_string(12 - bad) + "/12 single-rooted";
  report("C4", ok, detail);
}

void c5_cascade() {
  // sigma = 6.4, tau descending 1.0 -> 0.01 in 1e-3 steps, modes k <= 32:
  // from the first {6} phase the unstable set must collapse as
  // {6}, {}, {5}, {}, ..., {1}, {}.
  ModelParams p;
  p.sigma = 6.4;
  std::vector<std::set<int>> phases;
  for (int i = 0; i <= 990; ++i) {
    p.tau = 1.0 - 0.001 * i;
    std::set<int> s = unstable_modes(ModelVariant::QLLU_AD, p);
    if (phases.empty() || phases.back() != s) phases.push_back(s);
  }
  std::vector<std::set<int>> want = {{6}, {}, {5}, {}, {4}, {}, {3}, {}, {2}, {}, {1}, {}};
  auto first6 = std::find(phases.begin(), phases.end(), std::set<int>{6});
  bool ok = first6 != phases.end() &&
            std::vector<std::set<int>>(first6, phases.end()) == want;
  report("C5", ok,
         "instability cascade at sigma=6.4 ends with singleton phases {6}..{1} separated by "
         "stable windows (" +
             std::to_string(phases.size()) + " phases total)");
}

// ---------------------------------------------------------------- dynamics

void c6_linear_growth() {
  // cells (k, sigma, tau): measured modal growth vs dispersion relation,
  // tolerance max(5% rel, 1e-3 abs)
  Grid g(256, 1.0);
  struct Cell {
    int k;
    double sigma, tau;
  };
  bool ok = true;
  std::string detail = "measured vs predicted growth:";
  for (Cell c : {Cell{1, 5.0, 0.05}, Cell{2, 5.0, 0.15}, Cell{3, 5.0, 0.25}}) {
    ModelParams p;
    p.sigma = c.sigma;
    p.tau = c.tau;
    double gamma = mode_growth_rate(ModelVariant::QLLU_AD, c.k, p).gamma;
    TransportKernel ker = build_kernel(g, p.alpha());
    HomogeneousState hs = homogeneous_state(p);
    Field phi(g, hs.phi_bar);
    Field lam(g);
    for (int j = 0; j < g.n; ++j)
      lam[j] = hs.lambda_bar * (1.0 + 1e-6 * std::cos(c.k * g.node(j)));
    double dt = 0.01;
    std::vector<std::pair<double, double>> series;
    for (int step = 1; step <= 500; ++step) {
      Field G = price_index(lam, ker, p);
      Field w = nominal_wage(lam, phi, G, ker, p);
      Field om = real_wage(w, G, p.mu);
      lam = advection_diffusion_step(lam, om, p, dt, g.dr());
      if (step >= 50 && step % 5 == 0) series.push_back({step * dt, mode_amplitude(lam, c.k)});
    }
    double slope = growth_rate(series);
    bool cell_ok = std::abs(slope - gamma) <= std::max(0.05 * std::abs(gamma), 1e-3);
    ok = ok && cell_ok;
    detail += " k=" + std::to_string(c.k) + ": " + fmt(slope) + "/" + fmt(gamma);
  }
  report("C6", ok, detail + " (tol max(5%, 1e-3))");
}

struct CellExpectation {
  double sigma, tau;
  int want;
};

std::vector<RunOutcome> run_matrix(ModelVariant variant, const std::vector<double>& sigmas,
                                   const std::vector<double>& taus, const char* label) {
  RunConfig cfg;
  cfg.variant = variant;
  cfg.n_nodes = 256;
  cfg.sigma_values = sigmas;
  cfg.tau_values = taus;
  cfg.seeds = 5;
  cfg.dynamics.seed = 0;
  return execute_runs(cfg, plan_runs(cfg), [&](const RunOutcome& oc) {
    std::fprintf(stderr,
                 "  [%s] sigma=%g tau=%g seed=%llu: steps=%lld converged=%d residual=%.2e urban=%d\n",
                 label, oc.spec.sigma, oc.spec.tau,
                 static_cast<unsigned long long>(oc.result.seed), oc.result.steps_taken,
                 oc.result.converged ? 1 : 0, oc.result.final_residual, oc.result.urban_count);
  });
}

int max_urban(const std::vector<RunOutcome>& runs, double sigma, double tau) {
  int best = -1;
  for (const RunOutcome& oc : runs)
    if (oc.spec.sigma == sigma && oc.spec.tau == tau)
      best = std::max(best, oc.result.urban_count);
  return best;
}

void c7_c8_c10_drift(bool full, std::vector<RunOutcome>& keep) {
  // C7: stationary multi-city counts, max urban count over 5 seeds per cell.
  std::vector<CellExpectation> cells = {{5.0, 0.05, 1}, {5.0, 0.15, 2}, {5.0, 0.45, 6}};
  std::vector<double> taus = {0.05, 0.15, 0.45};
  std::vector<RunOutcome> runs = run_matrix(ModelVariant::QLLU_AD, {5.0}, taus, "C7");
  keep.insert(keep.end(), runs.begin(), runs.end());
  if (full) {
    std::vector<RunOutcome> tau_runs =
        run_matrix(ModelVariant::QLLU_AD, {5.0}, {0.25, 0.35, 0.37}, "C7-full");
    keep.insert(keep.end(), tau_runs.begin(), tau_runs.end());
    for (auto [tau, want] : {std::pair{0.25, 3}, {0.35, 4}, {0.37, 5}})
      cells.push_back({5.0, tau, want});
    std::vector<RunOutcome> sig_runs = run_matrix(
        ModelVariant::QLLU_AD, {1.3, 2.4, 3.0, 3.5, 4.0, 4.5}, {0.5}, "C7-full");
    keep.insert(keep.end(), sig_runs.begin(), sig_runs.end());
    int want = 1;
    for (double sigma : {1.3, 2.4, 3.0, 3.5, 4.0, 4.5}) cells.push_back({sigma, 0.5, want++});
    runs = keep;
  }
  bool ok = true;
  std::string detail = "max urban count over 5 seeds:";
  for (const CellExpectation& c : cells) {
    int got = max_urban(runs, c.sigma, c.tau);
    ok = ok && got == c.want;
    detail += " (" + fmt(c.sigma) + "," + fmt(c.tau) + ")=" + std::to_string(got) + "/" +
              std::to_string(c.want);
  }
  report("C7", ok, detail);
}

void c8_mass_and_fixed_point(const std::vector<RunOutcome>& drift_runs) {
  double worst = 0.0;
  bool any_blowup = false;
  for (const RunOutcome& oc : drift_runs) {
    worst = std::max(worst, oc.result.mass_drift);
    any_blowup = any_blowup || oc.result.blew_up;
  }
  // zero perturbation: the uniform state is recognized as stationary at step 1
  Grid g(256, 1.0);
  ModelParams p;
  p.sigma = 5.0;
  p.tau = 0.45;
  DynamicsConfig dc;
  dc.perturbation = 0.0;
  SimulationResult flat =
      run_to_stationary(random_initial(g, p.Lambda / (2.0 * pi), 0.0, 1), p, dc);
  report("C8", worst <= 1e-9 && !any_blowup && flat.converged && flat.steps_taken == 1,
         "mass drift <= 1e-9 across all stationary runs (worst " + fmt(worst) +
             "); zero-noise start converges at step " + std::to_string(flat.steps_taken));
}

void c9_replicator(std::vector<RunOutcome>& keep) {
  std::vector<RunOutcome> runs =
      run_matrix(ModelVariant::QLLU_R, {5.0}, {0.05, 0.15, 0.25}, "C9");
  keep.insert(keep.end(), runs.begin(), runs.end());
  bool counts_ok = max_urban(runs, 5.0, 0.05) == 1 && max_urban(runs, 5.0, 0.15) == 2 &&
                   max_urban(runs, 5.0, 0.25) == 3;
  // spikiness at tau = 0.05: every seed parks at least half the population on
  // at most three nodes
  bool spiky = true;
  double worst_share = 1.0;
  for (const RunOutcome& oc : runs) {
    if (oc.spec.tau != 0.05) continue;
    std::vector<double> sorted = oc.result.lambda_star.values;
    std::sort(sorted.rbegin(), sorted.rend());
    double cell = oc.result.lambda_star.grid.radius * oc.result.lambda_star.grid.dr();
    double share = (sorted[0] + sorted[1] + sorted[2]) * cell;  // Lambda = 1
    worst_share = std::min(worst_share, share);
    spiky = spiky && share >= 0.5;
  }
  report("C9", counts_ok && spiky,
         "replicator counts (0.05,0.15,0.25) -> (" + std::to_string(max_urban(runs, 5.0, 0.05)) +
             "," + std::to_string(max_urban(runs, 5.0, 0.15)) + "," +
             std::to_string(max_urban(runs, 5.0, 0.25)) +
             ") want (1,2,3); min 3-node mass share " + fmt(worst_share) + " (>= 0.5)");
}

void c10_threshold_robustness(const std::vector<RunOutcome>& all_runs) {
  // urban counts must not depend on the peak threshold within [1.3, 1.7]
  int checked = 0, changed = 0;
  for (const RunOutcome& oc : all_runs) {
    if (oc.result.blew_up || oc.result.lambda_star.size() == 0) continue;
    double lb = 1.0 / (2.0 * pi);  // Lambda = rho = 1 throughout the matrix
    int base = count_urban_areas(oc.result.lambda_star, lb, 1.5).count;
    ++checked;
    for (double pf : {1.3, 1.7})
      if (count_urban_areas(oc.result.lambda_star, lb, pf).count != base) {
        ++changed;
        break;
      }
  }
  report("C10", checked > 0 && changed == 0,
         "urban counts identical for peak factors {1.3, 1.5, 1.7} on " +
             std::to_string(checked) + " stationary states (" + std::to_string(changed) +
             " changed)");
}

}  // namespace

int main(int argc, char** argv) {
  bool full = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--full") == 0) full = true;
  std::printf("acceptance gate (%s set)\n", full ? "full" : "smoke");

  c1_free_trade_limit();
  c2_symmetry();
  c3_quadrature();
  c4_root_counts();
  c5_cascade();
  c6_linear_growth();

  std::vector<RunOutcome> drift_runs;
  c7_c8_c10_drift(full, drift_runs);
  c8_mass_and_fixed_point(drift_runs);
  std::vector<RunOutcome> rep_runs;
  c9_replicator(rep_runs);
  std::vector<RunOutcome> all_runs = drift_runs;
  all_runs.insert(all_runs.end(), rep_runs.begin(), rep_runs.end());
  c10_threshold_robustness(all_runs);

  std::printf("%s\n", failures == 0 ? "acceptance: ALL CRITERIA PASSED"
                                    : ("acceptance: " + std::to_string(failures) +
                                       " criterion/criteria FAILED")
                                          .c_str());
  return failures == 0 ? 0 : 1;
}
