#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <initializer_list>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dynamics.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace racetrack {

// Everything a command-line invocation needs: model constants, integrator
// settings, grid size, the model variant, sweep axes, and seeding.
struct RunConfig {
  ModelParams params;
  DynamicsConfig dynamics;
  int n_nodes = 256;
  ModelVariant variant = ModelVariant::QLLU_AD;
  std::string out_dir = "out";
  std::vector<int> modes = {1};          // k values for spectral commands
  std::vector<double> tau_values;        // spectral / sweep axis; empty -> params.tau
  std::vector<double> sigma_values;      // spectral / sweep axis; empty -> params.sigma
  double tau_min = 0.01;                 // critical-curve search range
  double tau_max = 1.0;
  int seeds = 1;                         // seeded runs per (sigma, tau) cell
  std::vector<std::uint64_t> seed_list;  // explicit engine seeds; overrides `seeds`
  int workers = 1;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("config: unknown key '" + scope + it.key() + "'");
  }
}

}  // namespace detail

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["params"] = {{"mu", c.params.mu},     {"sigma", c.params.sigma}, {"tau", c.params.tau},
                 {"F", c.params.F},       {"Lambda", c.params.Lambda}, {"Phi", c.params.Phi},
                 {"rho", c.params.rho},   {"a", c.params.a},         {"d", c.params.d},
                 {"v", c.params.v}};
  j["grid"] = {{"n_nodes", c.n_nodes}};
  j["dynamics"] = {{"dt", c.dynamics.dt},
                   {"max_steps", c.dynamics.max_steps},
                   {"tol", c.dynamics.tol},
                   {"kind", to_string(c.dynamics.kind)},
                   {"perturbation", c.dynamics.perturbation},
                   {"seed", c.dynamics.seed},
                   {"peak_factor", c.dynamics.peak_factor}};
  j["variant"] = to_string(c.variant);
  j["out_dir"] = c.out_dir;
  j["modes"] = c.modes;
  j["tau_values"] = c.tau_values;
  j["sigma_values"] = c.sigma_values;
  j["tau_range"] = {c.tau_min, c.tau_max};
  j["seeds"] = c.seeds;
  j["seed_list"] = c.seed_list;
  j["workers"] = c.workers;
  return j;
}

// Strict parse: unknown keys are rejected so typos fail loudly instead of
// silently running defaults. All keys are optional.
inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
  detail::check_keys(j,
                     {"params", "grid", "dynamics", "variant", "out_dir", "modes", "tau_values",
                      "sigma_values", "tau_range", "seeds", "seed_list", "workers"},
                     "");
  RunConfig c;
  try {
    if (j.contains("params")) {
      const auto& p = j.at("params");
      detail::check_keys(p, {"mu", "sigma", "tau", "F", "Lambda", "Phi", "rho", "a", "d", "v"},
                         "params.");
      if (p.contains("mu")) c.params.mu = p.at("mu").get<double>();
      if (p.contains("sigma")) c.params.sigma = p.at("sigma").get<double>();
      if (p.contains("tau")) c.params.tau = p.at("tau").get<double>();
      if (p.contains("F")) c.params.F = p.at("F").get<double>();
      if (p.contains("Lambda")) c.params.Lambda = p.at("Lambda").get<double>();
      if (p.contains("Phi")) c.params.Phi = p.at("Phi").get<double>();
      if (p.contains("rho")) c.params.rho = p.at("rho").get<double>();
      if (p.contains("a")) c.params.a = p.at("a").get<double>();
      if (p.contains("d")) c.params.d = p.at("d").get<double>();
      if (p.contains("v")) c.params.v = p.at("v").get<double>();
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      detail::check_keys(g, {"n_nodes"}, "grid.");
      if (g.contains("n_nodes")) c.n_nodes = g.at("n_nodes").get<int>();
    }
    if (j.contains("dynamics")) {
      const auto& d = j.at("dynamics");
      detail::check_keys(d, {"dt", "max_steps", "tol", "kind", "perturbation", "seed", "peak_factor"},
                         "dynamics.");
      if (d.contains("dt")) c.dynamics.dt = d.at("dt").get<double>();
      if (d.contains("max_steps")) c.dynamics.max_steps = d.at("max_steps").get<long long>();
      if (d.contains("tol")) c.dynamics.tol = d.at("tol").get<double>();
      if (d.contains("kind")) c.dynamics.kind = dynamics_kind_from_string(d.at("kind").get<std::string>());
      if (d.contains("perturbation")) c.dynamics.perturbation = d.at("perturbation").get<double>();
      if (d.contains("seed")) c.dynamics.seed = d.at("seed").get<std::uint64_t>();
      if (d.contains("peak_factor")) c.dynamics.peak_factor = d.at("peak_factor").get<double>();
    }
    if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("modes")) c.modes = j.at("modes").get<std::vector<int>>();
    if (j.contains("tau_values")) c.tau_values = j.at("tau_values").get<std::vector<double>>();
    if (j.contains("sigma_values")) c.sigma_values = j.at("sigma_values").get<std::vector<double>>();
    if (j.contains("tau_range")) {
      auto r = j.at("tau_range").get<std::vector<double>>();
      if (r.size() != 2) throw std::invalid_argument("config: tau_range must be [lo, hi]");
      c.tau_min = r[0];
      c.tau_max = r[1];
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<int>();
    if (j.contains("seed_list")) c.seed_list = j.at("seed_list").get<std::vector<std::uint64_t>>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

// Apply a `key.path=value` override onto the JSON document. The value is
// parsed as JSON when possible (numbers, booleans, arrays) and treated as a
// string otherwise.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("--set expects key.path=value, got '" + assignment + "'");
  std::string key = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  std::string pointer = "/";
  for (char ch : key) pointer += (ch == '.') ? '/' : ch;
  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  doc[nlohmann::json::json_pointer(pointer)] = parsed;
}

// One entry of the run matrix: a (sigma, tau) cell plus its own engine seed.
// Runs are indexed deterministically (sigma outer, tau middle, seed inner);
// with a base seed, run i draws from the stream derive_seed(base, i), and an
// explicit seed_list is used verbatim so a recorded run can be replayed.
struct RunSpec {
  int index = 0;
  double sigma = 0.0;
  double tau = 0.0;
  std::uint64_t engine_seed = 0;
};

inline std::vector<RunSpec> plan_runs(const RunConfig& cfg) {
  std::vector<double> sigmas =
      cfg.sigma_values.empty() ? std::vector<double>{cfg.params.sigma} : cfg.sigma_values;
  std::vector<double> taus =
      cfg.tau_values.empty() ? std::vector<double>{cfg.params.tau} : cfg.tau_values;
  int n_seeds = cfg.seed_list.empty() ? cfg.seeds : static_cast<int>(cfg.seed_list.size());
  if (n_seeds < 1) throw std::invalid_argument("config: seeds must be >= 1");
  std::vector<RunSpec> specs;
  specs.reserve(sigmas.size() * taus.size() * n_seeds);
  int index = 0;
  for (double sigma : sigmas)
    for (double tau : taus)
      for (int s = 0; s < n_seeds; ++s) {
        std::uint64_t seed = cfg.seed_list.empty() ? derive_seed(cfg.dynamics.seed, index)
                                                   : cfg.seed_list[s];
        specs.push_back({index, sigma, tau, seed});
        ++index;
      }
  return specs;
}

// Time simulation exists for the QLLU variants only; the CP market
// equilibrium is an implicit fixed point this artifact deliberately avoids.
inline DynamicsKind dynamics_kind_for(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::QLLU_AD: return DynamicsKind::ADVECTION_DIFFUSION;
    case ModelVariant::QLLU_R: return DynamicsKind::REPLICATOR;
    default:
      throw std::invalid_argument("variant " + to_string(variant) +
                                  " has no time simulation (qllu_ad / qllu_r only)");
  }
}

inline SimulationResult execute_run(const RunConfig& cfg, const RunSpec& spec,
                                    const ProgressFn& progress = {},
                                    long long progress_every = 1'000'000) {
  ModelParams p = cfg.params;
  p.sigma = spec.sigma;
  p.tau = spec.tau;
  DynamicsConfig dc = cfg.dynamics;
  dc.seed = spec.engine_seed;
  dc.kind = dynamics_kind_for(cfg.variant);
  Grid grid(cfg.n_nodes, p.rho);
  double lambda_bar = p.Lambda / (2.0 * std::numbers::pi * p.rho);
  Field lam0 = random_initial(grid, lambda_bar, dc.perturbation, dc.seed);
  return run_to_stationary(lam0, p, dc, progress, progress_every);
}

struct RunOutcome {
  RunSpec spec;
  SimulationResult result;
};

// Execute the run matrix with a pool of workers. Each run is sequential and
// owns its RNG stream, so the outcome vector (ordered by run index) does not
// depend on the worker count or on completion order. Numerical failures are
// recorded on the affected row; config-level errors throw before any thread
// starts.
inline std::vector<RunOutcome> execute_runs(
    const RunConfig& cfg, const std::vector<RunSpec>& specs,
    const std::function<void(const RunOutcome&)>& on_done = {}) {
  if (specs.empty()) return {};
  {
    // Fail fast on configuration problems (grid shape, stability bound, ...):
    // these do not depend on sigma/tau, so checking one cell covers all.
    ModelParams p = cfg.params;
    p.sigma = specs.front().sigma;
    p.tau = specs.front().tau;
    DynamicsConfig dc = cfg.dynamics;
    dc.kind = dynamics_kind_for(cfg.variant);
    Grid grid(cfg.n_nodes, p.rho);
    validate(dc, p, grid);
    if (!(dc.perturbation >= 0.0 && dc.perturbation <= 0.1))
      throw std::invalid_argument("dynamics: perturbation must lie in [0, 0.1]");
  }
  int workers = std::max(1, std::min(cfg.workers, static_cast<int>(specs.size())));
  std::vector<RunOutcome> out(specs.size());
  std::atomic<std::size_t> cursor{0};
  std::mutex done_mutex;
  auto work = [&]() {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= specs.size()) return;
      RunOutcome& slot = out[i];
      slot.spec = specs[i];
      try {
        slot.result = execute_run(cfg, specs[i]);
      } catch (const std::exception& e) {
        slot.result = SimulationResult{};
        slot.result.blew_up = true;
        slot.result.seed = specs[i].engine_seed;
        slot.result.diagnostic = e.what();
      }
      if (on_done) {
        std::lock_guard<std::mutex> lock(done_mutex);
        on_done(slot);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

// Compact %g-style formatting for directory names.
inline std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string run_dir_name(const RunSpec& spec) {
  return "sigma" + fmt_short(spec.sigma) + "_tau" + fmt_short(spec.tau) + "_seed" +
         std::to_string(spec.engine_seed);
}

// meta.json payload: result summary plus a config echo that replays exactly
// this run (single cell, explicit engine seed).
inline nlohmann::json meta_json(const RunConfig& cfg, const RunSpec& spec,
                                const SimulationResult& r) {
  RunConfig echo = cfg;
  echo.params.sigma = spec.sigma;
  echo.params.tau = spec.tau;
  echo.dynamics.kind = dynamics_kind_for(cfg.variant);
  echo.sigma_values.clear();
  echo.tau_values.clear();
  echo.seeds = 1;
  echo.seed_list = {spec.engine_seed};
  echo.workers = 1;
  nlohmann::json j;
  j["steps_taken"] = r.steps_taken;
  j["converged"] = r.converged;
  j["final_residual"] = r.final_residual;
  j["urban_count"] = r.urban_count;
  j["seed"] = r.seed;
  j["mass_drift"] = r.mass_drift;
  j["blew_up"] = r.blew_up;
  j["diagnostic"] = r.diagnostic;
  j["config"] = config_to_json(echo);
  return j;
}

}  // namespace racetrack
