// Command-line front end: spectral tables, critical curves, seeded time
// simulations, parameter sweeps, and a built-in invariant check.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical blow-up.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "racetrack/racetrack.hpp"
#include "racetrack/run.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace racetrack;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::uint64_t seed = 0;
  int seeds = 1;
  int workers = 1;
  std::string variant;
  double peak_factor = 1.5;
  bool gnuplot = false;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* seeds_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* variant_opt = nullptr;
  CLI::Option* peak_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file");
  cmd->add_option("--set", o.sets, "override a config key, e.g. --set params.mu=0.7")
      ->expected(-1);
  o.out_opt = cmd->add_option("--out", o.out_dir, "output directory");
  o.seed_opt = cmd->add_option("--seed", o.seed, "base RNG seed");
  o.seeds_opt = cmd->add_option("--seeds", o.seeds, "seeded runs per (sigma, tau) cell");
  o.workers_opt = cmd->add_option("--workers", o.workers, "concurrent runs in sweeps");
  o.variant_opt = cmd->add_option("--variant", o.variant, "qllu_ad | qllu_r | cp_ad | cp_r");
  o.peak_opt = cmd->add_option("--peak-factor", o.peak_factor,
                               "peak threshold factor for urban-area counting");
  cmd->add_flag("--gnuplot-hint", o.gnuplot, "print a gnuplot one-liner for the emitted CSV");
}

RunConfig load_config(const CommonOpts& o) {
  json doc = json::object();
  if (!o.config_path.empty()) doc = json::parse(read_text_file(o.config_path));
  for (const std::string& s : o.sets) apply_override(doc, s);
  RunConfig cfg = config_from_json(doc);
  if (o.out_opt->count()) cfg.out_dir = o.out_dir;
  if (o.seed_opt->count()) cfg.dynamics.seed = o.seed;
  if (o.seeds_opt->count()) cfg.seeds = o.seeds;
  if (o.workers_opt->count()) cfg.workers = o.workers;
  if (o.variant_opt->count()) cfg.variant = variant_from_string(o.variant);
  if (o.peak_opt->count()) cfg.dynamics.peak_factor = o.peak_factor;
  return cfg;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

void hint(const CommonOpts& o, const std::string& line) {
  if (o.gnuplot) std::cout << "gnuplot hint: " << line << "\n";
}

// ---------------------------------------------------------------- spectral

int cmd_eigen(const CommonOpts& o, bool grid_defaults) {
  RunConfig cfg = load_config(o);
  validate(cfg.params);
  std::vector<int> modes = cfg.modes;
  std::sort(modes.begin(), modes.end());
  std::vector<double> taus = cfg.tau_values;
  std::vector<double> sigmas = cfg.sigma_values;
  if (taus.empty()) taus = grid_defaults ? linspace(0.01, 1.0, 100) : std::vector<double>{cfg.params.tau};
  if (sigmas.empty())
    sigmas = grid_defaults ? linspace(1.01, 12.0, 100) : std::vector<double>{cfg.params.sigma};
  std::sort(taus.begin(), taus.end());
  std::sort(sigmas.begin(), sigmas.end());

  fs::create_directories(cfg.out_dir);
  std::string name = grid_defaults ? "heatmap.csv" : "eigen.csv";
  std::string path = (fs::path(cfg.out_dir) / name).string();
  CsvWriter csv(path, "variant,k,tau,sigma,z,gamma");
  ModelParams p = cfg.params;
  for (int k : modes)
    for (double sigma : sigmas)
      for (double tau : taus) {
        p.sigma = sigma;
        p.tau = tau;
        SpectralPoint pt = mode_growth_rate(cfg.variant, k, p);
        csv.row({to_string(cfg.variant), std::to_string(k), fmt17(tau), fmt17(sigma),
                 fmt17(pt.z), fmt17(pt.gamma)});
      }
  std::cout << "wrote " << path << " (" << modes.size() * sigmas.size() * taus.size()
            << " rows)\n";
  hint(o, "set datafile separator ','; plot '" + path +
             "' every ::1 using 3:6 with lines title 'gamma vs tau'");
  return 0;
}

int cmd_critical(const CommonOpts& o) {
  RunConfig cfg = load_config(o);
  validate(cfg.params);
  std::vector<int> modes = cfg.modes;
  std::sort(modes.begin(), modes.end());
  std::vector<double> sigmas =
      cfg.sigma_values.empty() ? std::vector<double>{cfg.params.sigma} : cfg.sigma_values;
  std::sort(sigmas.begin(), sigmas.end());

  fs::create_directories(cfg.out_dir);
  std::string path = (fs::path(cfg.out_dir) / "critical.csv").string();
  CsvWriter csv(path, "variant,k,sigma,root_index,tau_root");
  json poles = json::array();
  long long n_roots = 0;
  for (int k : modes)
    for (double sigma : sigmas) {
      CriticalCurve cc = critical_curve(cfg.variant, k, sigma, cfg.params, cfg.tau_min, cfg.tau_max);
      for (std::size_t i = 0; i < cc.roots.size(); ++i, ++n_roots)
        csv.row({to_string(cfg.variant), std::to_string(k), fmt17(sigma),
                 std::to_string(i), fmt17(cc.roots[i])});
      for (const PoleEvent& pe : cc.poles)
        poles.push_back({{"variant", to_string(cfg.variant)},
                         {"k", k},
                         {"sigma", sigma},
                         {"tau", pe.tau}});
    }
  json meta;
  meta["poles"] = poles;
  write_text_file((fs::path(cfg.out_dir) / "critical_meta.json").string(), meta.dump(2) + "\n");
  std::cout << "wrote " << path << " (" << n_roots << " roots)\n";
  hint(o, "set datafile separator ','; plot '" + path +
             "' every ::1 using 5:3 with points title 'critical curve'");
  return 0;
}

// -------------------------------------------------------------- simulation

void write_run_outputs(const RunConfig& cfg, const RunOutcome& oc) {
  fs::path dir = fs::path(cfg.out_dir) / run_dir_name(oc.spec);
  fs::create_directories(dir);
  CsvWriter csv((dir / "solution.csv").string(), "node_index,r,lambda_star,omega_star");
  const Field& lam = oc.result.lambda_star;
  const Field& om = oc.result.omega_star;
  for (int j = 0; j < lam.size(); ++j)
    csv.row({std::to_string(j), fmt17(lam.grid.node(j)), fmt17(lam[j]),
             fmt17(j < om.size() ? om[j] : 0.0)});
  write_text_file((dir / "meta.json").string(), meta_json(cfg, oc.spec, oc.result).dump(2) + "\n");
}

void print_run_line(const RunOutcome& oc) {
  std::cout << "run " << oc.spec.index << " sigma=" << fmt_short(oc.spec.sigma)
            << " tau=" << fmt_short(oc.spec.tau) << " seed=" << oc.result.seed
            << " steps=" << oc.result.steps_taken
            << " converged=" << (oc.result.converged ? "true" : "false")
            << " urban_count=" << oc.result.urban_count
            << " mass_drift=" << fmt17(oc.result.mass_drift);
  if (oc.result.blew_up) std::cout << " BLOWUP";
  std::cout << "\n";
}

int finish_runs(const RunConfig& cfg, const std::vector<RunOutcome>& outcomes) {
  bool any_blowup = false;
  for (const RunOutcome& oc : outcomes) {
    write_run_outputs(cfg, oc);
    print_run_line(oc);
    if (oc.result.blew_up) any_blowup = true;
  }
  if (any_blowup) {
    json diag;
    diag["error"] = "numerical blow-up";
    diag["runs"] = json::array();
    for (const RunOutcome& oc : outcomes)
      if (oc.result.blew_up)
        diag["runs"].push_back({{"dir", run_dir_name(oc.spec)},
                                {"diagnostic", oc.result.diagnostic}});
    std::cerr << diag.dump(2) << "\n";
  }
  return any_blowup ? 3 : 0;
}

int cmd_simulate(const CommonOpts& o) {
  RunConfig cfg = load_config(o);
  std::vector<RunSpec> specs = plan_runs(cfg);
  fs::create_directories(cfg.out_dir);
  std::vector<RunOutcome> outcomes;
  if (specs.size() == 1 && cfg.workers <= 1) {
    // Single run: report progress so multi-million-step runs are watchable.
    RunOutcome oc;
    oc.spec = specs[0];
    ModelParams p = cfg.params;
    p.sigma = specs[0].sigma;
    p.tau = specs[0].tau;
    DynamicsConfig dc = cfg.dynamics;
    dc.seed = specs[0].engine_seed;
    dc.kind = dynamics_kind_for(cfg.variant);
    Grid grid(cfg.n_nodes, p.rho);
    validate(dc, p, grid);
    Field lam0 = random_initial(grid, p.Lambda / (2.0 * std::numbers::pi * p.rho),
                                dc.perturbation, dc.seed);
    oc.result = run_to_stationary(lam0, p, dc, [](long long step, double res) {
      std::fprintf(stderr, "  step %lld residual %.3e\n", step, res);
    });
    outcomes.push_back(std::move(oc));
  } else {
    outcomes = execute_runs(cfg, specs);
  }
  int rc = finish_runs(cfg, outcomes);
  if (!outcomes.empty())
    hint(o, "set datafile separator ','; plot '" +
               (fs::path(cfg.out_dir) / run_dir_name(outcomes.front().spec) / "solution.csv")
                   .string() +
               "' every ::1 using 2:3 with lines title 'lambda*'");
  return rc;
}

int cmd_sweep(const CommonOpts& o) {
  RunConfig cfg = load_config(o);
  std::vector<RunSpec> specs = plan_runs(cfg);
  fs::create_directories(cfg.out_dir);
  std::vector<RunOutcome> outcomes = execute_runs(cfg, specs, [](const RunOutcome& oc) {
    std::fprintf(stderr, "  done run %d (sigma=%s tau=%s): steps=%lld urban=%d%s\n",
                 oc.spec.index, fmt_short(oc.spec.sigma).c_str(), fmt_short(oc.spec.tau).c_str(),
                 oc.result.steps_taken, oc.result.urban_count,
                 oc.result.blew_up ? " BLOWUP" : "");
  });

  std::string sum_path = (fs::path(cfg.out_dir) / "summary.csv").string();
  CsvWriter sum(sum_path, "sigma,tau,seed,urban_count,converged,steps");
  for (const RunOutcome& oc : outcomes) {
    write_run_outputs(cfg, oc);
    sum.row({fmt17(oc.spec.sigma), fmt17(oc.spec.tau), std::to_string(oc.spec.engine_seed),
             std::to_string(oc.result.urban_count), oc.result.converged ? "true" : "false",
             std::to_string(oc.result.steps_taken)});
  }

  // Max urban count per (sigma, tau) cell: consecutive runs share a cell.
  std::string max_path = (fs::path(cfg.out_dir) / "summary_max.csv").string();
  CsvWriter summax(max_path, "sigma,tau,max_urban_count");
  std::size_t i = 0;
  while (i < outcomes.size()) {
    double sigma = outcomes[i].spec.sigma, tau = outcomes[i].spec.tau;
    int best = outcomes[i].result.urban_count;
    std::size_t j = i + 1;
    while (j < outcomes.size() && outcomes[j].spec.sigma == sigma && outcomes[j].spec.tau == tau) {
      best = std::max(best, outcomes[j].result.urban_count);
      ++j;
    }
    summax.row({fmt17(sigma), fmt17(tau), std::to_string(best)});
    i = j;
  }
  long long failures = 0;
  for (const RunOutcome& oc : outcomes)
    if (oc.result.blew_up) ++failures;
  std::cout << "wrote " << sum_path << " (" << outcomes.size() << " runs, " << failures
            << " failures)\n";
  hint(o, "set datafile separator ','; plot '" + max_path +
             "' every ::1 using 2:3 with linespoints title 'max urban count'");
  return 0;
}

// -------------------------------------------------------------- validation

int cmd_validate(const CommonOpts& o) {
  (void)o;
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    if (ok)
      std::cout << "ok - " << name << "\n";
    else {
      std::cout << "FAIL - " << name << (detail.empty() ? "" : " (" + detail + ")") << "\n";
      ++failures;
    }
  };

  // Quadrature against the closed-form kernel response.
  {
    Grid g(256, 1.0);
    double worst = 0.0;
    for (double alpha : {0.5, 1.0, 2.0}) {
      TransportKernel ker = build_kernel(g, alpha);
      for (int k = 1; k <= 8; ++k) {
        double discrete = 0.0;
        for (int m = 0; m < g.n; ++m) discrete += ker.weights[m] * std::cos(k * m * g.dr());
        double exact = kernel_fourier_response(k, alpha, 1.0);
        worst = std::max(worst, std::abs(discrete - exact) / std::abs(exact));
      }
    }
    check("kernel quadrature matches closed-form response (n=256, rel err <= 5e-3)", worst <= 5e-3,
          "worst " + fmt17(worst));
  }

  // Circulant symmetry: convolution commutes with rotation.
  {
    Grid g(128, 1.0);
    TransportKernel ker = build_kernel(g, 1.3);
    Field f(g);
    std::mt19937_64 gen(7);
    for (int i = 0; i < g.n; ++i) f[i] = uniform01(gen);
    Field a = convolve(ker, rotate(f, 37));
    Field b = rotate(convolve(ker, f), 37);
    check("convolution commutes with grid rotation (<= 1e-12)", max_norm(a, b) <= 1e-12);
  }

  // Uniform state is a fixed point of the gridded maps.
  {
    Grid g(256, 1.0);
    ModelParams p;
    HomogeneousState hs = discrete_homogeneous_state(g, p);
    TransportKernel ker = build_kernel(g, p.alpha());
    Field lam(g, hs.lambda_bar), phi(g, hs.phi_bar);
    Field G = price_index(lam, ker, p);
    Field w = nominal_wage(lam, phi, G, ker, p);
    Field om = real_wage(w, G, p.mu);
    double eG = 0, ew = 0, eo = 0;
    for (int i = 0; i < g.n; ++i) {
      eG = std::max(eG, std::abs(G[i] - hs.G_bar) / hs.G_bar);
      ew = std::max(ew, std::abs(w[i] - hs.w_bar) / hs.w_bar);
      eo = std::max(eo, std::abs(om[i] - hs.omega_bar) / std::abs(hs.omega_bar));
    }
    check("uniform state is a fixed point of the discrete maps (<= 1e-10 rel)",
          eG <= 1e-10 && ew <= 1e-10 && eo <= 1e-10);
  }

  // Spectral symmetries.
  {
    std::mt19937_64 gen(11);
    double worst = 0.0, worst_even = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      ModelParams p;
      p.mu = 0.9 * uniform01(gen);
      p.sigma = 1.1 + 10.0 * uniform01(gen);
      p.tau = 0.01 + uniform01(gen);
      int k = 1 + static_cast<int>(uniform01(gen) * 8);
      for (ModelVariant v : {ModelVariant::QLLU_AD, ModelVariant::QLLU_R, ModelVariant::CP_AD,
                             ModelVariant::CP_R}) {
        double gp = mode_growth_rate(v, k, p).gamma;
        double gm = mode_growth_rate(v, -k, p).gamma;
        worst = std::max(worst, std::abs(gp - gm));
      }
      double z = trade_cost_index(2 * k, p.alpha(), p.rho);
      double ar2 = p.alpha() * p.alpha() * p.rho * p.rho;
      double zref = ar2 / (4.0 * k * k + ar2);
      worst_even = std::max(worst_even, std::abs(z - zref) / zref);
    }
    check("growth rates are even in k (<= 1e-12)", worst <= 1e-12, fmt17(worst));
    check("even-k trade-cost index has the exact rational form (<= 1e-14 rel)",
          worst_even <= 1e-14, fmt17(worst_even));
  }

  // Short advection-diffusion run: exact replay, conserved mass.
  {
    Grid g(128, 1.0);
    ModelParams p;
    p.sigma = 5.0;
    p.tau = 0.45;
    DynamicsConfig dc;
    dc.max_steps = 2000;
    dc.seed = 42;
    Field lam0 = random_initial(g, p.Lambda / (2.0 * std::numbers::pi), dc.perturbation, dc.seed);
    SimulationResult r1 = run_to_stationary(lam0, p, dc);
    SimulationResult r2 = run_to_stationary(lam0, p, dc);
    check("2000-step run replays bit-identically",
          r1.lambda_star.values == r2.lambda_star.values);
    check("mass drift stays at round-off over 2000 steps (<= 1e-12)", r1.mass_drift <= 1e-12,
          fmt17(r1.mass_drift));
  }

  // Replicator step conserves mass exactly by construction.
  {
    Grid g(64, 1.0);
    ModelParams p;
    Field lam = random_initial(g, p.Lambda / (2.0 * std::numbers::pi), 0.05, 3);
    Field om(g);
    for (int i = 0; i < g.n; ++i) om[i] = std::sin(3.0 * g.node(i));
    Field next = replicator_step(lam, om, p, 0.01);
    check("replicator step rescales to exact total mass (<= 1e-14 rel)",
          std::abs(total_mass(next) - p.Lambda) / p.Lambda <= 1e-14);
  }

  std::cout << (failures == 0 ? "validate: all checks passed\n"
                              : "validate: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"racetrack: linear stability and large-time simulation of a "
               "circular spatial economy"};
  app.require_subcommand(1);

  CommonOpts o_eigen, o_heatmap, o_critical, o_simulate, o_sweep, o_validate;
  CLI::App* c_eigen = app.add_subcommand("eigen", "growth rates Gamma_k over (tau, sigma) points");
  CLI::App* c_heatmap =
      app.add_subcommand("heatmap", "eigen over a dense (tau, sigma) grid (default 100x100)");
  CLI::App* c_critical = app.add_subcommand("critical", "tau-roots of Gamma_k = 0 per sigma");
  CLI::App* c_simulate = app.add_subcommand("simulate", "seeded runs to a stationary state");
  CLI::App* c_sweep =
      app.add_subcommand("sweep", "simulate across sigma/tau axes and summarize urban counts");
  CLI::App* c_validate = app.add_subcommand("validate", "run the built-in invariant checks");
  add_common(c_eigen, o_eigen);
  add_common(c_heatmap, o_heatmap);
  add_common(c_critical, o_critical);
  add_common(c_simulate, o_simulate);
  add_common(c_sweep, o_sweep);
  add_common(c_validate, o_validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_eigen->parsed()) return cmd_eigen(o_eigen, false);
    if (c_heatmap->parsed()) return cmd_eigen(o_heatmap, true);
    if (c_critical->parsed()) return cmd_critical(o_critical);
    if (c_simulate->parsed()) return cmd_simulate(o_simulate);
    if (c_sweep->parsed()) return cmd_sweep(o_sweep);
    if (c_validate->parsed()) return cmd_validate(o_validate);
  } catch (const std::domain_error& e) {
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 2;
}
