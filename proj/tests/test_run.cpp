#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "racetrack/io.hpp"
#include "racetrack/run.hpp"

#include "oracles.hpp"

using namespace racetrack;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_CASE("seventeen significant digits round-trip any double", "[io]") {
  for (double x : {3.141592653589793, 0.1, 1.0 / 3.0, 1e-300, oracle::lambda_bar,
                   -7.25e17, 2.2250738585072014e-308}) {
    std::string s = fmt17(x);
    REQUIRE(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("csv writer emits the header and rows", "[io]") {
  fs::path path = fs::temp_directory_path() / "racetrack_csv_test.csv";
  {
    CsvWriter csv(path.string(), "a,b");
    csv.row({"1", "2"});
    csv.row({"x", fmt17(0.5)});
  }
  REQUIRE(read_text_file(path.string()) == "a,b\n1,2\nx,0.5\n");
  fs::remove(path);
  REQUIRE_THROWS_AS(CsvWriter("/nonexistent-dir/x.csv", "a"), std::runtime_error);
}

TEST_CASE("seed derivation matches the frozen stream", "[run]") {
  REQUIRE(derive_seed(0, 0) == oracle::seed_0_0);
  REQUIRE(derive_seed(0, 1) == oracle::seed_0_1);
  REQUIRE(derive_seed(0, 2) == oracle::seed_0_2);
  REQUIRE(derive_seed(7, 0) == oracle::seed_7_0);
  REQUIRE(derive_seed(42, 0) == oracle::seed_42_0);
}

TEST_CASE("uniform01 is deterministic and in range", "[run]") {
  std::mt19937_64 a(123), b(123);
  for (int i = 0; i < 1000; ++i) {
    double x = uniform01(a);
    REQUIRE(x == uniform01(b));
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    // exactly 53 bits of resolution
    double scaled = x * 9007199254740992.0;  // 2^53
    REQUIRE(scaled == std::floor(scaled));
  }
}

TEST_CASE("config serialization round-trips every field", "[run]") {
  RunConfig c;
  c.params.mu = 0.55;
  c.params.sigma = 6.5;
  c.params.tau = 0.33;
  c.params.F = 2.0;
  c.params.Lambda = 1.5;
  c.params.Phi = 8.0;
  c.params.rho = 1.25;
  c.params.a = 0.4;
  c.params.d = 0.004;
  c.params.v = 0.9;
  c.n_nodes = 128;
  c.variant = ModelVariant::CP_R;
  c.out_dir = "elsewhere";
  c.modes = {2, 5};
  c.tau_values = {0.1, 0.2};
  c.sigma_values = {3.0};
  c.tau_min = 0.02;
  c.tau_max = 1.7;
  c.seeds = 4;
  c.seed_list = {9, 11};
  c.workers = 3;
  c.dynamics.dt = 0.02;
  c.dynamics.max_steps = 1234;
  c.dynamics.tol = 1e-9;
  c.dynamics.kind = DynamicsKind::REPLICATOR;
  c.dynamics.perturbation = 0.01;
  c.dynamics.seed = 77;
  c.dynamics.peak_factor = 1.4;

  RunConfig r = config_from_json(config_to_json(c));
  REQUIRE(r.params == c.params);
  REQUIRE(r.dynamics == c.dynamics);
  REQUIRE(r.n_nodes == c.n_nodes);
  REQUIRE(r.variant == c.variant);
  REQUIRE(r.out_dir == c.out_dir);
  REQUIRE(r.modes == c.modes);
  REQUIRE(r.tau_values == c.tau_values);
  REQUIRE(r.sigma_values == c.sigma_values);
  REQUIRE(r.tau_min == c.tau_min);
  REQUIRE(r.tau_max == c.tau_max);
  REQUIRE(r.seeds == c.seeds);
  REQUIRE(r.seed_list == c.seed_list);
  REQUIRE(r.workers == c.workers);
}

TEST_CASE("config parsing rejects unknown keys and bad types", "[run]") {
  REQUIRE_THROWS_WITH(config_from_json(json{{"paramz", json::object()}}),
                      Catch::Matchers::ContainsSubstring("paramz"));
  REQUIRE_THROWS_WITH(config_from_json(json{{"params", {{"muu", 0.5}}}}),
                      Catch::Matchers::ContainsSubstring("params.muu"));
  REQUIRE_THROWS_AS(config_from_json(json{{"params", {{"mu", "abc"}}}}), std::invalid_argument);
  REQUIRE_THROWS_AS(config_from_json(json{{"tau_range", {0.1, 0.2, 0.3}}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(config_from_json(json::array()), std::invalid_argument);
  REQUIRE_NOTHROW(config_from_json(json::object()));
}

TEST_CASE("dotted-path overrides patch the config document", "[run]") {
  json doc = json::object();
  apply_override(doc, "params.mu=0.7");
  apply_override(doc, "modes=[1,2,3]");
  apply_override(doc, "variant=qllu_r");
  apply_override(doc, "dynamics.kind=replicator");
  apply_override(doc, "grid.n_nodes=64");
  RunConfig c = config_from_json(doc);
  REQUIRE(c.params.mu == 0.7);
  REQUIRE(c.modes == std::vector<int>{1, 2, 3});
  REQUIRE(c.variant == ModelVariant::QLLU_R);
  REQUIRE(c.dynamics.kind == DynamicsKind::REPLICATOR);
  REQUIRE(c.n_nodes == 64);
  REQUIRE_THROWS_AS(apply_override(doc, "no-equals-sign"), std::invalid_argument);
  REQUIRE_THROWS_AS(apply_override(doc, "=5"), std::invalid_argument);
}

TEST_CASE("run planning: ordering, derived seeds, explicit seed list", "[run]") {
  RunConfig c;
  c.sigma_values = {3.0, 5.0};
  c.tau_values = {0.1, 0.2, 0.3};
  c.seeds = 2;
  c.dynamics.seed = 0;
  std::vector<RunSpec> specs = plan_runs(c);
  REQUIRE(specs.size() == 12);
  // sigma outer, tau middle, seed inner
  REQUIRE(specs[0].sigma == 3.0);
  REQUIRE(specs[0].tau == 0.1);
  REQUIRE(specs[1].tau == 0.1);
  REQUIRE(specs[2].tau == 0.2);
  REQUIRE(specs[6].sigma == 5.0);
  for (int i = 0; i < 12; ++i) {
    REQUIRE(specs[i].index == i);
    REQUIRE(specs[i].engine_seed == derive_seed(0, i));
  }
  REQUIRE(specs[0].engine_seed == oracle::seed_0_0);
  REQUIRE(specs[1].engine_seed == oracle::seed_0_1);

  c.seed_list = {11, 22};
  specs = plan_runs(c);
  REQUIRE(specs.size() == 12);
  REQUIRE(specs[0].engine_seed == 11);
  REQUIRE(specs[1].engine_seed == 22);
  REQUIRE(specs[2].engine_seed == 11);

  c.seed_list.clear();
  c.seeds = 0;
  REQUIRE_THROWS_AS(plan_runs(c), std::invalid_argument);
}

TEST_CASE("only the mobile-population variants can be simulated", "[run]") {
  REQUIRE(dynamics_kind_for(ModelVariant::QLLU_AD) == DynamicsKind::ADVECTION_DIFFUSION);
  REQUIRE(dynamics_kind_for(ModelVariant::QLLU_R) == DynamicsKind::REPLICATOR);
  REQUIRE_THROWS_AS(dynamics_kind_for(ModelVariant::CP_AD), std::invalid_argument);
  REQUIRE_THROWS_AS(dynamics_kind_for(ModelVariant::CP_R), std::invalid_argument);
}

TEST_CASE("worker count does not change sweep results", "[run]") {
  RunConfig c;
  c.variant = ModelVariant::QLLU_AD;
  c.n_nodes = 32;
  c.sigma_values = {3.0, 5.0};
  c.tau_values = {0.3, 0.45};
  c.seeds = 1;
  c.dynamics.max_steps = 500;
  std::vector<RunSpec> specs = plan_runs(c);

  c.workers = 1;
  std::vector<RunOutcome> serial = execute_runs(c, specs);
  c.workers = 4;
  std::vector<RunOutcome> parallel = execute_runs(c, specs);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    REQUIRE(serial[i].spec.index == static_cast<int>(i));
    REQUIRE(parallel[i].spec.index == static_cast<int>(i));
    REQUIRE(serial[i].result.lambda_star.values == parallel[i].result.lambda_star.values);
    REQUIRE(serial[i].result.steps_taken == parallel[i].result.steps_taken);
    REQUIRE(serial[i].result.seed == parallel[i].result.seed);
  }
}

TEST_CASE("a blown-up cell is recorded and the sweep continues", "[run]") {
  RunConfig c;
  c.variant = ModelVariant::QLLU_AD;
  c.n_nodes = 64;
  c.params.a = 500.0;  // runaway advection at substantial trade costs
  c.sigma_values = {5.0};
  c.tau_values = {1e-4, 0.45};
  c.seeds = 1;
  c.dynamics.max_steps = 300;
  std::vector<RunOutcome> out = execute_runs(c, plan_runs(c));
  REQUIRE(out.size() == 2);
  REQUIRE_FALSE(out[0].result.blew_up);  // nearly free trade: flat fitness, no runaway
  REQUIRE(out[1].result.blew_up);
  REQUIRE_FALSE(out[1].result.diagnostic.empty());
  REQUIRE(out[1].result.seed == out[1].spec.engine_seed);
}

TEST_CASE("configuration errors surface before any run starts", "[run]") {
  RunConfig c;
  c.variant = ModelVariant::CP_R;  // not simulatable
  REQUIRE_THROWS_AS(execute_runs(c, plan_runs(c)), std::invalid_argument);

  RunConfig cfl;
  cfl.params.d = 0.05;  // violates the stability bound at n = 256, dt = 0.01
  REQUIRE_THROWS_AS(execute_runs(cfl, plan_runs(cfl)), std::invalid_argument);
}

TEST_CASE("run directory names and the meta echo replay a single cell", "[run]") {
  RunSpec spec{3, 5.0, 0.45, 7ull};
  REQUIRE(run_dir_name(spec) == "sigma5_tau0.45_seed7");

  RunConfig c;
  c.sigma_values = {4.0, 5.0};
  c.tau_values = {0.3, 0.45};
  c.seeds = 3;
  SimulationResult r;
  r.steps_taken = 17;
  r.converged = true;
  r.final_residual = 1e-12;
  r.urban_count = 2;
  r.seed = 7;
  r.mass_drift = 3e-11;
  json meta = meta_json(c, spec, r);
  REQUIRE(meta["steps_taken"] == 17);
  REQUIRE(meta["converged"] == true);
  REQUIRE(meta["urban_count"] == 2);
  REQUIRE(meta["seed"] == 7);
  RunConfig echo = config_from_json(meta["config"]);
  REQUIRE(echo.params.sigma == 5.0);
  REQUIRE(echo.params.tau == 0.45);
  REQUIRE(echo.seed_list == std::vector<std::uint64_t>{7});
  REQUIRE(echo.seeds == 1);
  REQUIRE(echo.workers == 1);
  REQUIRE(echo.sigma_values.empty());
  REQUIRE(echo.tau_values.empty());
  REQUIRE(plan_runs(echo).size() == 1);
  REQUIRE(plan_runs(echo)[0].engine_seed == 7);
}
