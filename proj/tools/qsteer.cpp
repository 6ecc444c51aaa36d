// qsteer: scenario-driven steering simulator front end.
//
//   qsteer simulate -c scenario.json -o out.csv [--seed N] [--threads K]
//   qsteer verify   -c scenario.json
//   qsteer sweep    -c sweep.json -o out.csv
//
// Exit codes: 0 success, 2 config validation failure, 3 numerical failure,
// 4 scenario without a closed-form oracle (verify only).

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qsteer/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNoOracle = 4;

std::uint64_t effective_seed(const qsteer::Scenario& scenario, bool seed_set,
                             std::uint64_t cli_seed) {
  if (seed_set) return cli_seed;
  if (const char* env = std::getenv("QSTEER_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw qsteer::ValidationError(std::string("QSTEER_SEED is not an integer: ") +
                                    env);
    }
  }
  return scenario.seed;
}

int run_simulate(const std::string& config, const std::string& output,
                 bool seed_set, std::uint64_t seed, int threads) {
  qsteer::Scenario scenario = qsteer::load_scenario(config);
  scenario.seed = effective_seed(scenario, seed_set, seed);
  const qsteer::SimulateResult result =
      qsteer::simulate_to_files(scenario, output, threads);
  std::cout << "wrote " << result.n_rows << " rows to " << output
            << " (digest " << result.digest << ", "
            << result.wall_clock_seconds << " s)\n";
  return kExitOk;
}

int run_verify(const std::string& config) {
  const qsteer::Scenario scenario = qsteer::load_scenario(config);
  const qsteer::VerifyReport report = qsteer::verify_scenario(scenario);
  for (const auto& it : report.items) {
    std::printf("[%s] %s: max deviation %.3e (tolerance %.1e)\n",
                it.pass ? "PASS" : "FAIL", it.name.c_str(), it.deviation,
                it.tolerance);
  }
  return report.all_pass() ? kExitOk : 1;
}

int run_sweep(const std::string& config, const std::string& output) {
  const qsteer::SweepConfig sweep = qsteer::load_sweep(config);
  const std::size_t rows = qsteer::sweep_to_file(sweep, output);
  std::cout << "wrote " << rows << " rows to " << output << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measurement-based qubit steering simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  int threads = 0;

  auto* simulate = app.add_subcommand("simulate", "run a scenario to CSV");
  simulate->add_option("-c,--config", config, "scenario JSON")->required();
  simulate->add_option("-o,--output", output, "output CSV path")->required();
  auto* seed_opt =
      simulate->add_option("--seed", seed, "override the scenario seed");
  simulate->add_option("--threads", threads,
                       "worker threads (0 = hardware concurrency)");

  auto* verify = app.add_subcommand(
      "verify", "compare numerics against the closed-form oracle");
  verify->add_option("-c,--config", config, "scenario JSON")->required();

  auto* sweep = app.add_subcommand("sweep", "stationary-quantifier sweep");
  sweep->add_option("-c,--config", config, "sweep JSON")->required();
  sweep->add_option("-o,--output", output, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (simulate->parsed()) {
      return run_simulate(config, output, seed_opt->count() > 0, seed,
                          threads);
    }
    if (verify->parsed()) return run_verify(config);
    return run_sweep(config, output);
  } catch (const qsteer::NoOracleError& e) {
    std::cerr << "no oracle: " << e.what() << "\n";
    return kExitNoOracle;
  } catch (const qsteer::ValidationError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qsteer::TrajectoryError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const qsteer::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
