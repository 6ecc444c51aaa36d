#pragma once

// Scenario execution: deterministic and ensemble simulation with CSV export
// and a JSON run record, closed-form verification, and stationary-quantifier
// parameter sweeps.

#include <map>
#include <string>
#include <vector>

#include "qsteer/ode.hpp"
#include "qsteer/scenario.hpp"
#include "qsteer/stoch.hpp"

namespace qsteer {

/// verify() was asked to check a scenario that has no closed-form oracle.
struct NoOracleError : Error {
  using Error::Error;
};

/// Bloch-space generator of the scenario's averaged (Lindblad) flow.
BlochRhs make_lindblad_rhs(const Scenario& scenario);

/// Trajectory factory of the scenario's stochastic unraveling; throws
/// ValidationError for models that only define averaged dynamics.
TrajectoryFactory make_scenario_trajectory_factory(const Scenario& scenario);

struct SimulateResult {
  std::size_t n_rows = 0;
  std::string digest;
  double wall_clock_seconds = 0.0;
};

/// Run the scenario and write the CSV (and a RunRecord sidecar next to it,
/// "<csv>.run.json").  CSV bytes are locale independent, 17 significant
/// digits, and bit-identical across thread counts.
SimulateResult simulate_to_files(const Scenario& scenario,
                                 const std::string& csv_path, int threads = 0,
                                 bool write_sidecar = true);

/// In-memory CSV for tests and the determinism criterion.
std::string simulate_to_csv(const Scenario& scenario, int threads = 0);

struct VerifyItem {
  std::string name;
  double deviation{};
  double tolerance{};
  bool pass{};
};

struct VerifyReport {
  std::vector<VerifyItem> items;
  bool all_pass() const {
    for (const auto& it : items) {
      if (!it.pass) return false;
    }
    return !items.empty();
  }
};

/// Compare the scenario's numeric dynamics against its closed-form oracle.
/// Throws NoOracleError when the model has none.
VerifyReport verify_scenario(const Scenario& scenario);

/// Stationary-quantifier sweep over one or two ranged parameters.
struct SweepRange {
  std::string parameter;
  double min{};
  double max{};
  std::size_t count{};
};

struct SweepConfig {
  std::string family;  // two_direction | detector_init | sigma_x_noise |
                       // uniform_arc | von_mises
  double gamma = 1.0;  // used by detector_init / sigma_x_noise
  std::vector<SweepRange> ranges;
  std::map<std::string, double> fixed;  // non-ranged parameter values
};

SweepConfig parse_sweep(const std::string& json_text);
SweepConfig load_sweep(const std::string& path);

/// Cartesian grid of (parameters, F, D1, L) rows.
std::string sweep_to_csv(const SweepConfig& config);
std::size_t sweep_to_file(const SweepConfig& config,
                          const std::string& csv_path);

}  // namespace qsteer
