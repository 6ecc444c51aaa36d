#pragma once

// Scenario configuration: the JSON-facing description of one simulation run
// (error model, parameters, initial state, grid, ensemble, seed), validated
// against the owning modules' invariants before anything runs.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "qsteer/coupling_hamiltonian_errors.hpp"
#include "qsteer/direction_errors.hpp"
#include "qsteer/measurement_basis_errors.hpp"
#include "qsteer/qmat.hpp"
#include "qsteer/static_detector_error.hpp"

namespace qsteer {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

enum class RunMode { Lindblad, Ensemble, Single };

enum class DirectionHierarchy { Full, DirAvg, ClickAvg, Lindblad };

struct IdealModel {};

struct DetectorInitModel {
  double kappa{};
  double a{};
  double phi{};
};

struct DirectionsModel {
  std::variant<SteeringSet, UniformArc, VonMises> directions{
      SteeringSet({{0.0, 0.0, 1.0}})};
  DirectionHierarchy hierarchy = DirectionHierarchy::Full;
};

struct CouplingModel {
  CouplingDistribution dist;
};

struct HamiltonianNoiseModel {
  PerturbationBlocks blocks{sigma_z(), Matrix2{}, sigma_z()};
  double gamma_tilde{};
  std::string label;  // "sigma_z", "sigma_x", or "custom"
};

struct MeasurementBasisModel {
  double p1 = 0.5;
};

using ErrorModel =
    std::variant<IdealModel, DetectorInitModel, DirectionsModel, CouplingModel,
                 HamiltonianNoiseModel, MeasurementBasisModel>;

struct Scenario {
  double gamma{};
  BlochVector initial_bloch{0.0, 0.0, 1.0};
  double dt{};
  std::size_t n_steps{};  // 0 is legal: emit the initial row only
  std::size_t n_trajectories = 1;
  std::uint64_t seed = 0;
  RunMode mode = RunMode::Lindblad;
  ErrorModel model;
  /// optional rotated comparison target for the quantifier columns
  std::optional<RotationAngles> quantifier_target;
};

/// Parse and validate a scenario from JSON text; errors carry field paths.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

/// Canonical JSON form (sorted keys, normalized fields); basis of the digest
/// and of run-record round trips.
std::string canonical_scenario_json(const Scenario& scenario);

/// FNV-1a 64 over the canonical JSON; stable under config field reordering.
std::string scenario_digest(const Scenario& scenario);

}  // namespace qsteer
