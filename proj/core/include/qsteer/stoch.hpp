#pragma once

// Reproducible stochastic primitives and the trajectory ensemble runner.
//
// Randomness is counter based: a stream is keyed by (master_seed,
// stream_index) and produces the same sequence on any platform and with any
// worker count.  Ensemble reduction uses a fixed pairwise tree over
// trajectory-index blocks, so results are bitwise independent of scheduling.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "qsteer/qmat.hpp"
#include "qsteer/quantifiers.hpp"

namespace qsteer {

/// Stepper failure, annotated with the trajectory that raised it.
struct TrajectoryError : Error {
  TrajectoryError(std::size_t trajectory, std::size_t step,
                  const std::string& what)
      : Error("trajectory " + std::to_string(trajectory) + ", step " +
              std::to_string(step) + ": " + what),
        trajectory_index(trajectory),
        step_index(step) {}
  std::size_t trajectory_index;
  std::size_t step_index;
};

// ---------------------------------------------------------------------------
// RngStream

/// Splittable counter-based stream (SplitMix64 on a per-stream key).
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64();
  /// uniform in [0, 1)
  double next_uniform();
  /// uniform in (0, 1]
  double next_uniform_open();
  /// standard normal via Box-Muller (two uniforms per draw, no caching)
  double next_gaussian();

  /// count of sample_jump calls whose rate*dt exceeded 0.1 (dt too coarse)
  std::uint64_t coarse_rate_events() const { return coarse_rate_events_; }
  void note_coarse_rate() { ++coarse_rate_events_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t state_;
  std::uint64_t coarse_rate_events_ = 0;
};

/// Gaussian increment with mean 0 and variance dt.
double sample_wiener(RngStream& stream, double dt);

/// Bernoulli(min(rate_dt, 1)) click indicator; counts rate_dt > 0.1 events
/// on the stream as a discretization diagnostic.
int sample_jump(RngStream& stream, double rate_dt);

/// Index i with probability probs[i]; probs must be nonnegative and sum to 1
/// within 1e-9.
std::size_t sample_categorical(RngStream& stream, std::span<const double> probs);

// ---------------------------------------------------------------------------
// Time grid and ensemble statistics

struct TimeGrid {
  TimeGrid(double dt, std::size_t n_steps);
  double dt() const { return dt_; }
  std::size_t n_steps() const { return n_steps_; }
  double t_max() const { return dt_ * static_cast<double>(n_steps_); }
  double time_at(std::size_t k) const { return dt_ * static_cast<double>(k); }

 private:
  double dt_;
  std::size_t n_steps_;
};

/// Per-grid-point ensemble mean state, standard errors of the Bloch
/// components, and mean quantifier traces.
struct EnsembleStats {
  std::vector<double> t;
  std::vector<BlochVector> mean_bloch;
  std::vector<BlochVector> stderr_bloch;
  std::vector<QuantifierTriple> mean_quantifiers;
  std::size_t n_trajectories = 0;
  std::uint64_t coarse_rate_events = 0;

  DensityMatrix mean_state(std::size_t k) const {
    return density_from_bloch(mean_bloch[k]);
  }
  std::size_t n_points() const { return t.size(); }
};

// ---------------------------------------------------------------------------
// Trajectories

/// One stochastic realization.  step() advances the state by one grid step;
/// state() reports the current density matrix.
class Trajectory {
 public:
  virtual ~Trajectory() = default;
  virtual void step(RngStream& stream) = 0;
  virtual DensityMatrix state() const = 0;
};

using TrajectoryFactory =
    std::function<std::unique_ptr<Trajectory>(const DensityMatrix& initial)>;

/// Stateless density-matrix stepper rho -> rho'.
using StepFn = std::function<DensityMatrix(const DensityMatrix&, RngStream&)>;

/// Wrap a plain stepper as a trajectory factory.
TrajectoryFactory make_trajectory_factory(StepFn step);

/// Run n trajectories; trajectory i draws from RngStream(seed, i).
///
/// threads == 0 picks hardware concurrency.  Output is bitwise identical for
/// any thread count: trajectories are accumulated in fixed-size index blocks
/// and merged with a pairwise tree in block order.  Statistics are
/// accumulated relative to trajectory 0 so a deterministic stepper yields
/// exactly zero standard error.
///
/// quantifier_frame, when given, rotates the comparison target for the
/// quantifier traces: metrics are evaluated on R^dag w R.
EnsembleStats run_ensemble(const TrajectoryFactory& factory,
                           const DensityMatrix& initial, const TimeGrid& grid,
                           std::size_t n_trajectories, std::uint64_t seed,
                           int threads = 0,
                           const Matrix2* quantifier_frame = nullptr);

EnsembleStats run_ensemble(const StepFn& step, const DensityMatrix& initial,
                           const TimeGrid& grid, std::size_t n_trajectories,
                           std::uint64_t seed, int threads = 0,
                           const Matrix2* quantifier_frame = nullptr);

}  // namespace qsteer
