#include "qsteer/stoch.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

namespace qsteer {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64_mix(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t a = splitmix64_mix(seed + kGolden);
  const std::uint64_t b = splitmix64_mix(index * kGolden + 0x632BE59BD9B4E019ULL);
  return splitmix64_mix(a ^ b);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed),
      stream_index_(stream_index),
      state_(stream_key(master_seed, stream_index)) {}

std::uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return splitmix64_mix(state_);
}

double RngStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_uniform_open() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  const double u1 = next_uniform_open();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double sample_wiener(RngStream& stream, double dt) {
  if (!(dt > 0.0)) throw ValidationError("sample_wiener requires dt > 0");
  return stream.next_gaussian() * std::sqrt(dt);
}

int sample_jump(RngStream& stream, double rate_dt) {
  if (!(rate_dt >= 0.0)) {
    throw ValidationError("sample_jump requires rate*dt >= 0");
  }
  if (rate_dt > 0.1) stream.note_coarse_rate();
  const double p = std::min(rate_dt, 1.0);
  if (p >= 1.0) {
    stream.next_uniform();  // keep draw count branch independent
    return 1;
  }
  return stream.next_uniform() < p ? 1 : 0;
}

std::size_t sample_categorical(RngStream& stream,
                               std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ValidationError("negative category probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("category probabilities sum to " +
                          std::to_string(total) + ", expected 1");
  }
  const double u = stream.next_uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

TimeGrid::TimeGrid(double dt, std::size_t n_steps) : dt_(dt), n_steps_(n_steps) {
  if (!(dt > 0.0)) throw ValidationError("TimeGrid requires dt > 0");
  if (n_steps < 1) throw ValidationError("TimeGrid requires n_steps >= 1");
}

namespace {

class StepFnTrajectory final : public Trajectory {
 public:
  StepFnTrajectory(StepFn step, const DensityMatrix& initial)
      : step_(std::move(step)), state_(initial) {}
  void step(RngStream& stream) override { state_ = step_(state_, stream); }
  DensityMatrix state() const override { return state_; }

 private:
  StepFn step_;
  DensityMatrix state_;
};

// Accumulated sums per grid point, relative to the reference trajectory:
// sum dx, dy, dz, dx^2, dy^2, dz^2, dF, dD, dL.
constexpr std::size_t kSlots = 9;

struct BlockPartial {
  std::size_t block_index = 0;
  std::size_t count = 0;
  std::uint64_t coarse_rate_events = 0;
  std::vector<double> sums;  // (n_points * kSlots)
};

struct RefCurve {
  std::vector<BlochVector> bloch;
  std::vector<QuantifierTriple> quant;
};

QuantifierTriple framed_metrics(const DensityMatrix& state,
                                const Matrix2* frame) {
  if (frame == nullptr) return target_metrics(state);
  return target_metrics(DensityMatrix::normalized_from_matrix(
      frame->adjoint() * state.matrix() * (*frame)));
}

void accumulate_trajectory(const RefCurve& ref, Trajectory& traj,
                           RngStream& stream, const TimeGrid& grid,
                           std::size_t traj_index, std::vector<double>& sums,
                           const Matrix2* frame) {
  const std::size_t n_points = grid.n_steps() + 1;
  for (std::size_t k = 0; k < n_points; ++k) {
    if (k > 0) {
      try {
        traj.step(stream);
      } catch (const Error& e) {
        throw TrajectoryError(traj_index, k, e.what());
      }
    }
    const DensityMatrix state = traj.state();
    const BlochVector b = bloch_from_density(state);
    const QuantifierTriple q = framed_metrics(state, frame);
    double* s = sums.data() + k * kSlots;
    const double dx = b.x - ref.bloch[k].x;
    const double dy = b.y - ref.bloch[k].y;
    const double dz = b.z - ref.bloch[k].z;
    s[0] += dx;
    s[1] += dy;
    s[2] += dz;
    s[3] += dx * dx;
    s[4] += dy * dy;
    s[5] += dz * dz;
    s[6] += q.fidelity - ref.quant[k].fidelity;
    s[7] += q.trace_distance - ref.quant[k].trace_distance;
    s[8] += q.linear_entropy - ref.quant[k].linear_entropy;
  }
}

// Pairwise merge stack keyed by power-of-two levels; merging order depends
// only on the block index sequence, never on scheduling.
class MergeStack {
 public:
  void push(BlockPartial&& p) {
    levels_.emplace_back(0, std::move(p));
    while (levels_.size() >= 2 &&
           levels_[levels_.size() - 2].first == levels_.back().first) {
      auto [lvl, right] = std::move(levels_.back());
      levels_.pop_back();
      auto& [llvl, left] = levels_.back();
      merge_into(left, right);
      llvl = lvl + 1;
    }
  }

  BlockPartial finish() {
    if (levels_.empty()) return {};
    BlockPartial total = std::move(levels_.front().second);
    for (std::size_t i = 1; i < levels_.size(); ++i) {
      merge_into(total, levels_[i].second);
    }
    levels_.clear();
    return total;
  }

 private:
  static void merge_into(BlockPartial& left, const BlockPartial& right) {
    left.count += right.count;
    left.coarse_rate_events += right.coarse_rate_events;
    for (std::size_t i = 0; i < left.sums.size(); ++i) {
      left.sums[i] += right.sums[i];
    }
  }
  std::vector<std::pair<int, BlockPartial>> levels_;
};

constexpr std::size_t kBlockSize = 16;

}  // namespace

TrajectoryFactory make_trajectory_factory(StepFn step) {
  return [step = std::move(step)](const DensityMatrix& initial) {
    return std::make_unique<StepFnTrajectory>(step, initial);
  };
}

EnsembleStats run_ensemble(const TrajectoryFactory& factory,
                           const DensityMatrix& initial, const TimeGrid& grid,
                           std::size_t n_trajectories, std::uint64_t seed,
                           int threads, const Matrix2* quantifier_frame) {
  if (n_trajectories < 1) {
    throw ValidationError("run_ensemble requires n >= 1");
  }
  const std::size_t n_points = grid.n_steps() + 1;
  const std::size_t n_blocks =
      (n_trajectories + kBlockSize - 1) / kBlockSize;

  std::size_t hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  std::size_t n_workers = threads > 0 ? static_cast<std::size_t>(threads) : hw;
  n_workers = std::min(n_workers, n_blocks);

  // Reference curve: trajectory 0, computed up front and shared read-only.
  RefCurve ref;
  ref.bloch.resize(n_points);
  ref.quant.resize(n_points);
  {
    RngStream stream(seed, 0);
    auto traj = factory(initial);
    for (std::size_t k = 0; k < n_points; ++k) {
      if (k > 0) {
        try {
          traj->step(stream);
        } catch (const Error& e) {
          throw TrajectoryError(0, k, e.what());
        }
      }
      const DensityMatrix state = traj->state();
      ref.bloch[k] = bloch_from_density(state);
      ref.quant[k] = framed_metrics(state, quantifier_frame);
    }
  }

  auto run_block = [&](std::size_t block) {
    BlockPartial partial;
    partial.block_index = block;
    partial.sums.assign(n_points * kSlots, 0.0);
    const std::size_t lo = block * kBlockSize;
    const std::size_t hi = std::min(lo + kBlockSize, n_trajectories);
    for (std::size_t i = lo; i < hi; ++i) {
      RngStream stream(seed, i);
      try {
        auto traj = factory(initial);
        accumulate_trajectory(ref, *traj, stream, grid, i, partial.sums,
                              quantifier_frame);
      } catch (const TrajectoryError&) {
        throw;
      } catch (const std::exception& e) {
        throw TrajectoryError(i, 0, e.what());
      }
      partial.coarse_rate_events += stream.coarse_rate_events();
      ++partial.count;
    }
    return partial;
  };

  MergeStack stack;
  std::optional<TrajectoryError> first_error;

  if (n_workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      stack.push(run_block(b));
    }
  } else {
    std::mutex mu;
    std::condition_variable cv;
    std::map<std::size_t, BlockPartial> ready;
    std::atomic<std::size_t> next_block{0};
    std::size_t next_needed = 0;
    bool aborted = false;
    const std::size_t window = 4 * n_workers;

    auto worker = [&]() {
      while (true) {
        const std::size_t b = next_block.fetch_add(1);
        if (b >= n_blocks) return;
        {
          std::unique_lock lock(mu);
          if (aborted) return;
        }
        try {
          BlockPartial partial = run_block(b);
          std::unique_lock lock(mu);
          cv.wait(lock, [&] {
            return aborted || b < next_needed + window;
          });
          if (aborted) return;
          ready.emplace(b, std::move(partial));
          cv.notify_all();
        } catch (const TrajectoryError& e) {
          std::unique_lock lock(mu);
          if (!first_error || e.trajectory_index < first_error->trajectory_index) {
            first_error = e;
          }
          aborted = true;
          cv.notify_all();
          return;
        }
      }
    };

    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);

    {
      std::unique_lock lock(mu);
      while (next_needed < n_blocks) {
        cv.wait(lock, [&] {
          return aborted || ready.count(next_needed) > 0;
        });
        if (aborted) break;
        BlockPartial partial = std::move(ready.at(next_needed));
        ready.erase(next_needed);
        ++next_needed;
        cv.notify_all();
        lock.unlock();
        stack.push(std::move(partial));
        lock.lock();
      }
    }
    for (auto& th : pool) th.join();
    if (first_error) throw *first_error;
  }

  BlockPartial total = stack.finish();

  EnsembleStats stats;
  stats.n_trajectories = n_trajectories;
  stats.coarse_rate_events = total.coarse_rate_events;
  stats.t.resize(n_points);
  stats.mean_bloch.resize(n_points);
  stats.stderr_bloch.resize(n_points);
  stats.mean_quantifiers.resize(n_points);
  const double n = static_cast<double>(n_trajectories);
  for (std::size_t k = 0; k < n_points; ++k) {
    stats.t[k] = grid.time_at(k);
    const double* s = total.sums.data() + k * kSlots;
    stats.mean_bloch[k] = {ref.bloch[k].x + s[0] / n,
                           ref.bloch[k].y + s[1] / n,
                           ref.bloch[k].z + s[2] / n};
    auto se = [&](double sum_d, double sum_d2) {
      if (n_trajectories < 2) return 0.0;
      const double var = std::max(0.0, sum_d2 - sum_d * sum_d / n);
      return std::sqrt(var / (n * (n - 1.0)));
    };
    stats.stderr_bloch[k] = {se(s[0], s[3]), se(s[1], s[4]), se(s[2], s[5])};
    stats.mean_quantifiers[k] = {ref.quant[k].fidelity + s[6] / n,
                                 ref.quant[k].trace_distance + s[7] / n,
                                 ref.quant[k].linear_entropy + s[8] / n};
  }
  return stats;
}

EnsembleStats run_ensemble(const StepFn& step, const DensityMatrix& initial,
                           const TimeGrid& grid, std::size_t n_trajectories,
                           std::uint64_t seed, int threads,
                           const Matrix2* quantifier_frame) {
  return run_ensemble(make_trajectory_factory(step), initial, grid,
                      n_trajectories, seed, threads, quantifier_frame);
}

}  // namespace qsteer
