#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wavesnn/network.hpp"

namespace wavesnn {

/// Frames presented to layer 0 on a hold schedule: each frame is held for
/// `hold_duration`, followed by `gap` of zero input. After the last frame the
/// input is zero.
class InputStream {
 public:
  InputStream() = default;
  InputStream(std::vector<Eigen::VectorXd> frames, double hold_duration, double gap = 0.0);

  /// Zero input of length n for the whole run.
  static InputStream silent(std::size_t n);

  std::size_t frame_count() const noexcept { return frames_.size(); }
  std::size_t input_size() const noexcept { return size_; }
  double hold_duration() const noexcept { return hold_; }
  double gap() const noexcept { return gap_; }

  /// Frame index shown during step `step` of width dt, or -1 for zero input.
  long frame_at(long step, double dt) const;
  /// Input current for step `step`.
  Eigen::VectorXd input_at(long step, double dt) const;
  /// Steps covered by all frames and gaps.
  long total_steps(double dt) const;

 private:
  std::vector<Eigen::VectorXd> frames_;
  std::size_t size_ = 0;
  double hold_ = 1.0;
  double gap_ = 0.0;
};

/// Number of steps of width dt that make up `duration` (rounded, at least 1).
long steps_for(double duration, double dt);

struct WeightSnapshot {
  long step = 0;
  std::size_t matrix = 0;
  Eigen::MatrixXd w;
};

struct ProbeTrace {
  int layer = 0;
  std::size_t neuron = 0;
  std::vector<double> v;      // one entry per recorded time-level, starting with the initial state
  std::vector<double> theta;
};

/// Everything observed during a run. Step k (0-based) covers time
/// [t0 + k dt, t0 + (k + 1) dt); its spikes are detected at the end of it.
struct SimulationRecord {
  double dt = 0.0;
  double t0 = 0.0;
  long start_step = 0;
  long n_steps = 0;
  std::vector<std::size_t> layer_sizes;
  /// spikes[layer][k] = ascending indices of neurons that fired at step k.
  std::vector<std::vector<std::vector<std::uint32_t>>> spikes;
  std::vector<ProbeTrace> probes;
  std::vector<WeightSnapshot> snapshots;

  std::size_t spike_count(std::size_t layer) const;
};

struct RecordOptions {
  bool spikes = true;
  bool probes = true;
  bool snapshots = true;
  /// 0 uses the config's snapshot_every; negative disables periodic snapshots.
  long snapshot_every = 0;
};

/// Called after every step with the step result (optional observer).
using StepObserver = std::function<void(const NetworkState&, const StepResult&)>;

/// Iterates Network::step for `n_steps` from `state`, feeding `stream`, and
/// records the configured observations. The initial weight snapshot is always
/// taken when snapshots are enabled.
SimulationRecord simulate(const Network& network, NetworkState& state, const InputStream& stream, long n_steps,
                          const RecordOptions& options = {}, StepOptions step_options = {},
                          const StepObserver& observer = {});

/// Builds a network from `config`, starts from its initial state and runs
/// config.n_steps steps.
SimulationRecord run(const NetworkConfig& config, const InputStream& stream, const RecordOptions& options = {});

}  // namespace wavesnn
