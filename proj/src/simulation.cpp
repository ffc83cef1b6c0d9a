#include "wavesnn/simulation.hpp"

#include <cmath>

#include "wavesnn/errors.hpp"

namespace wavesnn {

long steps_for(double duration, double dt) {
  if (!(dt > 0.0)) throw ValidationError("steps_for: dt must be > 0");
  if (!(duration >= 0.0)) throw ValidationError("steps_for: duration must be >= 0");
  return std::max(1L, std::lround(duration / dt));
}

InputStream::InputStream(std::vector<Eigen::VectorXd> frames, double hold_duration, double gap)
    : frames_(std::move(frames)), hold_(hold_duration), gap_(gap) {
  if (!(hold_duration > 0.0)) throw ValidationError("InputStream: hold_duration must be > 0");
  if (!(gap >= 0.0)) throw ValidationError("InputStream: gap must be >= 0");
  if (!frames_.empty()) size_ = static_cast<std::size_t>(frames_.front().size());
  for (const auto& f : frames_)
    if (static_cast<std::size_t>(f.size()) != size_) throw DimensionError("InputStream: frames differ in length");
}

InputStream InputStream::silent(std::size_t n) {
  InputStream s;
  s.size_ = n;
  return s;
}

long InputStream::frame_at(long step, double dt) const {
  if (frames_.empty() || step < 0) return -1;
  const long hold = steps_for(hold_, dt);
  const long gap = gap_ > 0.0 ? std::lround(gap_ / dt) : 0;
  const long period = hold + gap;
  const long k = step / period;
  if (k >= static_cast<long>(frames_.size())) return -1;
  return (step - k * period) < hold ? k : -1;
}

Eigen::VectorXd InputStream::input_at(long step, double dt) const {
  const long k = frame_at(step, dt);
  if (k < 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
  return frames_[static_cast<std::size_t>(k)];
}

long InputStream::total_steps(double dt) const {
  if (frames_.empty()) return 0;
  const long hold = steps_for(hold_, dt);
  const long gap = gap_ > 0.0 ? std::lround(gap_ / dt) : 0;
  return static_cast<long>(frames_.size()) * (hold + gap);
}

std::size_t SimulationRecord::spike_count(std::size_t layer) const {
  std::size_t total = 0;
  for (const auto& s : spikes.at(layer)) total += s.size();
  return total;
}

SimulationRecord simulate(const Network& network, NetworkState& state, const InputStream& stream, long n_steps,
                          const RecordOptions& options, StepOptions step_options, const StepObserver& observer) {
  if (n_steps < 0) throw ValidationError("simulate: n_steps must be >= 0");
  const auto& cfg = network.config();
  if (stream.input_size() != network.layer_size(0))
    throw DimensionError("input stream frames have length " + std::to_string(stream.input_size()) +
                         ", layer 0 has " + std::to_string(network.layer_size(0)) + " neurons");

  SimulationRecord rec;
  rec.dt = cfg.dt;
  rec.t0 = state.t;
  rec.start_step = state.step;
  for (std::size_t l = 0; l < network.layer_count(); ++l) rec.layer_sizes.push_back(network.layer_size(l));
  if (options.spikes) rec.spikes.assign(network.layer_count(), {});

  if (options.probes) {
    if (cfg.probes.empty()) {
      for (std::size_t l = 0; l < network.layer_count(); ++l)
        rec.probes.push_back({static_cast<int>(l), center_neuron(network.layer(l).geometry), {}, {}});
    } else {
      for (const auto& p : cfg.probes) rec.probes.push_back({p.layer, p.neuron, {}, {}});
    }
  }
  auto sample_probes = [&] {
    for (auto& p : rec.probes) {
      const auto& layer = state.layers[static_cast<std::size_t>(p.layer)];
      p.v.push_back(layer.v[static_cast<Eigen::Index>(p.neuron)]);
      p.theta.push_back(layer.theta[static_cast<Eigen::Index>(p.neuron)]);
    }
  };
  const long every = options.snapshot_every == 0 ? cfg.snapshot_every : options.snapshot_every;
  auto snapshot = [&](long step) {
    for (std::size_t m = 0; m < state.weights.size(); ++m) rec.snapshots.push_back({step, m, state.weights[m].w});
  };

  sample_probes();
  if (options.snapshots) snapshot(0);

  for (long k = 0; k < n_steps; ++k) {
    const auto input = stream.input_at(k, cfg.dt);
    const auto result = network.step(state, input, step_options);
    if (options.spikes) {
      for (std::size_t l = 0; l < result.spikes.size(); ++l) {
        std::vector<std::uint32_t> idx;
        const auto& s = result.spikes[l];
        for (Eigen::Index i = 0; i < s.size(); ++i)
          if (s[i] != 0.0) idx.push_back(static_cast<std::uint32_t>(i));
        rec.spikes[l].push_back(std::move(idx));
      }
    }
    sample_probes();
    if (options.snapshots && every > 0 && (k + 1) % every == 0) snapshot(k + 1);
    if (observer) observer(state, result);
    ++rec.n_steps;
  }
  return rec;
}

SimulationRecord run(const NetworkConfig& config, const InputStream& stream, const RecordOptions& options) {
  const Network network(config);
  auto state = network.initial_state();
  return simulate(network, state, stream, config.n_steps, options);
}

}  // namespace wavesnn
