#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavesnn/lif.hpp"
#include "wavesnn/plasticity.hpp"
#include "wavesnn/topology.hpp"

namespace wavesnn {

struct GeometrySpec {
  enum class Kind { grid, line, csv };
  Kind kind = Kind::grid;
  std::size_t width = 1;
  std::size_t height = 1;
  std::size_t n = 1;  // line only
  double spacing = 1.0;
  std::string path;  // csv only

  LayerGeometry build() const;
};

struct LayerSpec {
  std::string name;
  GeometrySpec geometry;
  bool toroidal = false;
  KernelParams kernel;
  LifParams lif;
  double input_gain = 1.0;  // S^x = input_gain * I
  CompetitionRule input_rule;
  CompetitionRule output_rule;
};

struct NoiseSpec {
  double amplitude = 0.0;
  int layer = 0;
  /// Noise is applied for steps < stop_step; negative means always.
  long stop_step = -1;
};

struct ProbeSpec {
  int layer = 0;
  std::size_t neuron = 0;
};

struct NetworkConfig {
  std::vector<LayerSpec> layers;
  double weight_init_mu = 1.0;
  double weight_init_sigma = 0.5;
  PlasticityParams plasticity;
  bool learning_enabled = true;
  /// When > 0, weight matrix l is plastic only during steps
  /// [l * staging_steps, (l + 1) * staging_steps).
  long staging_steps = 0;
  double dt = 0.1;
  long n_steps = 1000;
  std::uint64_t seed = 1;
  NoiseSpec noise;
  long snapshot_every = 100;
  /// Empty: one probe at the spatial center of every layer.
  std::vector<ProbeSpec> probes;

  void validate() const;
};

struct NetworkState {
  std::vector<LayerState> layers;
  std::vector<WeightMatrix> weights;  // weights[l] maps layer l to layer l + 1
  double t = 0.0;
  long step = 0;
};

/// Layer spec with its geometry and coupling matrices resolved.
struct BuiltLayer {
  LayerSpec spec;
  LayerGeometry geometry;
  AdjacencyMatrix distances;
  AdjacencyMatrix adjacency;
  double input_gain = 1.0;
};

/// i.i.d. N(mu, sigma) entries clamped to [0, w_max]; a pure function of the arguments.
WeightMatrix init_weights(std::size_t n_pre, std::size_t n_post, double mu, double sigma, std::uint64_t seed,
                          double w_max);

/// Per-step i.i.d. uniform [0, amplitude] currents; a pure function of (n, amplitude, seed, step).
Eigen::VectorXd noise_drive(std::size_t n, double amplitude, std::uint64_t seed, long step);

/// Mixes two 64-bit values into a well-spread seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Neuron closest to the layer centroid (lowest index on ties).
std::size_t center_neuron(const LayerGeometry& geometry);

/// Spike outputs of one network step.
struct StepResult {
  std::vector<Eigen::VectorXd> spikes;   // H per layer
  std::vector<Eigen::VectorXd> outputs;  // y per layer after output competition
};

struct StepOptions {
  bool noise = true;
  bool learning = true;
};

class Network {
 public:
  explicit Network(NetworkConfig config);

  const NetworkConfig& config() const noexcept { return config_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  const BuiltLayer& layer(std::size_t l) const { return layers_.at(l); }
  std::size_t layer_size(std::size_t l) const { return layers_.at(l).geometry.size(); }

  /// Resting layers and freshly initialized weights at t = 0.
  NetworkState initial_state() const;
  /// Resting layers at t = 0 with the given weights.
  NetworkState state_with_weights(std::vector<WeightMatrix> weights) const;

  /// One synchronous sweep over all layers (ascending), advancing each by dt.
  StepResult step(NetworkState& state, const Eigen::VectorXd& external_input, StepOptions options = {}) const;

 private:
  NetworkConfig config_;
  std::vector<BuiltLayer> layers_;
};

/// Resets a layer to v_reset with no pending spikes, leaving thresholds untouched.
void quiesce(LayerState& state, const LifParams& params);

}  // namespace wavesnn
