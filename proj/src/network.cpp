#include "wavesnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wavesnn/errors.hpp"

namespace wavesnn {

namespace {

constexpr std::uint64_t kWeightStream = 0x7765696768747300ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365000000ULL;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

LayerGeometry GeometrySpec::build() const {
  switch (kind) {
    case Kind::grid:
      return grid_geometry(width, height, spacing);
    case Kind::line:
      return line_geometry(n, spacing);
    case Kind::csv:
      return load_geometry_csv(path);
  }
  throw ValidationError("unknown geometry kind");
}

void NetworkConfig::validate() const {
  if (layers.empty()) throw ValidationError("NetworkConfig: at least one layer is required");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("NetworkConfig: dt must be > 0");
  if (n_steps < 0) throw ValidationError("NetworkConfig: n_steps must be >= 0");
  if (!(weight_init_sigma >= 0.0)) throw ValidationError("NetworkConfig: weight_init_sigma must be >= 0");
  if (!std::isfinite(weight_init_mu)) throw ValidationError("NetworkConfig: weight_init_mu must be finite");
  if (snapshot_every < 0) throw ValidationError("NetworkConfig: snapshot_every must be >= 0");
  if (staging_steps < 0) throw ValidationError("NetworkConfig: staging_steps must be >= 0");
  if (noise.amplitude < 0.0) throw ValidationError("NoiseSpec: amplitude must be >= 0");
  if (noise.layer < 0 || static_cast<std::size_t>(noise.layer) >= layers.size())
    throw ValidationError("NoiseSpec: layer index out of range");
  plasticity.validate();
  for (const auto& layer : layers) {
    const std::string where = "layer '" + layer.name + "': ";
    try {
      layer.kernel.validate();
      layer.lif.validate();
      layer.input_rule.validate();
      layer.output_rule.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    if (!std::isfinite(layer.input_gain)) throw ValidationError(where + "input_gain must be finite");
    if (layer.toroidal && layer.geometry.kind == GeometrySpec::Kind::csv)
      throw ValidationError(where + "toroidal wrap needs a generated lattice");
  }
  for (const auto& p : probes)
    if (p.layer < 0 || static_cast<std::size_t>(p.layer) >= layers.size())
      throw ValidationError("probe layer index out of range");
}

WeightMatrix init_weights(std::size_t n_pre, std::size_t n_post, double mu, double sigma, std::uint64_t seed,
                          double w_max) {
  if (!(sigma >= 0.0)) throw ValidationError("init_weights: sigma must be >= 0");
  WeightMatrix m;
  m.w.resize(static_cast<Eigen::Index>(n_post), static_cast<Eigen::Index>(n_pre));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Row-major fill order so the sample sequence does not depend on storage order.
  for (Eigen::Index i = 0; i < m.w.rows(); ++i)
    for (Eigen::Index j = 0; j < m.w.cols(); ++j) {
      const double draw = sigma > 0.0 ? mu + sigma * gauss(rng) : mu;
      m.w(i, j) = std::clamp(draw, 0.0, w_max);
    }
  return m;
}

Eigen::VectorXd noise_drive(std::size_t n, double amplitude, std::uint64_t seed, long step) {
  if (!(amplitude >= 0.0)) throw ValidationError("noise_drive: amplitude must be >= 0");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (amplitude == 0.0) return out;
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(step)));
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = amplitude * unit_uniform(rng);
  return out;
}

std::size_t center_neuron(const LayerGeometry& geometry) {
  const auto c = geometry.centroid();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    double d = 0.0;
    for (int a = 0; a < 3; ++a) d += (geometry.positions[i][a] - c[a]) * (geometry.positions[i][a] - c[a]);
    if (d < best_d - 1e-12) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void quiesce(LayerState& state, const LifParams& params) {
  state.v.setConstant(params.v_reset);
  state.spikes.setZero();
}

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  layers_.reserve(config_.layers.size());
  for (const auto& spec : config_.layers) {
    BuiltLayer built;
    built.spec = spec;
    built.geometry = spec.geometry.build();
    built.distances = distance_matrix(built.geometry, spec.toroidal);
    built.adjacency = build_adjacency(built.distances, spec.kernel);
    built.input_gain = spec.input_gain;
    const auto n = built.geometry.size();
    for (const auto* rule : {&spec.input_rule, &spec.output_rule})
      if (rule->kind == CompetitionKind::k_best && rule->k > n)
        throw ValidationError("layer '" + spec.name + "': k_best k exceeds layer size");
    layers_.push_back(std::move(built));
  }
  for (const auto& p : config_.probes)
    if (p.neuron >= layers_[static_cast<std::size_t>(p.layer)].geometry.size())
      throw ValidationError("probe neuron index out of range");
}

NetworkState Network::initial_state() const {
  std::vector<WeightMatrix> weights;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    auto w = init_weights(layer_size(l), layer_size(l + 1), config_.weight_init_mu, config_.weight_init_sigma,
                          mix_seed(config_.seed ^ kWeightStream, l), config_.plasticity.w_max);
    w.pre_layer = static_cast<int>(l);
    w.post_layer = static_cast<int>(l + 1);
    weights.push_back(std::move(w));
  }
  return state_with_weights(std::move(weights));
}

NetworkState Network::state_with_weights(std::vector<WeightMatrix> weights) const {
  if (weights.size() + 1 != layers_.size())
    throw DimensionError("network needs " + std::to_string(layers_.size() - 1) + " weight matrices");
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (weights[l].n_pre() != layer_size(l) || weights[l].n_post() != layer_size(l + 1))
      throw DimensionError("weight matrix " + std::to_string(l) + " has the wrong shape");
  NetworkState state;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    state.layers.push_back(LayerState::resting(layer_size(l), layers_[l].spec.lif));
  state.weights = std::move(weights);
  return state;
}

StepResult Network::step(NetworkState& state, const Eigen::VectorXd& external_input, StepOptions options) const {
  const auto n_layers = layers_.size();
  if (state.layers.size() != n_layers || state.weights.size() + 1 != n_layers)
    throw DimensionError("network state does not match the network");
  if (static_cast<std::size_t>(external_input.size()) != layer_size(0))
    throw DimensionError("external input has length " + std::to_string(external_input.size()) + ", layer 0 has " +
                         std::to_string(layer_size(0)) + " neurons");

  const double dt = config_.dt;
  const bool noise_on = options.noise && config_.noise.amplitude > 0.0 &&
                        (config_.noise.stop_step < 0 || state.step < config_.noise.stop_step);
  const bool learn = options.learning && config_.learning_enabled && config_.plasticity.eta > 0.0;

  StepResult result;
  result.spikes.reserve(n_layers);
  result.outputs.reserve(n_layers);
  Eigen::VectorXd input = external_input;

  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& built = layers_[l];
    auto& layer = state.layers[l];
    const int tag = static_cast<int>(l);

    if (noise_on && static_cast<std::size_t>(config_.noise.layer) == l)
      input += noise_drive(layer_size(l), config_.noise.amplitude, mix_seed(config_.seed ^ kNoiseStream, l),
                           state.step);

    // S * H over the active columns plus the scaled-identity spike input.
    FrozenInputs frozen{built.input_gain * input, layer.spikes};
    for (Eigen::Index j = 0; j < layer.spikes.size(); ++j)
      if (layer.spikes[j] != 0.0) frozen.drive += layer.spikes[j] * built.adjacency.col(j);

    layer = rk4_step(layer, frozen, dt, built.spec.lif, tag);
    result.spikes.push_back(detect_spikes_and_reset(layer, built.spec.lif, tag));
    result.outputs.push_back(apply_competition(result.spikes.back(), built.spec.output_rule));

    if (l >= 1 && learn) {
      const long stage = config_.staging_steps;
      const bool active_stage =
          stage <= 0 || (state.step >= static_cast<long>(l - 1) * stage && state.step < static_cast<long>(l) * stage);
      if (active_stage) stdp_update(state.weights[l - 1], result.outputs[l - 1], result.outputs[l], dt, config_.plasticity);
    }

    if (l + 1 < n_layers) {
      const auto& y = result.outputs[l];
      const auto& w = state.weights[l].w;
      Eigen::VectorXd z = Eigen::VectorXd::Zero(w.rows());
      for (Eigen::Index j = 0; j < y.size(); ++j)
        if (y[j] != 0.0) z += y[j] * w.col(j);
      input = apply_competition(relu(z), layers_[l + 1].spec.input_rule);
    }
  }

  state.t += dt;
  ++state.step;
  for (auto& layer : state.layers) layer.t = state.t;
  return result;
}

}  // namespace wavesnn
