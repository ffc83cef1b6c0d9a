#include "wavesnn/pipeline.hpp"

#include "wavesnn/errors.hpp"
#include "wavesnn/simulation.hpp"

namespace wavesnn {

InputStream image_stream(const LabeledDataset& data, std::size_t layer_size, const MnistSettings& settings) {
  std::vector<Eigen::VectorXd> frames;
  frames.reserve(data.size());
  for (const auto& image : data.images) frames.push_back(encode_frame(image, layer_size, settings.gain));
  return InputStream(std::move(frames), settings.hold, settings.gap);
}

void self_organize_on_images(const Network& network, NetworkState& state, const LabeledDataset& data,
                             const MnistSettings& settings) {
  const auto stream = image_stream(data, network.layer_size(0), settings);
  RecordOptions opts;
  opts.spikes = false;
  opts.probes = false;
  opts.snapshots = false;
  simulate(network, state, stream, stream.total_steps(network.config().dt), opts);
}

std::vector<Eigen::MatrixXd> present_frozen(const Network& network, const std::vector<WeightMatrix>& weights,
                                            const std::vector<Eigen::VectorXd>& thresholds,
                                            const LabeledDataset& data, const MnistSettings& settings,
                                            long step_offset) {
  if (!thresholds.empty() && thresholds.size() != network.layer_count())
    throw DimensionError("present_frozen: one threshold vector per layer expected");
  const double dt = network.config().dt;
  const long hold = steps_for(settings.hold, dt);
  std::vector<Eigen::MatrixXd> rates;
  for (std::size_t l = 0; l < network.layer_count(); ++l)
    rates.emplace_back(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(network.layer_size(l)));

  RecordOptions opts;
  opts.probes = false;
  opts.snapshots = false;
  StepOptions step_opts;
  step_opts.learning = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto state = network.state_with_weights(weights);
    for (std::size_t l = 0; l < thresholds.size(); ++l) state.layers[l].theta = thresholds[l];
    state.step = step_offset + static_cast<long>(i) * hold;
    const InputStream stream({encode_frame(data.images[i], network.layer_size(0), settings.gain)}, settings.hold);
    const auto rec = simulate(network, state, stream, hold, opts, step_opts);
    for (std::size_t l = 0; l < network.layer_count(); ++l)
      rates[l].row(static_cast<Eigen::Index>(i)) = extract_features(rec, l).transpose();
  }
  return rates;
}

MnistSplits load_mnist_splits(const ToolkitConfig& config) {
  const auto& m = config.task.mnist;
  if (m.train_images.empty() || m.train_labels.empty())
    throw ValidationError("task.mnist.train_images and task.mnist.train_labels must be set");
  MnistSplits out;
  const auto train = load_mnist_idx(config.resolve(m.train_images), config.resolve(m.train_labels));
  if (train.size() < m.train_count)
    throw ValidationError("task.mnist.train_count: file holds only " + std::to_string(train.size()) + " images");
  out.train = train.head(m.train_count);
  const bool same = m.test_images.empty() || (m.test_images == m.train_images && m.test_labels == m.train_labels);
  const auto test = same ? train : load_mnist_idx(config.resolve(m.test_images), config.resolve(m.test_labels));
  if (test.size() < m.test_offset + m.test_count)
    throw ValidationError("task.mnist.test_count: file holds only " + std::to_string(test.size()) + " images");
  out.test = test.slice(m.test_offset, m.test_count);
  return out;
}

std::size_t resolve_layer(int index, std::size_t layer_count) {
  const long resolved = index < 0 ? static_cast<long>(layer_count) + index : index;
  if (resolved < 0 || resolved >= static_cast<long>(layer_count))
    throw ValidationError("layer index " + std::to_string(index) + " out of range");
  return static_cast<std::size_t>(resolved);
}

MnistExperiment run_mnist_experiment(const ToolkitConfig& config, const LabeledDataset& train,
                                     const LabeledDataset& test, const ProgressFn& progress) {
  const auto& settings = config.task.mnist;
  const Network network(config.resolved_network());
  if (train.rows * train.cols != network.layer_size(0))
    throw DimensionError("MNIST images have " + std::to_string(train.rows * train.cols) + " pixels, layer 0 has " +
                         std::to_string(network.layer_size(0)) + " neurons");
  const auto feature_layer = resolve_layer(settings.feature_layer, network.layer_count());
  const auto tuning_layer = resolve_layer(settings.tuning_layer, network.layer_count());

  MnistExperiment out;
  auto state = network.initial_state();
  if (progress) progress("self-organize", 0, train.size());
  self_organize_on_images(network, state, train, settings);
  out.weights = state.weights;
  if (settings.carry_thresholds)
    for (const auto& layer : state.layers) out.thresholds.push_back(layer.theta);
  const long offset = state.step;
  out.self_organization_steps = state.step;
  const long hold = steps_for(settings.hold, network.config().dt);

  if (progress) progress("train presentations", 0, train.size());
  out.train_rates = present_frozen(network, out.weights, out.thresholds, train, settings, offset);
  if (progress) progress("test presentations", 0, test.size());
  out.test_rates = present_frozen(network, out.weights, out.thresholds, test, settings, offset + hold * static_cast<long>(train.size()));
  out.train_labels = train.labels;
  out.test_labels = test.labels;

  out.classifier = train_readout(out.train_rates[feature_layer], out.train_labels, config.task.readout);
  out.train_accuracy = evaluate(out.classifier, out.train_rates[feature_layer], out.train_labels);
  out.test_accuracy = evaluate(out.classifier, out.test_rates[feature_layer], out.test_labels);

  out.tuning = tuning_curves(out.test_rates[tuning_layer], out.test_labels);
  out.clusters = cluster_map(out.tuning, network.layer(tuning_layer).geometry, config.task.analysis.cluster_k);
  return out;
}

}  // namespace wavesnn
