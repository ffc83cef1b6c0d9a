#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wavesnn/analysis.hpp"
#include "wavesnn/config.hpp"
#include "wavesnn/mnist.hpp"
#include "wavesnn/network.hpp"
#include "wavesnn/readout.hpp"

namespace wavesnn {

/// Encodes every image for layer 0 and wraps them in a hold schedule.
InputStream image_stream(const LabeledDataset& data, std::size_t layer_size, const MnistSettings& settings);

/// Streams the images through the network with learning on, one frame per
/// hold window, continuing from `state`.
void self_organize_on_images(const Network& network, NetworkState& state, const LabeledDataset& data,
                             const MnistSettings& settings);

/// Presents each image for one hold window to a network at rest carrying
/// `weights` (learning off). Thresholds start at `thresholds` (one vector per
/// layer) or at v_th when it is empty. Returns one images x neurons rate matrix per layer.
/// Presentation i uses noise steps starting at step_offset + i * hold_steps.
std::vector<Eigen::MatrixXd> present_frozen(const Network& network, const std::vector<WeightMatrix>& weights,
                                            const std::vector<Eigen::VectorXd>& thresholds,
                                            const LabeledDataset& data, const MnistSettings& settings,
                                            long step_offset);

struct MnistSplits {
  LabeledDataset train;
  LabeledDataset test;
};

/// Loads task.mnist: the first train_count training images and test_count test
/// images starting at test_offset. Paths are resolved against the config's directory.
MnistSplits load_mnist_splits(const ToolkitConfig& config);

/// Resolves a possibly negative layer index against the layer count.
std::size_t resolve_layer(int index, std::size_t layer_count);

struct MnistExperiment {
  std::vector<WeightMatrix> weights;  // after self-organization
  std::vector<Eigen::VectorXd> thresholds;  // per layer, after self-organization; empty unless carried
  long self_organization_steps = 0;
  std::vector<Eigen::MatrixXd> train_rates;
  std::vector<Eigen::MatrixXd> test_rates;
  std::vector<int> train_labels;
  std::vector<int> test_labels;
  LinearClassifier classifier;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<TuningCurve> tuning;  // units of the tuning layer, from test presentations
  ClusterMap clusters;
};

using ProgressFn = std::function<void(const char* phase, std::size_t done, std::size_t total)>;

/// Self-organize on `train`, collect frozen-weight rates on train and test,
/// fit the readout on the feature layer and compute tuning curves / cluster map.
MnistExperiment run_mnist_experiment(const ToolkitConfig& config, const LabeledDataset& train,
                                     const LabeledDataset& test, const ProgressFn& progress = {});

}  // namespace wavesnn
