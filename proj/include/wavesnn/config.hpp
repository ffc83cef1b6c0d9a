#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavesnn/network.hpp"
#include "wavesnn/readout.hpp"

namespace wavesnn {

struct MnistSettings {
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::size_t train_count = 2000;
  std::size_t test_count = 1000;
  /// Offset into the test files (lets train and test share one file pair).
  std::size_t test_offset = 0;
  double gain = 1.0;
  double hold = 5.0;
  double gap = 0.0;
  /// Layer whose rates feed the readout; negative counts from the end.
  int feature_layer = -1;
  /// Layer whose units get tuning curves and the cluster map.
  int tuning_layer = 1;
  /// Start frozen presentations from the thresholds reached during
  /// self-organization instead of v_th.
  bool carry_thresholds = true;
};

struct AnalysisSettings {
  /// Pool threshold as a fraction of w_max.
  double pool_threshold_fraction = 0.5;
  std::size_t pool_bin_width = 1;
  std::size_t cluster_k = 8;
  /// Component link radius for wave metrics; 0 uses the layer's r_i.
  double link_radius = 0.0;
  long warmup = 200;
};

struct SweepSettings {
  int layer = 0;
  long steps = 2000;
  long warmup = 200;
  long window = 500;
  /// Parameter name -> values; names: r_i r_o a_i a_o tau_v tau_theta theta_plus noise.
  std::map<std::string, std::vector<double>> grid;
};

/// External input for simulate / selforganize.
enum class InputSource { silent, mnist };

struct TaskSettings {
  InputSource input = InputSource::silent;
  MnistSettings mnist;
  ReadoutHyper readout;
  AnalysisSettings analysis;
  SweepSettings sweep;
};

struct ToolkitConfig {
  NetworkConfig network;
  TaskSettings task;
  /// Directory relative paths are resolved against (not serialized).
  std::filesystem::path base_dir;

  /// Path as written in the config, resolved against base_dir.
  std::string resolve(const std::string& path) const;
  /// Network config with file paths resolved.
  NetworkConfig resolved_network() const;
};

ToolkitConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
ToolkitConfig parse_config_file(const std::string& path);
ToolkitConfig config_from_json(const nlohmann::json& j, const std::string& source = "<config>");

nlohmann::json to_json(const ToolkitConfig& config);
/// Canonical form: sorted keys, two-space indent.
std::string serialize_config(const ToolkitConfig& config);
/// FNV-1a 64 of the canonical compact serialization, as 16 hex digits.
std::string config_hash(const ToolkitConfig& config);

/// Markdown reference of every key with its default value.
std::string config_reference();

/// Toolkit version string recorded in run manifests.
std::string toolkit_version();

}  // namespace wavesnn
