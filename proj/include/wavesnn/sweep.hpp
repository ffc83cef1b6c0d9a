#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavesnn/analysis.hpp"
#include "wavesnn/network.hpp"

namespace wavesnn {

enum class WaveRegime { single_wave, split_merge, quiescent, saturated };

std::string to_string(WaveRegime regime);

/// Thresholds that turn time-averaged wave metrics into a regime label.
struct RegimeCriteria {
  double min_fraction = 0.01;
  double max_fraction = 0.30;
  /// Component-count standard deviation above which waves count as splitting/merging.
  double max_component_stddev = 0.5;
  /// Minimum centroid travel within every window for a single wave.
  double min_displacement = 5.0;
};

struct RegimeSummary {
  std::map<std::string, double> params;
  WaveRegime regime = WaveRegime::quiescent;
  double mean_fraction = 0.0;
  double min_fraction = 0.0;
  double max_fraction = 0.0;
  double median_components = 0.0;
  double component_stddev = 0.0;
  double min_displacement = 0.0;
};

/// Summarizes post-warm-up frames and assigns a regime.
RegimeSummary summarize_wave(const std::vector<WaveFrame>& frames, std::size_t warmup, std::size_t window,
                             const RegimeCriteria& criteria = {});

/// Copy of `base` with one named parameter of `layer` replaced.
/// Names: r_i r_o a_i a_o tau_v tau_theta theta_plus noise.
NetworkConfig with_parameter(const NetworkConfig& base, std::size_t layer, const std::string& name, double value);

struct SweepResult {
  std::vector<RegimeSummary> cells;
  /// Index of the single-wave cell with the largest minimum window displacement.
  std::optional<std::size_t> candidate;
};

/// Runs every cell of the Cartesian grid for `steps` steps from a resting
/// state and classifies the wave regime of `layer`.
SweepResult regime_sweep(const NetworkConfig& base, const std::map<std::string, std::vector<double>>& grid,
                         std::size_t layer, long steps, long warmup, long window,
                         const RegimeCriteria& criteria = {});

}  // namespace wavesnn
