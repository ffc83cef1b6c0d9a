#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavesnn/plasticity.hpp"
#include "wavesnn/simulation.hpp"
#include "wavesnn/topology.hpp"

namespace wavesnn {

using SpikeRaster = std::vector<std::vector<std::uint32_t>>;  // per step, ascending neuron indices

/// Per-neuron spike rates of `layer` over steps [first_step, end_step) of the
/// record: spike count divided by the window length in sim-time.
Eigen::VectorXd extract_features(const SimulationRecord& record, std::size_t layer, long first_step, long end_step);

/// Whole-record variant.
Eigen::VectorXd extract_features(const SimulationRecord& record, std::size_t layer);

struct TuningCurve {
  std::array<double, 10> values{};  // max-normalized per-class mean intensity
};

/// Mean response of one unit per class, scaled so the largest class mean is 1.
/// `responses` holds the unit's intensity for each test presentation.
TuningCurve tuning_curve(const std::vector<double>& responses, const std::vector<int>& labels,
                         int n_classes = 10);

/// Tuning curves of every unit from a presentations x units response matrix.
std::vector<TuningCurve> tuning_curves(const Eigen::MatrixXd& responses, const std::vector<int>& labels);

struct PoolHistogram {
  double bin_width = 1.0;
  std::vector<std::size_t> pool_sizes;  // per post-neuron
  std::vector<std::size_t> counts;      // counts[b] = units with size in [b*bin_width, (b+1)*bin_width)

  std::size_t total() const;
  std::size_t modal_bin() const;
  double modal_fraction() const;
};

/// Counts, for every post-neuron, the presynaptic entries above `threshold`,
/// and bins the counts with the given width (in connections).
PoolHistogram pool_histogram(const WeightMatrix& weights, double threshold, std::size_t bin_width = 1);

/// Spatial spread of a unit's above-threshold connections: RMS distance of the
/// connected presynaptic positions about their centroid. Empty when the unit
/// has no connection above threshold.
std::optional<double> pool_rms_radius(const WeightMatrix& weights, std::size_t post, double threshold,
                                      const LayerGeometry& pre_geometry);

constexpr int kUnresponsive = -1;

struct ClusterMap {
  std::vector<int> labels;        // argmax class per unit, kUnresponsive for all-zero curves
  std::vector<Point> positions;
  std::optional<double> coherence;  // absent when fewer than two responsive units
};

/// Mean, over responsive units, of the fraction of each unit's k nearest
/// responsive neighbours sharing its label. Absent with fewer than 2 responsive units.
std::optional<double> spatial_coherence(const std::vector<int>& labels, const LayerGeometry& geometry,
                                        std::size_t k = 8);

ClusterMap cluster_map(const std::vector<TuningCurve>& curves, const LayerGeometry& geometry, std::size_t k = 8);

struct CoherenceBaseline {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Monte-Carlo distribution of the coherence score when the responsive units'
/// labels are randomly permuted over the same positions.
CoherenceBaseline coherence_baseline(const std::vector<int>& labels, const LayerGeometry& geometry,
                                     std::size_t trials, std::uint64_t seed, std::size_t k = 8);

struct WaveFrame {
  double active_fraction = 0.0;
  std::optional<Point> centroid;
  std::size_t component_count = 0;
};

/// Per-step activity metrics; components are connected sets of spiking
/// neurons under the graph D < link_radius.
std::vector<WaveFrame> wave_metrics(const SpikeRaster& raster, const LayerGeometry& geometry, double link_radius);

/// Connected components among `active` neurons under D < link_radius.
std::size_t component_count(const std::vector<std::uint32_t>& active, const LayerGeometry& geometry,
                            double link_radius);

/// Largest distance between the centroid at the start of the window and any
/// centroid inside it, for windows starting at every step in [begin, end - window].
/// Returns the minimum over windows (0 when a window has no centroids).
double min_window_displacement(const std::vector<WaveFrame>& frames, std::size_t begin, std::size_t window);

}  // namespace wavesnn
