#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavesnn/analysis.hpp"
#include "wavesnn/simulation.hpp"

namespace wavesnn {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// One JSON object per line: {"t":..,"layer":..,"neuron":..}, ordered by step,
/// then layer, then neuron. t is the end of the step the spike was detected in.
void write_spikes_ndjson(const std::string& path, const SimulationRecord& record);

struct SpikeEvent {
  double t = 0.0;
  std::size_t layer = 0;
  std::uint32_t neuron = 0;
};

std::vector<SpikeEvent> read_spikes_ndjson(const std::string& path);

/// Rebuilds per-step rasters (spike at t lands in step round((t - t0) / dt) - 1).
std::vector<SpikeRaster> rasters_from_events(const std::vector<SpikeEvent>& events,
                                             std::size_t layer_count, long n_steps, double dt, double t0 = 0.0);

/// Header line "# rows=R,cols=C,step=S" followed by R comma-separated rows.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix, long step);

struct MatrixFile {
  Eigen::MatrixXd matrix;
  long step = 0;
};

MatrixFile read_matrix_csv(const std::string& path);

/// Columns t,layer,neuron,v,theta; one row per probe per time level.
void write_traces_csv(const std::string& path, const SimulationRecord& record);

/// Columns bin_start,bin_end,count.
void write_histogram_csv(const std::string& path, const PoolHistogram& histogram);

/// Columns unit,x,y,c0..c9.
void write_tuning_csv(const std::string& path, const std::vector<TuningCurve>& curves,
                      const LayerGeometry& geometry);

/// Columns unit,x,y,label (label -1 marks an unresponsive unit).
void write_clusters_csv(const std::string& path, const ClusterMap& map);

/// One line per step: {"step","layer","active_fraction","components","centroid":[x,y,z]|null}.
void write_wave_ndjson(const std::string& path, std::size_t layer, const std::vector<WaveFrame>& frames);

/// Rows of features, first column the label.
void write_features_csv(const std::string& path, const Eigen::MatrixXd& features, const std::vector<int>& labels);

}  // namespace wavesnn
