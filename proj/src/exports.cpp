#include "wavesnn/exports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wavesnn/errors.hpp"

namespace wavesnn {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

double parse_double(std::string_view text, const std::string& where) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw IoError(where + ": bad number '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) throw ValidationError("format_number: non-finite value");
  if (value == 0.0) return "0";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_spikes_ndjson(const std::string& path, const SimulationRecord& record) {
  auto out = open_out(path);
  if (record.spikes.empty()) return;
  for (long k = 0; k < record.n_steps; ++k) {
    const std::string t = format_number(record.t0 + static_cast<double>(k + 1) * record.dt);
    for (std::size_t l = 0; l < record.spikes.size(); ++l)
      for (const auto n : record.spikes[l][static_cast<std::size_t>(k)])
        out << "{\"t\":" << t << ",\"layer\":" << l << ",\"neuron\":" << n << "}\n";
  }
}

std::vector<SpikeEvent> read_spikes_ndjson(const std::string& path) {
  auto in = open_in(path);
  std::vector<SpikeEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      events.push_back({j.at("t").get<double>(), j.at("layer").get<std::size_t>(), j.at("neuron").get<std::uint32_t>()});
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return events;
}

std::vector<SpikeRaster> rasters_from_events(const std::vector<SpikeEvent>& events, std::size_t layer_count,
                                             long n_steps, double dt, double t0) {
  if (!(dt > 0.0)) throw ValidationError("rasters_from_events: dt must be > 0");
  std::vector<SpikeRaster> out(layer_count, SpikeRaster(static_cast<std::size_t>(std::max(0L, n_steps))));
  for (const auto& e : events) {
    if (e.layer >= layer_count) throw DimensionError("spike event layer out of range");
    const long k = std::lround((e.t - t0) / dt) - 1;
    if (k < 0 || k >= n_steps) throw DimensionError("spike event time outside the run");
    out[e.layer][static_cast<std::size_t>(k)].push_back(e.neuron);
  }
  for (auto& raster : out)
    for (auto& step : raster) std::sort(step.begin(), step.end());
  return out;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix, long step) {
  auto out = open_out(path);
  out << "# rows=" << matrix.rows() << ",cols=" << matrix.cols() << ",step=" << step << '\n';
  std::string row;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j) row += ',';
      row += format_number(matrix(i, j));
    }
    row += '\n';
    out << row;
  }
}

MatrixFile read_matrix_csv(const std::string& path) {
  auto in = open_in(path);
  std::string header;
  std::getline(in, header);
  long rows = -1, cols = -1;
  MatrixFile file;
  if (std::sscanf(header.c_str(), "# rows=%ld,cols=%ld,step=%ld", &rows, &cols, &file.step) != 3 || rows < 0 ||
      cols < 0)
    throw IoError(path + ": bad matrix header '" + header + "'");
  file.matrix.resize(rows, cols);
  std::string line;
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw IoError(path + ": expected " + std::to_string(rows) + " rows");
    std::string_view rest(line);
    for (long j = 0; j < cols; ++j) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (j == cols - 1))
        throw IoError(path + ": row " + std::to_string(i) + " does not have " + std::to_string(cols) + " columns");
      file.matrix(i, j) = parse_double(rest.substr(0, comma), path);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
  }
  return file;
}

void write_traces_csv(const std::string& path, const SimulationRecord& record) {
  auto out = open_out(path);
  out << "t,layer,neuron,v,theta\n";
  for (const auto& p : record.probes)
    for (std::size_t k = 0; k < p.v.size(); ++k)
      out << format_number(record.t0 + static_cast<double>(k) * record.dt) << ',' << p.layer << ',' << p.neuron
          << ',' << format_number(p.v[k]) << ',' << format_number(p.theta[k]) << '\n';
}

void write_histogram_csv(const std::string& path, const PoolHistogram& histogram) {
  auto out = open_out(path);
  out << "bin_start,bin_end,count\n";
  for (std::size_t b = 0; b < histogram.counts.size(); ++b)
    out << format_number(static_cast<double>(b) * histogram.bin_width) << ','
        << format_number(static_cast<double>(b + 1) * histogram.bin_width) << ',' << histogram.counts[b] << '\n';
}

void write_tuning_csv(const std::string& path, const std::vector<TuningCurve>& curves,
                      const LayerGeometry& geometry) {
  if (curves.size() != geometry.size()) throw DimensionError("write_tuning_csv: one curve per unit expected");
  auto out = open_out(path);
  out << "unit,x,y";
  for (int c = 0; c < 10; ++c) out << ",c" << c;
  out << '\n';
  for (std::size_t u = 0; u < curves.size(); ++u) {
    out << u << ',' << format_number(geometry.positions[u][0]) << ',' << format_number(geometry.positions[u][1]);
    for (const double v : curves[u].values) out << ',' << format_number(v);
    out << '\n';
  }
}

void write_clusters_csv(const std::string& path, const ClusterMap& map) {
  auto out = open_out(path);
  out << "unit,x,y,label\n";
  for (std::size_t u = 0; u < map.labels.size(); ++u)
    out << u << ',' << format_number(map.positions[u][0]) << ',' << format_number(map.positions[u][1]) << ','
        << map.labels[u] << '\n';
}

void write_wave_ndjson(const std::string& path, std::size_t layer, const std::vector<WaveFrame>& frames) {
  auto out = open_out(path);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& f = frames[k];
    out << "{\"step\":" << k << ",\"layer\":" << layer << ",\"active_fraction\":" << format_number(f.active_fraction)
        << ",\"components\":" << f.component_count << ",\"centroid\":";
    if (f.centroid)
      out << '[' << format_number((*f.centroid)[0]) << ',' << format_number((*f.centroid)[1]) << ','
          << format_number((*f.centroid)[2]) << ']';
    else
      out << "null";
    out << "}\n";
  }
}

void write_features_csv(const std::string& path, const Eigen::MatrixXd& features, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw DimensionError("write_features_csv: one label per row expected");
  auto out = open_out(path);
  out << "label";
  for (Eigen::Index j = 0; j < features.cols(); ++j) out << ",f" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out << labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < features.cols(); ++j) out << ',' << format_number(features(i, j));
    out << '\n';
  }
}

}  // namespace wavesnn
