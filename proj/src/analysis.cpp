#include "wavesnn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wavesnn/errors.hpp"

namespace wavesnn {

namespace {

double sq_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::vector<std::size_t> parent;
};

}  // namespace

Eigen::VectorXd extract_features(const SimulationRecord& record, std::size_t layer, long first_step, long end_step) {
  if (layer >= record.spikes.size()) throw ValidationError("extract_features: layer not recorded");
  if (first_step < 0 || end_step > record.n_steps || end_step <= first_step)
    throw ValidationError("extract_features: empty or out-of-range window");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(record.layer_sizes.at(layer)));
  for (long k = first_step; k < end_step; ++k)
    for (const auto i : record.spikes[layer][static_cast<std::size_t>(k)]) counts[i] += 1.0;
  return counts / (static_cast<double>(end_step - first_step) * record.dt);
}

Eigen::VectorXd extract_features(const SimulationRecord& record, std::size_t layer) {
  return extract_features(record, layer, 0, record.n_steps);
}

TuningCurve tuning_curve(const std::vector<double>& responses, const std::vector<int>& labels, int n_classes) {
  if (responses.size() != labels.size()) throw DimensionError("tuning_curve: responses and labels differ in length");
  if (n_classes < 1 || n_classes > 10) throw ValidationError("tuning_curve: n_classes must be in [1, 10]");
  std::array<double, 10> sum{};
  std::array<std::size_t, 10> count{};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= n_classes) throw ValidationError("tuning_curve: label out of range");
    sum[static_cast<std::size_t>(c)] += responses[i];
    ++count[static_cast<std::size_t>(c)];
  }
  TuningCurve curve;
  for (int c = 0; c < n_classes; ++c) {
    if (count[static_cast<std::size_t>(c)] == 0)
      throw ValidationError("tuning_curve: class " + std::to_string(c) + " absent from the test set");
    curve.values[static_cast<std::size_t>(c)] = sum[static_cast<std::size_t>(c)] /
                                                static_cast<double>(count[static_cast<std::size_t>(c)]);
  }
  const double top = *std::max_element(curve.values.begin(), curve.values.end());
  if (top > 0.0)
    for (auto& v : curve.values) v /= top;
  return curve;
}

std::vector<TuningCurve> tuning_curves(const Eigen::MatrixXd& responses, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(responses.rows()) != labels.size())
    throw DimensionError("tuning_curves: one row per presentation expected");
  std::vector<TuningCurve> out;
  out.reserve(static_cast<std::size_t>(responses.cols()));
  std::vector<double> column(labels.size());
  for (Eigen::Index u = 0; u < responses.cols(); ++u) {
    for (Eigen::Index r = 0; r < responses.rows(); ++r) column[static_cast<std::size_t>(r)] = responses(r, u);
    out.push_back(tuning_curve(column, labels));
  }
  return out;
}

std::size_t PoolHistogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t PoolHistogram::modal_bin() const {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double PoolHistogram::modal_fraction() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(counts[modal_bin()]) / static_cast<double>(n);
}

PoolHistogram pool_histogram(const WeightMatrix& weights, double threshold, std::size_t bin_width) {
  if (bin_width == 0) throw ValidationError("pool_histogram: bin width must be >= 1");
  PoolHistogram h;
  h.bin_width = static_cast<double>(bin_width);
  const auto& w = weights.w;
  h.counts.assign(static_cast<std::size_t>(w.cols()) / bin_width + 1, 0);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    std::size_t size = 0;
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (w(i, j) > threshold) ++size;
    h.pool_sizes.push_back(size);
    ++h.counts[size / bin_width];
  }
  return h;
}

std::optional<double> pool_rms_radius(const WeightMatrix& weights, std::size_t post, double threshold,
                                      const LayerGeometry& pre_geometry) {
  if (pre_geometry.size() != weights.n_pre()) throw DimensionError("pool_rms_radius: geometry does not match W");
  std::vector<std::size_t> members;
  Point c{0, 0, 0};
  for (Eigen::Index j = 0; j < weights.w.cols(); ++j) {
    if (weights.w(static_cast<Eigen::Index>(post), j) > threshold) {
      members.push_back(static_cast<std::size_t>(j));
      for (int a = 0; a < 3; ++a) c[a] += pre_geometry.positions[static_cast<std::size_t>(j)][a];
    }
  }
  if (members.empty()) return std::nullopt;
  for (auto& x : c) x /= static_cast<double>(members.size());
  double ss = 0.0;
  for (const auto j : members) ss += sq_distance(pre_geometry.positions[j], c);
  return std::sqrt(ss / static_cast<double>(members.size()));
}

std::optional<double> spatial_coherence(const std::vector<int>& labels, const LayerGeometry& geometry,
                                        std::size_t k) {
  if (labels.size() != geometry.size()) throw DimensionError("spatial_coherence: one label per unit expected");
  std::vector<std::size_t> responsive;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kUnresponsive) responsive.push_back(i);
  if (responsive.size() < 2 || k == 0) return std::nullopt;
  const std::size_t kk = std::min(k, responsive.size() - 1);

  double total = 0.0;
  std::vector<std::pair<double, std::size_t>> dist;
  for (const auto i : responsive) {
    dist.clear();
    for (const auto j : responsive)
      if (j != i) dist.emplace_back(sq_distance(geometry.positions[i], geometry.positions[j]), j);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    std::size_t same = 0;
    for (std::size_t r = 0; r < kk; ++r)
      if (labels[dist[r].second] == labels[i]) ++same;
    total += static_cast<double>(same) / static_cast<double>(kk);
  }
  return total / static_cast<double>(responsive.size());
}

ClusterMap cluster_map(const std::vector<TuningCurve>& curves, const LayerGeometry& geometry, std::size_t k) {
  if (curves.size() != geometry.size()) throw DimensionError("cluster_map: one tuning curve per unit expected");
  ClusterMap map;
  map.positions = geometry.positions;
  for (const auto& curve : curves) {
    const auto top = std::max_element(curve.values.begin(), curve.values.end());
    map.labels.push_back(*top > 0.0 ? static_cast<int>(top - curve.values.begin()) : kUnresponsive);
  }
  map.coherence = spatial_coherence(map.labels, geometry, k);
  return map;
}

CoherenceBaseline coherence_baseline(const std::vector<int>& labels, const LayerGeometry& geometry,
                                     std::size_t trials, std::uint64_t seed, std::size_t k) {
  std::vector<std::size_t> responsive;
  std::vector<int> pool;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kUnresponsive) {
      responsive.push_back(i);
      pool.push_back(labels[i]);
    }
  CoherenceBaseline out;
  if (responsive.size() < 2 || trials < 2) return out;
  std::mt19937_64 rng(seed);
  std::vector<double> scores;
  std::vector<int> shuffled = labels;
  for (std::size_t t = 0; t < trials; ++t) {
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t r = 0; r < responsive.size(); ++r) shuffled[responsive[r]] = pool[r];
    scores.push_back(*spatial_coherence(shuffled, geometry, k));
  }
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  out.mean = mean;
  out.stddev = std::sqrt(var / static_cast<double>(scores.size() - 1));
  return out;
}

std::size_t component_count(const std::vector<std::uint32_t>& active, const LayerGeometry& geometry,
                             double link_radius) {
  const double r2 = link_radius * link_radius;
  DisjointSets sets(active.size());
  std::size_t components = active.size();
  for (std::size_t a = 0; a < active.size(); ++a)
    for (std::size_t b = a + 1; b < active.size(); ++b)
      if (sq_distance(geometry.positions[active[a]], geometry.positions[active[b]]) < r2 && sets.unite(a, b))
        --components;
  return components;
}

std::vector<WaveFrame> wave_metrics(const SpikeRaster& raster, const LayerGeometry& geometry, double link_radius) {
  if (raster.empty()) throw ValidationError("wave_metrics: raster is empty");
  std::vector<WaveFrame> frames;
  frames.reserve(raster.size());
  const double n = static_cast<double>(geometry.size());
  for (const auto& active : raster) {
    WaveFrame f;
    f.active_fraction = static_cast<double>(active.size()) / n;
    if (!active.empty()) {
      Point c{0, 0, 0};
      for (const auto i : active)
        for (int a = 0; a < 3; ++a) c[a] += geometry.positions.at(i)[a];
      for (auto& x : c) x /= static_cast<double>(active.size());
      f.centroid = c;
    }
    f.component_count = component_count(active, geometry, link_radius);
    frames.push_back(f);
  }
  return frames;
}

double min_window_displacement(const std::vector<WaveFrame>& frames, std::size_t begin, std::size_t window) {
  if (window == 0 || begin + window > frames.size()) throw ValidationError("min_window_displacement: bad window");
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t s = begin; s + window <= frames.size(); ++s) {
    std::optional<Point> origin;
    double reach = 0.0;
    for (std::size_t t = s; t < s + window; ++t) {
      if (!frames[t].centroid) continue;
      if (!origin) {
        origin = frames[t].centroid;
        continue;
      }
      reach = std::max(reach, std::sqrt(sq_distance(*origin, *frames[t].centroid)));
    }
    worst = std::min(worst, reach);
  }
  return worst;
}

}  // namespace wavesnn
