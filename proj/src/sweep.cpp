#include "wavesnn/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "wavesnn/errors.hpp"
#include "wavesnn/simulation.hpp"

namespace wavesnn {

std::string to_string(WaveRegime regime) {
  switch (regime) {
    case WaveRegime::single_wave:
      return "single_wave";
    case WaveRegime::split_merge:
      return "split_merge";
    case WaveRegime::quiescent:
      return "quiescent";
    case WaveRegime::saturated:
      return "saturated";
  }
  return "quiescent";
}

RegimeSummary summarize_wave(const std::vector<WaveFrame>& frames, std::size_t warmup, std::size_t window,
                             const RegimeCriteria& criteria) {
  if (warmup >= frames.size()) throw ValidationError("summarize_wave: warm-up covers the whole run");
  RegimeSummary s;
  std::vector<double> comps;
  double sum = 0.0;
  s.min_fraction = 1.0;
  for (std::size_t k = warmup; k < frames.size(); ++k) {
    const auto& f = frames[k];
    sum += f.active_fraction;
    s.min_fraction = std::min(s.min_fraction, f.active_fraction);
    s.max_fraction = std::max(s.max_fraction, f.active_fraction);
    comps.push_back(static_cast<double>(f.component_count));
  }
  const auto n = static_cast<double>(comps.size());
  s.mean_fraction = sum / n;
  double mean_c = 0.0;
  for (double c : comps) mean_c += c;
  mean_c /= n;
  double var = 0.0;
  for (double c : comps) var += (c - mean_c) * (c - mean_c);
  s.component_stddev = std::sqrt(var / n);
  std::vector<double> sorted = comps;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  s.median_components = sorted[sorted.size() / 2];
  s.min_displacement = warmup + window <= frames.size() ? min_window_displacement(frames, warmup, window) : 0.0;

  if (s.mean_fraction < criteria.min_fraction) {
    s.regime = WaveRegime::quiescent;
  } else if (s.mean_fraction > criteria.max_fraction) {
    s.regime = WaveRegime::saturated;
  } else if (s.median_components == 1.0 && s.min_fraction >= criteria.min_fraction &&
             s.max_fraction <= criteria.max_fraction && s.component_stddev <= criteria.max_component_stddev &&
             s.min_displacement >= criteria.min_displacement) {
    s.regime = WaveRegime::single_wave;
  } else if (s.median_components > 1.0 || s.component_stddev > criteria.max_component_stddev) {
    s.regime = WaveRegime::split_merge;
  } else if (s.min_fraction < criteria.min_fraction) {
    s.regime = WaveRegime::quiescent;  // activity dies out intermittently
  } else if (s.max_fraction > criteria.max_fraction) {
    s.regime = WaveRegime::saturated;
  } else {
    s.regime = WaveRegime::split_merge;  // a single blob that does not travel
  }
  return s;
}

NetworkConfig with_parameter(const NetworkConfig& base, std::size_t layer, const std::string& name, double value) {
  NetworkConfig cfg = base;
  if (layer >= cfg.layers.size()) throw ValidationError("with_parameter: layer index out of range");
  auto& l = cfg.layers[layer];
  if (name == "r_i")
    l.kernel.r_i = value;
  else if (name == "r_o")
    l.kernel.r_o = value;
  else if (name == "a_i")
    l.kernel.a_i = value;
  else if (name == "a_o")
    l.kernel.a_o = value;
  else if (name == "tau_v")
    l.lif.tau_v = value;
  else if (name == "tau_theta")
    l.lif.tau_theta = value;
  else if (name == "theta_plus")
    l.lif.theta_plus = value;
  else if (name == "noise")
    cfg.noise.amplitude = value;
  else
    throw ValidationError("unknown sweep parameter '" + name + "'");
  return cfg;
}

SweepResult regime_sweep(const NetworkConfig& base, const std::map<std::string, std::vector<double>>& grid,
                         std::size_t layer, long steps, long warmup, long window, const RegimeCriteria& criteria) {
  if (steps <= warmup || warmup < 0 || window < 1) throw ValidationError("regime_sweep: need steps > warmup >= 0");
  std::vector<std::pair<std::string, std::vector<double>>> axes(grid.begin(), grid.end());
  std::size_t cells = 1;
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw ValidationError("regime_sweep: axis '" + name + "' has no values");
    cells *= values.size();
  }

  SweepResult out;
  for (std::size_t c = 0; c < cells; ++c) {
    NetworkConfig cfg = base;
    cfg.n_steps = steps;
    cfg.learning_enabled = false;
    std::map<std::string, double> params;
    std::size_t rem = c;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
      const double v = it->second[rem % it->second.size()];
      rem /= it->second.size();
      cfg = with_parameter(cfg, layer, it->first, v);
      params[it->first] = v;
    }
    const Network network(cfg);
    auto state = network.initial_state();
    RecordOptions opts;
    opts.probes = false;
    opts.snapshots = false;
    const auto rec = simulate(network, state, InputStream::silent(network.layer_size(0)), steps, opts);
    const auto frames = wave_metrics(rec.spikes[layer], network.layer(layer).geometry, cfg.layers[layer].kernel.r_i);
    auto summary = summarize_wave(frames, static_cast<std::size_t>(warmup), static_cast<std::size_t>(window), criteria);
    summary.params = std::move(params);
    out.cells.push_back(std::move(summary));
  }
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    if (out.cells[c].regime != WaveRegime::single_wave) continue;
    if (!out.candidate || out.cells[c].min_displacement > out.cells[*out.candidate].min_displacement)
      out.candidate = c;
  }
  return out;
}

}  // namespace wavesnn
