// wavesnn command-line tool.
//
//   wavesnn <command> --config FILE [--seed N] [--out DIR] [--snapshot-every N]
//
// Every command writes manifest.json into --out listing the files it produced.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavesnn/analysis.hpp"
#include "wavesnn/config.hpp"
#include "wavesnn/errors.hpp"
#include "wavesnn/exports.hpp"
#include "wavesnn/pipeline.hpp"
#include "wavesnn/readout.hpp"
#include "wavesnn/simulation.hpp"
#include "wavesnn/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wavesnn;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<long> snapshot_every;
  bool no_spikes = false;
  std::string from;  // evaluate / analyze: directory of an earlier run
};

class Run {
 public:
  Run(std::string command, const Options& opts) : command_(std::move(command)), out_(opts.out) {
    config_ = parse_config_file(opts.config_path);
    if (opts.seed) config_.network.seed = *opts.seed;
    if (opts.snapshot_every) config_.network.snapshot_every = *opts.snapshot_every;
    config_.network.validate();
    config_file_ = fs::absolute(opts.config_path).lexically_normal().string();
    fs::create_directories(out_);
  }

  ToolkitConfig& config() { return config_; }
  std::string path(const std::string& name) const { return (out_ / name).string(); }
  void add(const std::string& name) { artifacts_.push_back(name); }
  void set_time(double start, double end) {
    t_start_ = start;
    t_end_ = end;
  }

  void finish() const {
    json j;
    j["command"] = command_;
    j["config"] = config_file_;
    j["config_hash"] = config_hash(config_);
    j["seed"] = config_.network.seed;
    j["sim_time"] = {{"start", t_start_}, {"end", t_end_}};
    j["artifacts"] = artifacts_;
    j["version"] = toolkit_version();
    std::ofstream(path("manifest.json")) << j.dump(2) << '\n';
    std::cerr << command_ << ": wrote " << artifacts_.size() << " artifacts to " << out_.string() << "\n";
  }

 private:
  std::string command_;
  fs::path out_;
  ToolkitConfig config_;
  std::string config_file_;
  std::vector<std::string> artifacts_;
  double t_start_ = 0.0;
  double t_end_ = 0.0;
};

std::string snapshot_name(std::size_t matrix, long step) {
  return "weights_m" + std::to_string(matrix) + "_step" + std::to_string(step) + ".csv";
}

InputStream input_for(const ToolkitConfig& cfg, const Network& network) {
  if (cfg.task.input == InputSource::silent) return InputStream::silent(network.layer_size(0));
  const auto data = load_mnist_splits(cfg).train;
  return image_stream(data, network.layer_size(0), cfg.task.mnist);
}

// Shared body of simulate and selforganize. Snapshots go straight to disk so
// long runs do not hold every matrix in memory.
void run_network(Run& run, const Options& opts, bool learning) {
  const auto& cfg = run.config();
  const Network network(cfg.resolved_network());
  const auto stream = input_for(cfg, network);
  const long n_steps = cfg.task.input == InputSource::mnist ? stream.total_steps(cfg.network.dt) : cfg.network.n_steps;
  auto state = network.initial_state();

  const long every = cfg.network.snapshot_every;
  auto write_snapshots = [&](long step) {
    for (std::size_t m = 0; m < state.weights.size(); ++m) {
      const auto name = snapshot_name(m, step);
      write_matrix_csv(run.path(name), state.weights[m].w, step);
      run.add(name);
    }
  };
  write_snapshots(0);
  long last_snapshot = 0;
  const long start = state.step;
  const StepObserver observer = [&](const NetworkState& s, const StepResult&) {
    const long k = s.step - start;
    if (every > 0 && k % every == 0) {
      write_snapshots(k);
      last_snapshot = k;
    }
  };

  RecordOptions rec_opts;
  rec_opts.spikes = !opts.no_spikes;
  rec_opts.snapshots = false;
  StepOptions step_opts;
  step_opts.learning = learning;
  const auto record = simulate(network, state, stream, n_steps, rec_opts, step_opts, observer);
  if (learning && last_snapshot != n_steps) write_snapshots(n_steps);

  run.set_time(record.t0, state.t);
  if (n_steps == 0) return;
  if (rec_opts.spikes) {
    write_spikes_ndjson(run.path("spikes.ndjson"), record);
    run.add("spikes.ndjson");
  }
  write_traces_csv(run.path("traces.csv"), record);
  run.add("traces.csv");
  if (learning) {
    for (std::size_t l = 0; l < state.layers.size(); ++l) {
      const auto name = "thresholds_l" + std::to_string(l) + ".csv";
      write_matrix_csv(run.path(name), state.layers[l].theta.transpose(), n_steps);
      run.add(name);
    }
  }
}

int cmd_simulate(const Options& opts, bool learning) {
  Run run(learning ? "selforganize" : "simulate", opts);
  run_network(run, opts, learning);
  run.finish();
  return 0;
}

std::vector<WeightMatrix> load_weights(const fs::path& dir, const Network& network, long step) {
  std::vector<WeightMatrix> weights;
  for (std::size_t m = 0; m + 1 < network.layer_count(); ++m) {
    const auto file = dir / snapshot_name(m, step);
    if (!fs::exists(file)) throw MissingArtifactError("missing artifact: weight matrix " + file.string());
    WeightMatrix w;
    w.w = read_matrix_csv(file.string()).matrix;
    w.pre_layer = static_cast<int>(m);
    w.post_layer = static_cast<int>(m + 1);
    weights.push_back(std::move(w));
  }
  return weights;
}

std::vector<Eigen::VectorXd> load_thresholds(const fs::path& dir, const Network& network) {
  std::vector<Eigen::VectorXd> out;
  for (std::size_t l = 0; l < network.layer_count(); ++l) {
    const auto file = dir / ("thresholds_l" + std::to_string(l) + ".csv");
    if (!fs::exists(file)) throw MissingArtifactError("missing artifact: thresholds " + file.string());
    out.push_back(read_matrix_csv(file.string()).matrix.row(0).transpose());
  }
  return out;
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw MissingArtifactError("missing artifact: " + file.string());
  return json::parse(in);
}

void write_rates(Run& run, const std::string& prefix, const std::vector<Eigen::MatrixXd>& rates,
                 const std::vector<int>& labels) {
  for (std::size_t l = 0; l < rates.size(); ++l) {
    const auto name = prefix + "_rates_l" + std::to_string(l) + ".csv";
    write_features_csv(run.path(name), rates[l], labels);
    run.add(name);
  }
}

int cmd_train_readout(const Options& opts) {
  Run run("train-readout", opts);
  const auto& cfg = run.config();
  const auto data = load_mnist_splits(cfg);
  const auto progress = [](const char* phase, std::size_t, std::size_t total) {
    std::cerr << "train-readout: " << phase << " (" << total << " images)\n";
  };
  const auto ex = run_mnist_experiment(cfg, data.train, data.test, progress);
  const Network network(cfg.resolved_network());
  const long steps = ex.self_organization_steps;

  for (std::size_t m = 0; m < ex.weights.size(); ++m) {
    const auto name = snapshot_name(m, steps);
    write_matrix_csv(run.path(name), ex.weights[m].w, steps);
    run.add(name);
  }
  for (std::size_t l = 0; l < ex.thresholds.size(); ++l) {
    const auto name = "thresholds_l" + std::to_string(l) + ".csv";
    write_matrix_csv(run.path(name), ex.thresholds[l].transpose(), steps);
    run.add(name);
  }
  std::ofstream(run.path("classifier.json")) << ex.classifier.to_json();
  run.add("classifier.json");
  write_rates(run, "train", ex.train_rates, ex.train_labels);
  write_rates(run, "test", ex.test_rates, ex.test_labels);

  const auto tuning_layer = resolve_layer(cfg.task.mnist.tuning_layer, network.layer_count());
  const auto& geo = network.layer(tuning_layer).geometry;
  write_tuning_csv(run.path("tuning.csv"), ex.tuning, geo);
  run.add("tuning.csv");
  write_clusters_csv(run.path("clusters.csv"), ex.clusters);
  run.add("clusters.csv");

  const auto base = coherence_baseline(ex.clusters.labels, geo, 200, cfg.network.seed, cfg.task.analysis.cluster_k);
  json metrics = {{"train_accuracy", ex.train_accuracy},
                  {"test_accuracy", ex.test_accuracy},
                  {"train_images", data.train.size()},
                  {"test_images", data.test.size()},
                  {"steps", steps},
                  {"weights_step", steps},
                  {"coherence", ex.clusters.coherence ? json(*ex.clusters.coherence) : json(nullptr)},
                  {"coherence_baseline", {{"mean", base.mean}, {"stddev", base.stddev}}}};
  std::ofstream(run.path("metrics.json")) << metrics.dump(2) << '\n';
  run.add("metrics.json");
  std::cerr << "train-readout: train accuracy " << ex.train_accuracy << ", test accuracy " << ex.test_accuracy << "\n";
  run.set_time(0.0, static_cast<double>(steps) * cfg.network.dt);
  run.finish();
  return 0;
}

int cmd_evaluate(const Options& opts) {
  const fs::path from = opts.from.empty() ? fs::path(opts.out) : fs::path(opts.from);
  if (!fs::exists(from / "classifier.json"))
    throw MissingArtifactError("missing artifact: no trained classifier at " + (from / "classifier.json").string() +
                               " (run train-readout first)");
  Run run("evaluate", opts);
  const auto& cfg = run.config();
  std::ifstream in(from / "classifier.json");
  std::stringstream text;
  text << in.rdbuf();
  const auto classifier = LinearClassifier::from_json(text.str());
  const long step = read_json(from / "metrics.json").at("weights_step").get<long>();

  const Network network(cfg.resolved_network());
  const auto weights = load_weights(from, network, step);
  std::vector<Eigen::VectorXd> thresholds;
  if (cfg.task.mnist.carry_thresholds) thresholds = load_thresholds(from, network);
  const auto test = load_mnist_splits(cfg).test;
  // Same noise steps as the test presentations of train-readout.
  const long offset = step + steps_for(cfg.task.mnist.hold, cfg.network.dt) * static_cast<long>(cfg.task.mnist.train_count);
  const auto rates = present_frozen(network, weights, thresholds, test, cfg.task.mnist, offset);
  const auto layer = resolve_layer(cfg.task.mnist.feature_layer, network.layer_count());
  const double accuracy = evaluate(classifier, rates[layer], test.labels);

  write_rates(run, "eval", rates, test.labels);
  std::ofstream(run.path("evaluation.json"))
      << json{{"accuracy", accuracy}, {"images", test.size()}, {"feature_layer", layer}}.dump(2) << '\n';
  run.add("evaluation.json");
  std::cerr << "evaluate: accuracy " << accuracy << "\n";
  run.finish();
  return 0;
}

int cmd_analyze(const Options& opts) {
  const fs::path from = opts.from.empty() ? fs::path(opts.out) : fs::path(opts.from);
  const auto manifest = read_json(from / "manifest.json");
  Run run("analyze", opts);
  const auto& cfg = run.config();
  const Network network(cfg.resolved_network());
  const auto& a = cfg.task.analysis;
  json summary = json::object();

  const auto files = manifest.at("artifacts").get<std::vector<std::string>>();
  auto has = [&](const std::string& name) { return std::find(files.begin(), files.end(), name) != files.end(); };

  if (has("spikes.ndjson")) {
    const double t0 = manifest.at("sim_time").at("start").get<double>();
    const double t1 = manifest.at("sim_time").at("end").get<double>();
    const long n_steps = std::lround((t1 - t0) / cfg.network.dt);
    const auto rasters = rasters_from_events(read_spikes_ndjson((from / "spikes.ndjson").string()),
                                             network.layer_count(), n_steps, cfg.network.dt, t0);
    json layers = json::array();
    for (std::size_t l = 0; l < network.layer_count(); ++l) {
      const double radius = a.link_radius > 0.0 ? a.link_radius : cfg.network.layers[l].kernel.r_i;
      const auto frames = wave_metrics(rasters[l], network.layer(l).geometry, radius);
      const auto name = "wave_l" + std::to_string(l) + ".ndjson";
      write_wave_ndjson(run.path(name), l, frames);
      run.add(name);
      json entry = {{"layer", l}};
      if (static_cast<long>(frames.size()) > a.warmup) {
        const auto window = std::min<std::size_t>(cfg.task.sweep.window, frames.size() - static_cast<std::size_t>(a.warmup));
        const auto s = summarize_wave(frames, static_cast<std::size_t>(a.warmup), window);
        entry.update({{"regime", to_string(s.regime)},
                      {"mean_fraction", s.mean_fraction},
                      {"min_fraction", s.min_fraction},
                      {"max_fraction", s.max_fraction},
                      {"median_components", s.median_components},
                      {"min_displacement", s.min_displacement}});
      }
      layers.push_back(entry);
    }
    summary["waves"] = layers;
  }

  // Latest weight snapshot of every matrix.
  json pools = json::array();
  for (std::size_t m = 0; m + 1 < network.layer_count(); ++m) {
    long best = -1;
    const std::string prefix = "weights_m" + std::to_string(m) + "_step";
    for (const auto& f : files)
      if (f.rfind(prefix, 0) == 0) best = std::max(best, std::stol(f.substr(prefix.size())));
    if (best < 0) continue;
    WeightMatrix w;
    w.w = read_matrix_csv((from / snapshot_name(m, best)).string()).matrix;
    const double threshold = a.pool_threshold_fraction * cfg.network.plasticity.w_max;
    const auto hist = pool_histogram(w, threshold, a.pool_bin_width);
    const auto hname = "pool_histogram_m" + std::to_string(m) + ".csv";
    write_histogram_csv(run.path(hname), hist);
    run.add(hname);

    const auto& pre_geo = network.layer(m).geometry;
    const double limit = 1.5 * cfg.network.layers[m].kernel.r_i;
    std::size_t localized = 0;
    const auto rname = "pool_radius_m" + std::to_string(m) + ".csv";
    std::ofstream rout(run.path(rname));
    rout << "unit,pool_size,rms_radius\n";
    for (std::size_t u = 0; u < hist.pool_sizes.size(); ++u) {
      const auto r = pool_rms_radius(w, u, threshold, pre_geo);
      if (r && *r <= limit) ++localized;
      rout << u << ',' << hist.pool_sizes[u] << ',' << (r ? format_number(*r) : std::string()) << '\n';
    }
    run.add(rname);
    pools.push_back({{"matrix", m},
                     {"step", best},
                     {"threshold", threshold},
                     {"modal_bin", hist.modal_bin()},
                     {"modal_fraction", hist.modal_fraction()},
                     {"localized_fraction", static_cast<double>(localized) / static_cast<double>(hist.total())},
                     {"localized_limit", limit}});
  }
  summary["pools"] = pools;

  const auto tuning_layer = resolve_layer(cfg.task.mnist.tuning_layer, network.layer_count());
  const auto test_rates = "test_rates_l" + std::to_string(tuning_layer) + ".csv";
  if (has(test_rates)) {
    std::ifstream in(from / test_rates);
    std::string line;
    std::getline(in, line);
    std::vector<int> labels;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      labels.push_back(std::stoi(cell));
      rows.emplace_back();
      while (std::getline(ss, cell, ',')) rows.back().push_back(std::stod(cell));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    const auto curves = tuning_curves(m, labels);
    const auto& geo = network.layer(tuning_layer).geometry;
    const auto map = cluster_map(curves, geo, a.cluster_k);
    write_tuning_csv(run.path("tuning.csv"), curves, geo);
    run.add("tuning.csv");
    write_clusters_csv(run.path("clusters.csv"), map);
    run.add("clusters.csv");
    const auto base = coherence_baseline(map.labels, geo, 200, cfg.network.seed, a.cluster_k);
    summary["clusters"] = {{"coherence", map.coherence ? json(*map.coherence) : json(nullptr)},
                           {"baseline_mean", base.mean},
                           {"baseline_stddev", base.stddev}};
  }

  std::ofstream(run.path("analysis.json")) << summary.dump(2) << '\n';
  run.add("analysis.json");
  run.set_time(manifest.at("sim_time").at("start").get<double>(), manifest.at("sim_time").at("end").get<double>());
  run.finish();
  return 0;
}

int cmd_sweep(const Options& opts) {
  Run run("sweep", opts);
  const auto& cfg = run.config();
  const auto& s = cfg.task.sweep;
  if (s.grid.empty()) throw ValidationError("task.sweep.grid: at least one axis is required");
  const auto result = regime_sweep(cfg.resolved_network(), s.grid, static_cast<std::size_t>(s.layer), s.steps,
                                   s.warmup, s.window);
  std::ofstream out(run.path("sweep.csv"));
  for (const auto& [name, values] : s.grid) out << name << ',';
  out << "regime,mean_fraction,min_fraction,max_fraction,median_components,component_stddev,min_displacement\n";
  for (const auto& c : result.cells) {
    for (const auto& [name, v] : c.params) out << format_number(v) << ',';
    out << to_string(c.regime) << ',' << format_number(c.mean_fraction) << ',' << format_number(c.min_fraction) << ','
        << format_number(c.max_fraction) << ',' << format_number(c.median_components) << ','
        << format_number(c.component_stddev) << ',' << format_number(c.min_displacement) << '\n';
  }
  run.add("sweep.csv");
  json cand = nullptr;
  if (result.candidate) cand = result.cells[*result.candidate].params;
  std::ofstream(run.path("sweep.json")) << json{{"candidate", cand}, {"cells", result.cells.size()}}.dump(2) << '\n';
  run.add("sweep.json");
  std::cerr << "sweep: " << result.cells.size() << " cells, "
            << (result.candidate ? "candidate found" : "no single-wave cell") << "\n";
  run.set_time(0.0, static_cast<double>(s.steps) * cfg.network.dt);
  run.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave-driven self-organizing spiking networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", toolkit_version());
  Options opts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "Override run.seed");
    cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
    cmd->add_option("--snapshot-every", opts.snapshot_every, "Override run.snapshot_every (steps)");
  };
  auto* simulate = app.add_subcommand("simulate", "Run the network with learning off");
  auto* selforg = app.add_subcommand("selforganize", "Run the network with learning on and write weight snapshots");
  auto* train = app.add_subcommand("train-readout", "Self-organize on MNIST and fit the linear readout");
  auto* eval = app.add_subcommand("evaluate", "Score a trained readout on the test images");
  auto* analyze = app.add_subcommand("analyze", "Wave, pool and cluster metrics from an earlier run");
  auto* sweep = app.add_subcommand("sweep", "Classify wave regimes over task.sweep.grid");
  auto* reference = app.add_subcommand("config-reference", "Print the configuration reference");
  for (auto* cmd : {simulate, selforg, train, eval, analyze, sweep}) add_common(cmd);
  for (auto* cmd : {simulate, selforg}) cmd->add_flag("--no-spikes", opts.no_spikes, "Skip the spike raster export");
  for (auto* cmd : {eval, analyze}) cmd->add_option("--from", opts.from, "Directory of the run to read (default: --out)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate) return cmd_simulate(opts, false);
    if (*selforg) return cmd_simulate(opts, true);
    if (*train) return cmd_train_readout(opts);
    if (*eval) return cmd_evaluate(opts);
    if (*analyze) return cmd_analyze(opts);
    if (*sweep) return cmd_sweep(opts);
    if (*reference) {
      std::cout << config_reference();
      return 0;
    }
  } catch (const MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
