#include "wavesnn/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "wavesnn/errors.hpp"

namespace wavesnn {

using nlohmann::json;

namespace {

// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned()))
        throw ValidationError(where(key) + ": expected a nonnegative integer");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer()) throw ValidationError(where(key) + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ValidationError(where(key) + ": expected a number");
    }
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(where(key) + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ValidationError("unknown key '" + where(key) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_context(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind("unknown key", 0) == 0 || msg.find(path) != std::string::npos) throw;
    throw ValidationError(path + ": " + msg);
  }
}

CompetitionRule read_rule(const json& j, const std::string& path) {
  CompetitionRule rule;
  ObjectReader r(j, path);
  std::string kind = "none";
  r.get("kind", kind);
  r.get("k", rule.k);
  r.finish();
  with_context(path, [&] {
    rule.kind = competition_kind_from_string(kind);
    rule.validate();
  });
  return rule;
}

json rule_json(const CompetitionRule& rule) { return {{"kind", to_string(rule.kind)}, {"k", rule.k}}; }

GeometrySpec read_geometry(const json& j, const std::string& path) {
  GeometrySpec g;
  ObjectReader r(j, path);
  std::string kind = "grid";
  r.get("kind", kind);
  if (kind == "grid") {
    g.kind = GeometrySpec::Kind::grid;
    r.get("width", g.width);
    r.get("height", g.height);
    r.get("spacing", g.spacing);
  } else if (kind == "line") {
    g.kind = GeometrySpec::Kind::line;
    r.get("n", g.n);
    r.get("spacing", g.spacing);
  } else if (kind == "csv") {
    g.kind = GeometrySpec::Kind::csv;
    r.get("path", g.path);
    if (g.path.empty()) throw ValidationError(path + ".path: required for csv geometry");
  } else {
    throw ValidationError(path + ".kind: expected grid, line or csv");
  }
  r.finish();
  if (g.kind == GeometrySpec::Kind::grid && (g.width == 0 || g.height == 0))
    throw ValidationError(path + ": LayerGeometry: width and height must be >= 1");
  if (g.kind == GeometrySpec::Kind::line && g.n == 0) throw ValidationError(path + ": LayerGeometry: n must be >= 1");
  if (g.kind != GeometrySpec::Kind::csv && !(g.spacing > 0.0))
    throw ValidationError(path + ": LayerGeometry: spacing must be > 0");
  return g;
}

json geometry_json(const GeometrySpec& g) {
  switch (g.kind) {
    case GeometrySpec::Kind::grid:
      return {{"kind", "grid"}, {"width", g.width}, {"height", g.height}, {"spacing", g.spacing}};
    case GeometrySpec::Kind::line:
      return {{"kind", "line"}, {"n", g.n}, {"spacing", g.spacing}};
    case GeometrySpec::Kind::csv:
      return {{"kind", "csv"}, {"path", g.path}};
  }
  return {};
}

LayerSpec read_layer(const json& j, const std::string& path, std::size_t index) {
  LayerSpec layer;
  layer.name = "L" + std::to_string(index + 1);
  ObjectReader r(j, path);
  r.get("name", layer.name);
  if (const auto* g = r.child("geometry")) layer.geometry = read_geometry(*g, path + ".geometry");
  r.get("toroidal", layer.toroidal);
  if (const auto* k = r.child("kernel")) {
    ObjectReader kr(*k, path + ".kernel");
    kr.get("r_i", layer.kernel.r_i);
    kr.get("r_o", layer.kernel.r_o);
    kr.get("a_i", layer.kernel.a_i);
    kr.get("a_o", layer.kernel.a_o);
    kr.get("decay_length", layer.kernel.decay_length);
    std::string form = "proportional";
    kr.get("excitation", form);
    kr.finish();
    if (form == "proportional")
      layer.kernel.excitation = ExcitationForm::proportional;
    else if (form == "constant")
      layer.kernel.excitation = ExcitationForm::constant;
    else
      throw ValidationError(path + ".kernel.excitation: expected proportional or constant");
  }
  with_context(path + ".kernel", [&] { layer.kernel.validate(); });
  if (const auto* l = r.child("lif")) {
    ObjectReader lr(*l, path + ".lif");
    lr.get("tau_v", layer.lif.tau_v);
    lr.get("tau_theta", layer.lif.tau_theta);
    lr.get("v_th", layer.lif.v_th);
    lr.get("theta_plus", layer.lif.theta_plus);
    lr.get("v_reset", layer.lif.v_reset);
    lr.finish();
  }
  with_context(path + ".lif", [&] { layer.lif.validate(); });
  r.get("input_gain", layer.input_gain);
  if (const auto* rule = r.child("input_rule")) layer.input_rule = read_rule(*rule, path + ".input_rule");
  if (const auto* rule = r.child("output_rule")) layer.output_rule = read_rule(*rule, path + ".output_rule");
  r.finish();
  return layer;
}

json layer_json(const LayerSpec& l) {
  return {{"name", l.name},
          {"geometry", geometry_json(l.geometry)},
          {"toroidal", l.toroidal},
          {"kernel",
           {{"r_i", l.kernel.r_i},
            {"r_o", l.kernel.r_o},
            {"a_i", l.kernel.a_i},
            {"a_o", l.kernel.a_o},
            {"decay_length", l.kernel.decay_length},
            {"excitation", l.kernel.excitation == ExcitationForm::proportional ? "proportional" : "constant"}}},
          {"lif",
           {{"tau_v", l.lif.tau_v},
            {"tau_theta", l.lif.tau_theta},
            {"v_th", l.lif.v_th},
            {"theta_plus", l.lif.theta_plus},
            {"v_reset", l.lif.v_reset}}},
          {"input_gain", l.input_gain},
          {"input_rule", rule_json(l.input_rule)},
          {"output_rule", rule_json(l.output_rule)}};
}

void read_task(const json& j, TaskSettings& task) {
  ObjectReader r(j, "task");
  std::string input = "silent";
  r.get("input", input);
  if (input == "silent")
    task.input = InputSource::silent;
  else if (input == "mnist")
    task.input = InputSource::mnist;
  else
    throw ValidationError("task.input: expected silent or mnist");
  if (const auto* m = r.child("mnist")) {
    ObjectReader mr(*m, "task.mnist");
    auto& s = task.mnist;
    mr.get("train_images", s.train_images);
    mr.get("train_labels", s.train_labels);
    mr.get("test_images", s.test_images);
    mr.get("test_labels", s.test_labels);
    mr.get("train_count", s.train_count);
    mr.get("test_count", s.test_count);
    mr.get("test_offset", s.test_offset);
    mr.get("gain", s.gain);
    mr.get("hold", s.hold);
    mr.get("gap", s.gap);
    mr.get("feature_layer", s.feature_layer);
    mr.get("tuning_layer", s.tuning_layer);
    mr.get("carry_thresholds", s.carry_thresholds);
    mr.finish();
    if (!(s.hold > 0.0)) throw ValidationError("task.mnist.hold: InputStream: hold_duration must be > 0");
    if (!(s.gap >= 0.0)) throw ValidationError("task.mnist.gap: must be >= 0");
  }
  if (const auto* m = r.child("readout")) {
    ObjectReader rr(*m, "task.readout");
    rr.get("l2", task.readout.l2);
    rr.get("epochs", task.readout.epochs);
    rr.get("lr", task.readout.lr);
    rr.finish();
    if (task.readout.epochs < 0 || !(task.readout.lr > 0.0) || !(task.readout.l2 >= 0.0))
      throw ValidationError("task.readout: epochs >= 0, lr > 0 and l2 >= 0 required");
  }
  if (const auto* m = r.child("analysis")) {
    ObjectReader ar(*m, "task.analysis");
    auto& a = task.analysis;
    ar.get("pool_threshold_fraction", a.pool_threshold_fraction);
    ar.get("pool_bin_width", a.pool_bin_width);
    ar.get("cluster_k", a.cluster_k);
    ar.get("link_radius", a.link_radius);
    ar.get("warmup", a.warmup);
    ar.finish();
    if (!(a.pool_threshold_fraction > 0.0 && a.pool_threshold_fraction < 1.0))
      throw ValidationError("task.analysis.pool_threshold_fraction: must lie in (0, 1)");
    if (a.pool_bin_width == 0) throw ValidationError("task.analysis.pool_bin_width: must be >= 1");
    if (a.warmup < 0) throw ValidationError("task.analysis.warmup: must be >= 0");
  }
  if (const auto* m = r.child("sweep")) {
    ObjectReader sr(*m, "task.sweep");
    auto& s = task.sweep;
    sr.get("layer", s.layer);
    sr.get("steps", s.steps);
    sr.get("warmup", s.warmup);
    sr.get("window", s.window);
    sr.get("grid", s.grid);
    sr.finish();
    static const std::set<std::string> known{"r_i", "r_o", "a_i", "a_o", "tau_v", "tau_theta", "theta_plus", "noise"};
    for (const auto& [name, values] : s.grid) {
      if (!known.count(name)) throw ValidationError("unknown key 'task.sweep.grid." + name + "'");
      if (values.empty()) throw ValidationError("task.sweep.grid." + name + ": needs at least one value");
    }
    if (s.steps < 1 || s.warmup < 0 || s.warmup >= s.steps || s.window < 1)
      throw ValidationError("task.sweep: need steps > warmup >= 0 and window >= 1");
  }
  r.finish();
}

json task_json(const TaskSettings& t) {
  const auto& m = t.mnist;
  const auto& a = t.analysis;
  const auto& s = t.sweep;
  return {{"input", t.input == InputSource::mnist ? "mnist" : "silent"},
          {"mnist",
           {{"train_images", m.train_images},
            {"train_labels", m.train_labels},
            {"test_images", m.test_images},
            {"test_labels", m.test_labels},
            {"train_count", m.train_count},
            {"test_count", m.test_count},
            {"test_offset", m.test_offset},
            {"gain", m.gain},
            {"hold", m.hold},
            {"gap", m.gap},
            {"feature_layer", m.feature_layer},
            {"tuning_layer", m.tuning_layer},
            {"carry_thresholds", m.carry_thresholds}}},
          {"readout", {{"l2", t.readout.l2}, {"epochs", t.readout.epochs}, {"lr", t.readout.lr}}},
          {"analysis",
           {{"pool_threshold_fraction", a.pool_threshold_fraction},
            {"pool_bin_width", a.pool_bin_width},
            {"cluster_k", a.cluster_k},
            {"link_radius", a.link_radius},
            {"warmup", a.warmup}}},
          {"sweep",
           {{"layer", s.layer}, {"steps", s.steps}, {"warmup", s.warmup}, {"window", s.window}, {"grid", s.grid}}}};
}

}  // namespace

std::string ToolkitConfig::resolve(const std::string& path) const {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (base_dir / p).lexically_normal().string();
}

NetworkConfig ToolkitConfig::resolved_network() const {
  NetworkConfig out = network;
  for (auto& layer : out.layers)
    if (layer.geometry.kind == GeometrySpec::Kind::csv) layer.geometry.path = resolve(layer.geometry.path);
  return out;
}

ToolkitConfig config_from_json(const json& j, const std::string& source) {
  ToolkitConfig cfg;
  auto& net = cfg.network;
  try {
    ObjectReader top(j, "config");
    const auto* layers = top.child("layers");
    if (!layers || !layers->is_array() || layers->empty())
      throw ValidationError("config.layers: NetworkConfig: at least one layer is required");
    for (std::size_t i = 0; i < layers->size(); ++i)
      net.layers.push_back(read_layer((*layers)[i], "layers[" + std::to_string(i) + "]", i));

    if (const auto* p = top.child("plasticity")) {
      ObjectReader pr(*p, "plasticity");
      pr.get("eta", net.plasticity.eta);
      pr.get("w_max", net.plasticity.w_max);
      pr.get("clamp", net.plasticity.clamp);
      pr.get("row_sum_target", net.plasticity.row_sum_target);
      pr.get("weight_init_mu", net.weight_init_mu);
      pr.get("weight_init_sigma", net.weight_init_sigma);
      pr.get("learning_enabled", net.learning_enabled);
      pr.get("staging_steps", net.staging_steps);
      pr.finish();
    }
    if (const auto* p = top.child("run")) {
      ObjectReader rr(*p, "run");
      rr.get("dt", net.dt);
      rr.get("n_steps", net.n_steps);
      rr.get("seed", net.seed);
      rr.get("snapshot_every", net.snapshot_every);
      if (const auto* probes = rr.child("probes")) {
        if (!probes->is_array()) throw ValidationError("run.probes: expected an array");
        for (std::size_t i = 0; i < probes->size(); ++i) {
          ObjectReader pr((*probes)[i], "run.probes[" + std::to_string(i) + "]");
          ProbeSpec probe;
          pr.get("layer", probe.layer);
          pr.get("neuron", probe.neuron);
          pr.finish();
          net.probes.push_back(probe);
        }
      }
      rr.finish();
    }
    if (const auto* p = top.child("noise")) {
      ObjectReader nr(*p, "noise");
      nr.get("amplitude", net.noise.amplitude);
      nr.get("layer", net.noise.layer);
      nr.get("stop_step", net.noise.stop_step);
      nr.finish();
    }
    if (const auto* t = top.child("task")) read_task(*t, cfg.task);
    top.finish();
    net.validate();
    if (cfg.task.sweep.layer < 0 || static_cast<std::size_t>(cfg.task.sweep.layer) >= net.layers.size())
      throw ValidationError("task.sweep.layer: layer index out of range");
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return cfg;
}

ToolkitConfig parse_config_text(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": parse error: " + e.what());
  }
  return config_from_json(j, source);
}

ToolkitConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config_text(ss.str(), path);
  cfg.base_dir = std::filesystem::path(path).parent_path();
  return cfg;
}

json to_json(const ToolkitConfig& config) {
  const auto& net = config.network;
  json layers = json::array();
  for (const auto& l : net.layers) layers.push_back(layer_json(l));
  json probes = json::array();
  for (const auto& p : net.probes) probes.push_back({{"layer", p.layer}, {"neuron", p.neuron}});
  return {{"layers", layers},
          {"plasticity",
           {{"eta", net.plasticity.eta},
            {"w_max", net.plasticity.w_max},
            {"clamp", net.plasticity.clamp},
            {"row_sum_target", net.plasticity.row_sum_target},
            {"weight_init_mu", net.weight_init_mu},
            {"weight_init_sigma", net.weight_init_sigma},
            {"learning_enabled", net.learning_enabled},
            {"staging_steps", net.staging_steps}}},
          {"run",
           {{"dt", net.dt},
            {"n_steps", net.n_steps},
            {"seed", net.seed},
            {"snapshot_every", net.snapshot_every},
            {"probes", probes}}},
          {"noise", {{"amplitude", net.noise.amplitude}, {"layer", net.noise.layer}, {"stop_step", net.noise.stop_step}}},
          {"task", task_json(config.task)}};
}

std::string serialize_config(const ToolkitConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_hash(const ToolkitConfig& config) {
  const auto text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_reference() {
  ToolkitConfig defaults;
  defaults.network.layers.push_back(LayerSpec{});
  defaults.network.layers.back().name = "L1";
  const auto j = to_json(defaults);
  std::ostringstream os;
  os << "# Configuration reference\n\n"
     << "Generated by `wavesnn config-reference`. Every key is optional except `layers`;\n"
     << "unknown keys are rejected. Shown below is a one-layer config with all defaults filled in.\n"
     << "Each entry of `layers` takes the same fields as the single layer shown.\n\n"
     << "```json\n"
     << j.dump(2) << "\n```\n\n"
     << "Geometry kinds: `grid` (width, height, spacing), `line` (n, spacing), `csv` (path; columns x,y[,z]).\n"
     << "Competition rule kinds: `none`, `winner_take_all`, `k_best` (uses k).\n"
     << "Kernel excitation: `proportional` (a_i * D inside r_i) or `constant` (a_i inside r_i).\n"
     << "Sweep grid keys: r_i, r_o, a_i, a_o, tau_v, tau_theta, theta_plus, noise.\n"
     << "Task input (`task.input`): `silent` (noise only) or `mnist` (training images on the hold schedule).\n"
     << "Relative file paths are resolved against the config file's directory.\n";
  return os.str();
}

std::string toolkit_version() { return WAVESNN_VERSION; }

}  // namespace wavesnn
