#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kCli = WAVESNN_CLI;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("wavesnn_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with stdout/stderr captured into `log`; returns the exit code.
int cli(const std::string& args, const fs::path& log) {
  const auto cmd = "\"" + kCli.string() + "\" " + args + " >\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, long n_steps) {
  json cfg = {
      {"layers",
       {{{"geometry", {{"kind", "grid"}, {"width", 6}, {"height", 6}}}},
        {{"geometry", {{"kind", "grid"}, {"width", 3}, {"height", 3}}}, {"input_gain", 0.5}}}},
      {"plasticity", {{"eta", 0.5}}},
      {"run", {{"dt", 0.1}, {"n_steps", n_steps}, {"seed", 4}, {"snapshot_every", 50}}},
      {"noise", {{"amplitude", 2.0}}}};
  const auto path = dir / "net.json";
  std::ofstream(path) << cfg.dump(2);
  return path;
}

std::set<std::string> listing(const fs::path& dir) {
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
  return names;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate with zero steps writes only the manifest and the initial snapshot") {
  const auto dir = scratch_dir("zero");
  const auto cfg = write_config(dir, 0);
  const auto out = dir / "run";
  REQUIRE(cli("simulate --config " + cfg.string() + " --out " + out.string(), dir / "log") == 0);
  CHECK(listing(out) == std::set<std::string>{"manifest.json", "weights_m0_step0.csv"});

  const auto manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest.at("command") == "simulate");
  CHECK(manifest.at("artifacts") == json::array({"weights_m0_step0.csv"}));
  CHECK(manifest.at("seed") == 4);
  CHECK(manifest.at("sim_time").at("end") == 0);
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("selforganize is byte-reproducible") {
  const auto dir = scratch_dir("repro");
  const auto cfg = write_config(dir, 120);
  const auto a = dir / "a", b = dir / "b";
  REQUIRE(cli("selforganize --config " + cfg.string() + " --out " + a.string(), dir / "log_a") == 0);
  REQUIRE(cli("selforganize --config " + cfg.string() + " --out " + b.string(), dir / "log_b") == 0);
  const auto files = listing(a);
  REQUIRE(files == listing(b));
  int snapshots = 0;
  for (const auto& f : files) {
    if (f.rfind("weights_", 0) == 0) ++snapshots;
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  CHECK(snapshots == 4);  // steps 0, 50, 100 and the final 120

  // every artifact is listed in the manifest
  const auto manifest = json::parse(slurp(a / "manifest.json"));
  std::set<std::string> listed;
  for (const auto& name : manifest.at("artifacts")) listed.insert(name.get<std::string>());
  listed.insert("manifest.json");
  CHECK(listed == files);

  // the seed flag changes the run
  const auto c = dir / "c";
  REQUIRE(cli("selforganize --seed 99 --config " + cfg.string() + " --out " + c.string(), dir / "log_c") == 0);
  CHECK(slurp(a / "weights_m0_step120.csv") != slurp(c / "weights_m0_step120.csv"));
}

TEST_CASE("snapshot cadence flag") {
  const auto dir = scratch_dir("cadence");
  const auto cfg = write_config(dir, 60);
  const auto out = dir / "run";
  REQUIRE(cli("selforganize --no-spikes --snapshot-every 20 --config " + cfg.string() + " --out " + out.string(),
              dir / "log") == 0);
  const auto files = listing(out);
  for (const char* f : {"weights_m0_step0.csv", "weights_m0_step20.csv", "weights_m0_step40.csv",
                        "weights_m0_step60.csv", "traces.csv", "thresholds_l0.csv"})
    CHECK_MESSAGE(files.count(f) == 1, f);
  CHECK(files.count("spikes.ndjson") == 0);
}

TEST_CASE("evaluate without a trained classifier") {
  const auto dir = scratch_dir("missing");
  const auto cfg = write_config(dir, 10);
  const int code = cli("evaluate --config " + cfg.string() + " --out " + (dir / "run").string(), dir / "log");
  CHECK(code == 3);
  CHECK(slurp(dir / "log").find("missing artifact") != std::string::npos);
}

TEST_CASE("invalid configuration exits with a validation error") {
  const auto dir = scratch_dir("invalid");
  const auto cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"layers": [{"geometry": {"kind": "grid"}, "kernel": {"r_i": 5, "r_o": 1}}]})";
  CHECK(cli("simulate --config " + cfg.string() + " --out " + (dir / "run").string(), dir / "log") == 2);
  CHECK(slurp(dir / "log").find("KernelParams") != std::string::npos);
}

TEST_CASE("analyze reads an earlier simulation") {
  const auto dir = scratch_dir("analyze");
  const auto cfg = write_config(dir, 100);
  const auto run = dir / "run";
  REQUIRE(cli("selforganize --config " + cfg.string() + " --out " + run.string(), dir / "log1") == 0);
  const auto out = dir / "analysis";
  REQUIRE(cli("analyze --config " + cfg.string() + " --from " + run.string() + " --out " + out.string(),
              dir / "log2") == 0);
  const auto files = listing(out);
  for (const char* f : {"analysis.json", "wave_l0.ndjson", "wave_l1.ndjson", "pool_histogram_m0.csv",
                        "pool_radius_m0.csv", "manifest.json"})
    CHECK_MESSAGE(files.count(f) == 1, f);
  const auto analysis = json::parse(slurp(out / "analysis.json"));
  CHECK(analysis.at("pools").at(0).at("step") == 100);
}

TEST_CASE("config reference") {
  const auto dir = scratch_dir("reference");
  REQUIRE(cli("config-reference", dir / "log") == 0);
  CHECK(slurp(dir / "log").find("plasticity") != std::string::npos);
}

}  // TEST_SUITE
