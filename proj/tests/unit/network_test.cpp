#include <doctest.h>

#include <cmath>

#include "wavesnn/errors.hpp"
#include "wavesnn/network.hpp"
#include "wavesnn/simulation.hpp"

using namespace wavesnn;

namespace {

LayerSpec grid_layer(std::size_t w, std::size_t h) {
  LayerSpec spec;
  spec.geometry.width = w;
  spec.geometry.height = h;
  spec.kernel = {2.0, 3.0, 1.0, 1.0};
  return spec;
}

NetworkConfig two_layer_config() {
  NetworkConfig cfg;
  cfg.layers = {grid_layer(6, 6), grid_layer(4, 4)};
  cfg.layers[1].input_gain = 0.5;
  cfg.dt = 0.1;
  cfg.n_steps = 300;
  cfg.noise.amplitude = 2.0;
  cfg.plasticity.eta = 0.5;
  cfg.snapshot_every = 100;
  return cfg;
}

bool same_spikes(const SimulationRecord& a, const SimulationRecord& b, std::size_t layer) {
  return a.spikes.at(layer) == b.spikes.at(layer);
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("degenerate weight init") {
  const auto w = init_weights(5, 3, 1.5, 0.0, 9, 1.0);
  CHECK(w.n_post() == 3);
  CHECK(w.n_pre() == 5);
  CHECK((w.w.array() == 1.0).all());
  CHECK((init_weights(4, 4, 0.3, 0.0, 9, 1.0).w.array() == 0.3).all());
}

TEST_CASE("weight init statistics") {
  // far from both clamp bounds so the sample is effectively unclamped
  const auto w = init_weights(1000, 1000, 10.0, 0.5, 42, 100.0);
  const double n = static_cast<double>(w.w.size());
  const double mean = w.w.mean();
  const double sd = std::sqrt((w.w.array() - mean).square().sum() / (n - 1));
  CHECK(std::abs(mean - 10.0) < 3.0 * 0.5 / std::sqrt(n));
  CHECK(sd == doctest::Approx(0.5).epsilon(0.01));

  const auto clamped = init_weights(200, 200, 1.0, 0.5, 42, 1.0);
  CHECK(clamped.w.minCoeff() >= 0.0);
  CHECK(clamped.w.maxCoeff() <= 1.0);
}

TEST_CASE("weight init is reproducible") {
  CHECK(init_weights(30, 20, 1.0, 0.5, 5, 2.0).w == init_weights(30, 20, 1.0, 0.5, 5, 2.0).w);
  CHECK(init_weights(30, 20, 1.0, 0.5, 5, 2.0).w != init_weights(30, 20, 1.0, 0.5, 6, 2.0).w);
}

TEST_CASE("noise drive") {
  CHECK(noise_drive(10, 0.0, 1, 3).isZero());
  CHECK(noise_drive(10, 2.0, 1, 3) == noise_drive(10, 2.0, 1, 3));
  CHECK(noise_drive(10, 2.0, 1, 3) != noise_drive(10, 2.0, 1, 4));

  const double a = 3.0;
  const std::size_t n = 50;
  const long steps = 4000;
  double sum = 0.0;
  double lo = a, hi = 0.0;
  for (long k = 0; k < steps; ++k) {
    const auto x = noise_drive(n, a, 17, k);
    sum += x.sum();
    lo = std::min(lo, x.minCoeff());
    hi = std::max(hi, x.maxCoeff());
  }
  const double count = static_cast<double>(n) * static_cast<double>(steps);
  const double se = a / std::sqrt(12.0 * count);
  CHECK(std::abs(sum / count - a / 2.0) < 3.0 * se);
  CHECK(lo >= 0.0);
  CHECK(hi <= a);
}

TEST_CASE("seed mixing spreads nearby inputs") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(7, 3) == mix_seed(7, 3));
}

TEST_CASE("center neuron") {
  CHECK(center_neuron(grid_geometry(3, 3)) == 4);
  CHECK(center_neuron(grid_geometry(4, 4)) == 5);
}

TEST_CASE("silent network is a fixed point") {
  auto cfg = two_layer_config();
  cfg.noise.amplitude = 0.0;
  const Network net(cfg);
  auto state = net.initial_state();
  const auto start = state;
  for (int k = 0; k < 20; ++k) net.step(state, Eigen::VectorXd::Zero(36));
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    CHECK(state.layers[l].v == start.layers[l].v);
    CHECK(state.layers[l].theta == start.layers[l].theta);
  }
  CHECK(state.weights[0].w == start.weights[0].w);
  CHECK(state.step == 20);
}

TEST_CASE("two single neurons: the co-active synapse grows by dt * eta") {
  NetworkConfig cfg;
  cfg.layers = {grid_layer(1, 1), grid_layer(1, 1)};
  cfg.layers[1].input_gain = 100.0;
  cfg.weight_init_mu = 0.5;
  cfg.weight_init_sigma = 0.0;
  cfg.plasticity.eta = 0.2;
  cfg.plasticity.w_max = 1.0;
  cfg.dt = 0.1;
  const Eigen::VectorXd drive = Eigen::VectorXd::Constant(1, 100.0);

  SUBCASE("both fire on the first step") {
    // layer 1: v = 100 (1 - e^-0.1) = 9.5 >= 1; layer 2 sees 100 * 0.5 * y1 in the same sweep
    const Network net(cfg);
    auto state = net.initial_state();
    const auto r = net.step(state, drive);
    CHECK(r.spikes[0][0] == 1.0);
    CHECK(r.spikes[1][0] == 1.0);
    CHECK(state.weights[0].w(0, 0) == doctest::Approx(0.5 + 0.1 * 0.2));
    net.step(state, drive);
    CHECK(state.weights[0].w(0, 0) == doctest::Approx(0.5 + 2 * 0.1 * 0.2));
  }
  SUBCASE("no growth without a post spike") {
    cfg.layers[1].input_gain = 0.0;
    const Network net(cfg);
    auto state = net.initial_state();
    for (int k = 0; k < 5; ++k) {
      const auto r = net.step(state, drive);
      CHECK(r.spikes[0][0] == 1.0);
      CHECK(r.spikes[1][0] == 0.0);
    }
    CHECK(state.weights[0].w(0, 0) == 0.5);
  }
}

TEST_CASE("learning off leaves weights bit-identical") {
  auto cfg = two_layer_config();
  cfg.learning_enabled = false;
  const Network net(cfg);
  auto state = net.initial_state();
  const auto w0 = state.weights[0].w;
  const auto rec = simulate(net, state, InputStream::silent(36), 300);
  CHECK(rec.spike_count(0) > 0);
  CHECK(state.weights[0].w == w0);

  cfg.learning_enabled = true;
  const Network plastic(cfg);
  auto s2 = plastic.initial_state();
  simulate(plastic, s2, InputStream::silent(36), 300, {}, {true, false});
  CHECK(s2.weights[0].w == w0);
}

TEST_CASE("all layers advance together") {
  const Network net(two_layer_config());
  auto state = net.initial_state();
  for (int k = 0; k < 7; ++k) net.step(state, Eigen::VectorXd::Zero(36));
  for (const auto& layer : state.layers) CHECK(layer.t == doctest::Approx(state.t));
  CHECK(state.t == doctest::Approx(0.7));
}

TEST_CASE("external input must match layer one") {
  const Network net(two_layer_config());
  auto state = net.initial_state();
  CHECK_THROWS_AS(net.step(state, Eigen::VectorXd::Zero(5)), DimensionError);
}

TEST_CASE("zero-step run keeps only the initial snapshot") {
  auto cfg = two_layer_config();
  cfg.n_steps = 0;
  const auto rec = run(cfg, InputStream::silent(36));
  CHECK(rec.n_steps == 0);
  REQUIRE(rec.snapshots.size() == 1);
  CHECK(rec.snapshots[0].step == 0);
  CHECK(rec.spike_count(0) == 0);
}

TEST_CASE("snapshots follow the cadence") {
  const auto rec = run(two_layer_config(), InputStream::silent(36));
  std::vector<long> steps;
  for (const auto& s : rec.snapshots) steps.push_back(s.step);
  CHECK(steps == std::vector<long>{0, 100, 200, 300});
  REQUIRE(!rec.probes.empty());
  CHECK(rec.probes[0].v.size() == 301);
}

TEST_CASE("runs are deterministic under seed") {
  const auto cfg = two_layer_config();
  const auto a = run(cfg, InputStream::silent(36));
  const auto b = run(cfg, InputStream::silent(36));
  CHECK(same_spikes(a, b, 0));
  CHECK(same_spikes(a, b, 1));
  CHECK(a.snapshots.back().w == b.snapshots.back().w);

  auto other = cfg;
  other.seed = cfg.seed + 1;
  CHECK_FALSE(same_spikes(a, run(other, InputStream::silent(36)), 0));
}

TEST_CASE("higher layers do not feed back into layer one") {
  auto cfg = two_layer_config();
  cfg.plasticity.eta = 0.0;
  const auto a = run(cfg, InputStream::silent(36));
  cfg.layers[1].kernel = {1.0, 1.5, 3.0, 0.2};
  cfg.layers[1].lif.tau_theta = 50.0;
  cfg.layers[1].input_gain = 4.0;
  const auto b = run(cfg, InputStream::silent(36));
  CHECK(same_spikes(a, b, 0));
  CHECK_FALSE(same_spikes(a, b, 1));
}

TEST_CASE("staged learning confines plasticity to its window") {
  auto cfg = two_layer_config();
  cfg.layers.push_back(grid_layer(3, 3));
  cfg.layers[2].input_gain = 0.5;
  cfg.staging_steps = 150;
  cfg.n_steps = 150;
  cfg.snapshot_every = 0;
  const Network net(cfg);
  auto state = net.initial_state();
  const auto w1 = state.weights[1].w;
  simulate(net, state, InputStream::silent(36), 150);
  CHECK(state.weights[1].w == w1);
}

TEST_CASE("quiesce keeps thresholds") {
  LifParams p;
  auto s = LayerState::from_values(Eigen::Vector2d(2.0, 0.3), Eigen::Vector2d(1.5, 1.2));
  quiesce(s, p);
  CHECK(s.v.isZero());
  CHECK(s.spikes.isZero());
  CHECK(s.theta == Eigen::Vector2d(1.5, 1.2));
}

TEST_CASE("config invariants") {
  NetworkConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = two_layer_config();
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = two_layer_config();
  cfg.weight_init_sigma = -1.0;
  CHECK_THROWS_AS(Network{cfg}, ValidationError);
}

TEST_CASE("input stream schedule") {
  std::vector<Eigen::VectorXd> frames{Eigen::VectorXd::Constant(2, 1.0), Eigen::VectorXd::Constant(2, 2.0)};
  const InputStream stream(frames, 0.5, 0.2);
  const double dt = 0.1;
  CHECK(stream.total_steps(dt) == 14);
  CHECK(stream.frame_at(0, dt) == 0);
  CHECK(stream.frame_at(4, dt) == 0);
  CHECK(stream.frame_at(5, dt) == -1);
  CHECK(stream.frame_at(7, dt) == 1);
  CHECK(stream.frame_at(14, dt) == -1);
  CHECK(stream.input_at(8, dt)[0] == 2.0);
  CHECK(stream.input_at(20, dt).isZero());
  CHECK(steps_for(5.0, 0.1) == 50);
  CHECK(InputStream::silent(3).input_at(0, dt).isZero());
}

}  // TEST_SUITE
