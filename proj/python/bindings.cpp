#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wavesnn/analysis.hpp"
#include "wavesnn/config.hpp"
#include "wavesnn/errors.hpp"
#include "wavesnn/exports.hpp"
#include "wavesnn/lif.hpp"
#include "wavesnn/mnist.hpp"
#include "wavesnn/network.hpp"
#include "wavesnn/pipeline.hpp"
#include "wavesnn/plasticity.hpp"
#include "wavesnn/readout.hpp"
#include "wavesnn/simulation.hpp"
#include "wavesnn/sweep.hpp"
#include "wavesnn/topology.hpp"

namespace py = pybind11;
using namespace wavesnn;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix positions_array(const LayerGeometry& g) {
  RowMatrix out(static_cast<Eigen::Index>(g.size()), 3);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int a = 0; a < 3; ++a) out(static_cast<Eigen::Index>(i), a) = g.positions[i][static_cast<std::size_t>(a)];
  return out;
}

LayerGeometry geometry_from(const Eigen::Ref<const RowMatrix>& xyz) {
  if (xyz.cols() != 2 && xyz.cols() != 3) throw DimensionError("positions must have 2 or 3 columns");
  LayerGeometry g;
  g.positions.resize(static_cast<std::size_t>(xyz.rows()));
  for (Eigen::Index i = 0; i < xyz.rows(); ++i)
    for (Eigen::Index a = 0; a < xyz.cols(); ++a) g.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] = xyz(i, a);
  g.validate();
  return g;
}

// Binary raster (steps x neurons) from index lists.
py::array_t<std::uint8_t> raster_array(const std::vector<std::vector<std::uint32_t>>& raster, std::size_t n) {
  py::array_t<std::uint8_t> out({raster.size(), n});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t k = 0; k < view.shape(0); ++k)
    for (py::ssize_t j = 0; j < view.shape(1); ++j) view(k, j) = 0;
  for (std::size_t k = 0; k < raster.size(); ++k)
    for (const auto i : raster[k]) view(static_cast<py::ssize_t>(k), i) = 1;
  return out;
}

SpikeRaster raster_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& dense) {
  if (dense.ndim() != 2) throw DimensionError("raster must be steps x neurons");
  const auto view = dense.unchecked<2>();
  SpikeRaster raster(static_cast<std::size_t>(view.shape(0)));
  for (py::ssize_t k = 0; k < view.shape(0); ++k)
    for (py::ssize_t j = 0; j < view.shape(1); ++j)
      if (view(k, j) != 0.0) raster[static_cast<std::size_t>(k)].push_back(static_cast<std::uint32_t>(j));
  return raster;
}

std::vector<TuningCurve> curves_from(const Eigen::Ref<const RowMatrix>& m) {
  if (m.cols() != 10) throw DimensionError("tuning curves must have 10 columns");
  std::vector<TuningCurve> curves(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index u = 0; u < m.rows(); ++u)
    for (int c = 0; c < 10; ++c) curves[static_cast<std::size_t>(u)].values[static_cast<std::size_t>(c)] = m(u, c);
  return curves;
}

RowMatrix curves_array(const std::vector<TuningCurve>& curves) {
  RowMatrix out(static_cast<Eigen::Index>(curves.size()), 10);
  for (std::size_t u = 0; u < curves.size(); ++u)
    for (int c = 0; c < 10; ++c) out(static_cast<Eigen::Index>(u), c) = curves[u].values[static_cast<std::size_t>(c)];
  return out;
}

py::dict record_dict(const SimulationRecord& rec) {
  py::dict d;
  d["dt"] = rec.dt;
  d["t0"] = rec.t0;
  d["n_steps"] = rec.n_steps;
  py::list spikes;
  for (std::size_t l = 0; l < rec.spikes.size(); ++l) spikes.append(raster_array(rec.spikes[l], rec.layer_sizes[l]));
  d["spikes"] = spikes;
  py::list probes;
  for (const auto& p : rec.probes) {
    py::dict pd;
    pd["layer"] = p.layer;
    pd["neuron"] = p.neuron;
    pd["v"] = py::array(py::cast(p.v));
    pd["theta"] = py::array(py::cast(p.theta));
    probes.append(pd);
  }
  d["probes"] = probes;
  py::list snaps;
  for (const auto& s : rec.snapshots) snaps.append(py::make_tuple(s.step, s.matrix, s.w));
  d["snapshots"] = snaps;
  return d;
}

py::dict frames_dict(const std::vector<WaveFrame>& frames) {
  const auto n = static_cast<py::ssize_t>(frames.size());
  py::array_t<double> fraction(n), centroid({n, py::ssize_t{3}});
  py::array_t<std::int64_t> components(n);
  auto f = fraction.mutable_unchecked<1>();
  auto c = centroid.mutable_unchecked<2>();
  auto k = components.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& fr = frames[static_cast<std::size_t>(i)];
    f(i) = fr.active_fraction;
    k(i) = static_cast<std::int64_t>(fr.component_count);
    for (int a = 0; a < 3; ++a) c(i, a) = fr.centroid ? (*fr.centroid)[static_cast<std::size_t>(a)] : std::nan("");
  }
  py::dict d;
  d["active_fraction"] = fraction;
  d["centroid"] = centroid;
  d["components"] = components;
  return d;
}

std::vector<WaveFrame> frames_from(const py::dict& d) {
  const auto fraction = d["active_fraction"].cast<std::vector<double>>();
  const auto comps = d["components"].cast<std::vector<std::size_t>>();
  const auto centroid = d["centroid"].cast<RowMatrix>();
  if (comps.size() != fraction.size() || static_cast<std::size_t>(centroid.rows()) != fraction.size())
    throw DimensionError("wave frame arrays differ in length");
  std::vector<WaveFrame> frames(fraction.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].active_fraction = fraction[i];
    frames[i].component_count = comps[i];
    const auto row = centroid.row(static_cast<Eigen::Index>(i));
    if (std::isfinite(row[0])) frames[i].centroid = Point{row[0], row[1], row[2]};
  }
  return frames;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wave-driven self-organizing spiking networks";
  m.attr("__version__") = toolkit_version();

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<InstabilityError>(m, "InstabilityError", error.ptr());
  auto io = py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<IdxError>(m, "IdxError", io.ptr());
  py::register_exception<MissingArtifactError>(m, "MissingArtifactError", error.ptr());

  // topology
  py::class_<KernelParams>(m, "KernelParams")
      .def(py::init([](double r_i, double r_o, double a_i, double a_o, double decay_length, bool constant) {
             KernelParams k{r_i, r_o, a_i, a_o, decay_length,
                            constant ? ExcitationForm::constant : ExcitationForm::proportional};
             k.validate();
             return k;
           }),
           py::arg("r_i") = 3.0, py::arg("r_o") = 4.0, py::arg("a_i") = 1.0, py::arg("a_o") = 1.0,
           py::arg("decay_length") = 10.0, py::arg("constant_excitation") = false)
      .def_readwrite("r_i", &KernelParams::r_i)
      .def_readwrite("r_o", &KernelParams::r_o)
      .def_readwrite("a_i", &KernelParams::a_i)
      .def_readwrite("a_o", &KernelParams::a_o)
      .def_readwrite("decay_length", &KernelParams::decay_length);

  m.def("grid_positions", [](std::size_t w, std::size_t h, double spacing) { return positions_array(grid_geometry(w, h, spacing)); },
        py::arg("width"), py::arg("height"), py::arg("spacing") = 1.0, "Row-major lattice positions, shape (n, 3).");
  m.def("distance_matrix", [](const Eigen::Ref<const RowMatrix>& xyz) { return distance_matrix(geometry_from(xyz)); },
        py::arg("positions"));
  m.def("build_adjacency", &build_adjacency, py::arg("distances"), py::arg("kernel"));
  m.def("kernel_value", &kernel_value, py::arg("distance"), py::arg("kernel"));

  // neuron model
  py::class_<LifParams>(m, "LifParams")
      .def(py::init([](double tau_v, double tau_theta, double v_th, double theta_plus, double v_reset) {
             LifParams p{tau_v, tau_theta, v_th, theta_plus, v_reset};
             p.validate();
             return p;
           }),
           py::arg("tau_v") = 1.0, py::arg("tau_theta") = 5.0, py::arg("v_th") = 1.0, py::arg("theta_plus") = 1.0,
           py::arg("v_reset") = 0.0)
      .def_readwrite("tau_v", &LifParams::tau_v)
      .def_readwrite("tau_theta", &LifParams::tau_theta)
      .def_readwrite("v_th", &LifParams::v_th)
      .def_readwrite("theta_plus", &LifParams::theta_plus)
      .def_readwrite("v_reset", &LifParams::v_reset);

  m.def(
      "lif_rhs",
      [](const Eigen::VectorXd& v, const Eigen::VectorXd& theta, const Eigen::MatrixXd& adjacency,
         const Eigen::MatrixXd& spike_input, const Eigen::VectorXd& x, const LifParams& p) {
        const auto d = lif_rhs(LayerState::from_values(v, theta), adjacency, spike_input, x, p);
        return py::make_tuple(d.dv, d.dtheta);
      },
      py::arg("v"), py::arg("theta"), py::arg("adjacency"), py::arg("spike_input"), py::arg("x"), py::arg("params"),
      "(dv, dtheta) with the spike vector taken as v >= theta.");
  m.def(
      "rk4_step",
      [](const Eigen::VectorXd& v, const Eigen::VectorXd& theta, const Eigen::VectorXd& spikes,
         const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& spike_input, const Eigen::VectorXd& x, double dt,
         const LifParams& p) {
        LayerState s{v, theta, spikes, 0.0};
        s.validate();
        const auto next = rk4_step(s, adjacency, spike_input, x, dt, p);
        return py::make_tuple(next.v, next.theta);
      },
      py::arg("v"), py::arg("theta"), py::arg("spikes"), py::arg("adjacency"), py::arg("spike_input"), py::arg("x"),
      py::arg("dt"), py::arg("params"), "One RK4 step with the spike vector held fixed; returns (v, theta).");
  m.def(
      "detect_spikes_and_reset",
      [](Eigen::VectorXd v, const Eigen::VectorXd& theta, const LifParams& p) {
        auto s = LayerState::from_values(std::move(v), theta);
        const auto spikes = detect_spikes_and_reset(s, p);
        return py::make_tuple(s.v, spikes);
      },
      py::arg("v"), py::arg("theta"), py::arg("params"), "Returns (v after reset, spikes).");

  // plasticity
  m.def(
      "stdp_update",
      [](Eigen::MatrixXd w, const Eigen::VectorXd& y_pre, const Eigen::VectorXd& y_post, double dt, double eta,
         double w_max, bool clamp, double row_sum_target) {
        PlasticityParams p{eta, w_max, clamp, row_sum_target};
        p.validate();
        WeightMatrix wm{std::move(w), 0, 1};
        stdp_update(wm, y_pre, y_post, dt, p);
        return wm.w;
      },
      py::arg("weights"), py::arg("y_pre"), py::arg("y_post"), py::arg("dt"), py::arg("eta"), py::arg("w_max") = 1.0,
      py::arg("clamp") = true, py::arg("row_sum_target") = 0.0, "Returns the updated (post x pre) weight matrix.");
  m.def("winner_take_all", &winner_take_all, py::arg("x"));
  m.def("k_best", &k_best, py::arg("x"), py::arg("k"));
  m.def("relu", &relu, py::arg("z"));
  m.def(
      "init_weights",
      [](std::size_t n_pre, std::size_t n_post, double mu, double sigma, std::uint64_t seed, double w_max) {
        return init_weights(n_pre, n_post, mu, sigma, seed, w_max).w;
      },
      py::arg("n_pre"), py::arg("n_post"), py::arg("mu") = 1.0, py::arg("sigma") = 0.5, py::arg("seed") = 1,
      py::arg("w_max") = 1.0);
  m.def("noise_drive", &noise_drive, py::arg("n"), py::arg("amplitude"), py::arg("seed"), py::arg("step"));

  // configuration and simulation
  py::class_<ToolkitConfig>(m, "Config")
      .def_static("from_file", &parse_config_file, py::arg("path"))
      .def_static("from_text", &parse_config_text, py::arg("text"), py::arg("source") = "<config>")
      .def("to_json", &serialize_config)
      .def("hash", &config_hash)
      .def_property(
          "seed", [](const ToolkitConfig& c) { return c.network.seed; },
          [](ToolkitConfig& c, std::uint64_t s) { c.network.seed = s; })
      .def_property(
          "n_steps", [](const ToolkitConfig& c) { return c.network.n_steps; },
          [](ToolkitConfig& c, long n) { c.network.n_steps = n; })
      .def_property_readonly("dt", [](const ToolkitConfig& c) { return c.network.dt; })
      .def_property_readonly("layer_count", [](const ToolkitConfig& c) { return c.network.layers.size(); });

  py::class_<NetworkState>(m, "NetworkState")
      .def_readonly("t", &NetworkState::t)
      .def_readonly("step", &NetworkState::step)
      .def_property_readonly("v", [](const NetworkState& s) {
        std::vector<Eigen::VectorXd> out;
        for (const auto& l : s.layers) out.push_back(l.v);
        return out;
      })
      .def_property_readonly("theta", [](const NetworkState& s) {
        std::vector<Eigen::VectorXd> out;
        for (const auto& l : s.layers) out.push_back(l.theta);
        return out;
      })
      .def_property(
          "weights",
          [](const NetworkState& s) {
            std::vector<Eigen::MatrixXd> out;
            for (const auto& w : s.weights) out.push_back(w.w);
            return out;
          },
          [](NetworkState& s, const std::vector<Eigen::MatrixXd>& ws) {
            if (ws.size() != s.weights.size()) throw DimensionError("one matrix per layer pair expected");
            for (std::size_t m = 0; m < ws.size(); ++m) {
              if (ws[m].rows() != s.weights[m].w.rows() || ws[m].cols() != s.weights[m].w.cols())
                throw DimensionError("weight matrix " + std::to_string(m) + " has the wrong shape");
              s.weights[m].w = ws[m];
            }
          });

  py::class_<Network>(m, "Network")
      .def(py::init([](const ToolkitConfig& c) { return Network(c.resolved_network()); }), py::arg("config"))
      .def_property_readonly("layer_count", &Network::layer_count)
      .def("layer_size", &Network::layer_size, py::arg("layer"))
      .def("positions", [](const Network& n, std::size_t l) { return positions_array(n.layer(l).geometry); },
           py::arg("layer"))
      .def("adjacency", [](const Network& n, std::size_t l) { return n.layer(l).adjacency; }, py::arg("layer"))
      .def("initial_state", &Network::initial_state)
      .def(
          "step",
          [](const Network& n, NetworkState& s, const Eigen::VectorXd& x, bool noise, bool learning) {
            return n.step(s, x, {noise, learning}).spikes;
          },
          py::arg("state"), py::arg("x"), py::arg("noise") = true, py::arg("learning") = true,
          "Advances the state by one dt; returns the spike vector of every layer.")
      .def(
          "simulate",
          [](const Network& n, NetworkState& s, long n_steps, bool learning, bool noise, long snapshot_every) {
            RecordOptions opts;
            opts.snapshot_every = snapshot_every;
            py::gil_scoped_release release;
            auto rec = simulate(n, s, InputStream::silent(n.layer_size(0)), n_steps, opts, {noise, learning});
            py::gil_scoped_acquire acquire;
            return record_dict(rec);
          },
          py::arg("state"), py::arg("n_steps"), py::arg("learning") = true, py::arg("noise") = true,
          py::arg("snapshot_every") = 0,
          "Runs n_steps with zero external input. Returns a dict with binary spike rasters per layer, probe traces "
          "and (step, matrix, W) snapshots.");

  // analysis
  m.def(
      "pool_histogram",
      [](const Eigen::MatrixXd& w, double threshold, std::size_t bin_width) {
        const auto h = pool_histogram({w, 0, 1}, threshold, bin_width);
        return py::make_tuple(h.pool_sizes, h.counts);
      },
      py::arg("weights"), py::arg("threshold"), py::arg("bin_width") = 1, "Returns (pool sizes, bin counts).");
  m.def(
      "pool_rms_radius",
      [](const Eigen::MatrixXd& w, std::size_t post, double threshold, const Eigen::Ref<const RowMatrix>& pre_xyz) {
        return pool_rms_radius({w, 0, 1}, post, threshold, geometry_from(pre_xyz));
      },
      py::arg("weights"), py::arg("post"), py::arg("threshold"), py::arg("pre_positions"));
  m.def(
      "tuning_curves",
      [](const Eigen::MatrixXd& responses, const std::vector<int>& labels) {
        return curves_array(tuning_curves(responses, labels));
      },
      py::arg("responses"), py::arg("labels"), "Per-unit max-normalized class means, shape (units, 10).");
  m.def(
      "cluster_map",
      [](const Eigen::Ref<const RowMatrix>& curves, const Eigen::Ref<const RowMatrix>& xyz, std::size_t k) {
        const auto map = cluster_map(curves_from(curves), geometry_from(xyz), k);
        return py::make_tuple(map.labels, map.coherence);
      },
      py::arg("curves"), py::arg("positions"), py::arg("k") = 8, "Returns (labels, coherence or None).");
  m.def(
      "coherence_baseline",
      [](const std::vector<int>& labels, const Eigen::Ref<const RowMatrix>& xyz, std::size_t trials,
         std::uint64_t seed, std::size_t k) {
        const auto b = coherence_baseline(labels, geometry_from(xyz), trials, seed, k);
        return py::make_tuple(b.mean, b.stddev);
      },
      py::arg("labels"), py::arg("positions"), py::arg("trials") = 200, py::arg("seed") = 1, py::arg("k") = 8);
  m.def(
      "wave_metrics",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& raster,
         const Eigen::Ref<const RowMatrix>& xyz, double link_radius) {
        return frames_dict(wave_metrics(raster_from(raster), geometry_from(xyz), link_radius));
      },
      py::arg("raster"), py::arg("positions"), py::arg("link_radius"),
      "Per-step active fraction, centroid (NaN when silent) and component count.");
  m.def(
      "min_window_displacement",
      [](const py::dict& frames, std::size_t begin, std::size_t window) {
        return min_window_displacement(frames_from(frames), begin, window);
      },
      py::arg("frames"), py::arg("begin"), py::arg("window"));
  m.def(
      "summarize_wave",
      [](const py::dict& frames, std::size_t warmup, std::size_t window) {
        const auto s = summarize_wave(frames_from(frames), warmup, window);
        py::dict d;
        d["regime"] = to_string(s.regime);
        d["mean_fraction"] = s.mean_fraction;
        d["min_fraction"] = s.min_fraction;
        d["max_fraction"] = s.max_fraction;
        d["median_components"] = s.median_components;
        d["component_stddev"] = s.component_stddev;
        d["min_displacement"] = s.min_displacement;
        return d;
      },
      py::arg("frames"), py::arg("warmup"), py::arg("window"));

  // MNIST and readout
  m.def(
      "load_mnist_idx",
      [](const std::string& images, const std::string& labels) {
        const auto d = load_mnist_idx(images, labels);
        py::array_t<std::uint8_t> img({d.size(), d.rows, d.cols});
        auto* out = img.mutable_data();
        for (const auto& im : d.images) out = std::copy(im.begin(), im.end(), out);
        return py::make_tuple(img, py::array(py::cast(d.labels)));
      },
      py::arg("images_path"), py::arg("labels_path"), "Returns (uint8 images (n, rows, cols), labels).");
  m.def(
      "encode_frame",
      [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image, double gain) {
        return encode_frame({image.data(), static_cast<std::size_t>(image.size())}, static_cast<std::size_t>(image.size()),
                            gain);
      },
      py::arg("image"), py::arg("gain") = 1.0);

  py::class_<LinearClassifier>(m, "LinearClassifier")
      .def_static("from_json", &LinearClassifier::from_json, py::arg("text"))
      .def("to_json", &LinearClassifier::to_json)
      .def("predict", &LinearClassifier::predict, py::arg("features"))
      .def("score", [](const LinearClassifier& c, const Eigen::MatrixXd& x, const std::vector<int>& y) {
        return evaluate(c, x, y);
      }, py::arg("features"), py::arg("labels"))
      .def_readonly("classes", &LinearClassifier::classes)
      .def_readonly("weights", &LinearClassifier::weights)
      .def_readonly("bias", &LinearClassifier::bias);
  m.def(
      "train_readout",
      [](const Eigen::MatrixXd& x, const std::vector<int>& y, double l2, int epochs, double lr) {
        py::gil_scoped_release release;
        return train_readout(x, y, {l2, epochs, lr});
      },
      py::arg("features"), py::arg("labels"), py::arg("l2") = 1e-3, py::arg("epochs") = 500, py::arg("lr") = 0.5);

  m.def(
      "run_mnist_experiment",
      [](const ToolkitConfig& cfg) {
        MnistExperiment ex;
        {
          py::gil_scoped_release release;
          const auto splits = load_mnist_splits(cfg);
          ex = run_mnist_experiment(cfg, splits.train, splits.test);
        }
        py::dict d;
        d["train_accuracy"] = ex.train_accuracy;
        d["test_accuracy"] = ex.test_accuracy;
        d["train_rates"] = ex.train_rates;
        d["test_rates"] = ex.test_rates;
        d["train_labels"] = ex.train_labels;
        d["test_labels"] = ex.test_labels;
        d["tuning"] = curves_array(ex.tuning);
        d["cluster_labels"] = ex.clusters.labels;
        d["coherence"] = ex.clusters.coherence;
        std::vector<Eigen::MatrixXd> weights;
        for (const auto& w : ex.weights) weights.push_back(w.w);
        d["weights"] = weights;
        d["classifier"] = ex.classifier;
        return d;
      },
      py::arg("config"), "Self-organize on task.mnist training images, then fit and score the readout.");

  // exports
  m.def("read_matrix_csv", [](const std::string& path) {
    const auto f = read_matrix_csv(path);
    return py::make_tuple(f.matrix, f.step);
  }, py::arg("path"), "Returns (matrix, step).");
  m.def("write_matrix_csv", &write_matrix_csv, py::arg("path"), py::arg("matrix"), py::arg("step"));
}
