#include "wavesnn/lif.hpp"

#include <cmath>
#include <string>

#include "wavesnn/errors.hpp"

namespace wavesnn {

namespace {

long first_non_finite(const Eigen::VectorXd& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i])) return static_cast<long>(i);
  return -1;
}

void require_finite(const Eigen::VectorXd& x, const char* what, int layer, double t) {
  if (const long i = first_non_finite(x); i >= 0) throw InstabilityError(layer, i, t, what);
}

void require_size(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want)
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                         std::to_string(got));
}

}  // namespace

void LifParams::validate() const {
  if (!(tau_v > 0.0)) throw ValidationError("LifParams: tau_v must be > 0");
  if (!(tau_theta > 0.0)) throw ValidationError("LifParams: tau_theta must be > 0");
  if (!(theta_plus >= 0.0)) throw ValidationError("LifParams: theta_plus must be >= 0");
  if (!std::isfinite(v_th) || !std::isfinite(v_reset)) throw ValidationError("LifParams: values must be finite");
  if (!(v_reset < v_th)) throw ValidationError("LifParams: v_reset must be < v_th");
}

LayerState LayerState::resting(std::size_t n, const LifParams& params, double t) {
  const auto m = static_cast<Eigen::Index>(n);
  return LayerState{Eigen::VectorXd::Zero(m), Eigen::VectorXd::Constant(m, params.v_th), Eigen::VectorXd::Zero(m),
                    t};
}

LayerState LayerState::from_values(Eigen::VectorXd v, Eigen::VectorXd theta, double t) {
  require_size(theta.size(), v.size(), "LayerState theta");
  Eigen::VectorXd spikes = (v.array() >= theta.array()).cast<double>().matrix();
  return LayerState{std::move(v), std::move(theta), std::move(spikes), t};
}

void LayerState::validate(int layer) const {
  require_size(theta.size(), v.size(), "LayerState theta");
  require_size(spikes.size(), v.size(), "LayerState spikes");
  require_finite(v, "voltage", layer, t);
  require_finite(theta, "threshold", layer, t);
  if (!std::isfinite(t)) throw InstabilityError(layer, -1, t, "time");
}

FrozenInputs freeze_inputs(const LayerState& state, const AdjacencyMatrix& adjacency,
                           const AdjacencyMatrix& spike_input, const Eigen::VectorXd& x) {
  const auto n = static_cast<Eigen::Index>(state.size());
  if (adjacency.rows() != n || adjacency.cols() != n)
    throw DimensionError("lif_rhs: adjacency must be " + std::to_string(n) + "x" + std::to_string(n));
  if (spike_input.rows() != n || spike_input.cols() != n)
    throw DimensionError("lif_rhs: spike input matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  require_size(x.size(), n, "lif_rhs input");
  require_finite(x, "input current", -1, state.t);
  return FrozenInputs{adjacency * state.spikes + spike_input * x, state.spikes};
}

Derivatives lif_rhs(const Eigen::VectorXd& v, const Eigen::VectorXd& theta, const FrozenInputs& inputs,
                    const LifParams& params) {
  const auto n = v.size();
  require_size(theta.size(), n, "lif_rhs theta");
  require_size(inputs.drive.size(), n, "lif_rhs drive");
  require_size(inputs.spikes.size(), n, "lif_rhs spikes");
  Derivatives d{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  d.dv = -v / params.tau_v + inputs.drive;
  for (Eigen::Index i = 0; i < n; ++i)
    d.dtheta[i] = inputs.spikes[i] != 0.0 ? params.theta_plus : -(theta[i] - params.v_th) / params.tau_theta;
  return d;
}

Derivatives lif_rhs(const LayerState& state, const AdjacencyMatrix& adjacency,
                    const AdjacencyMatrix& spike_input, const Eigen::VectorXd& x, const LifParams& params) {
  state.validate();
  return lif_rhs(state.v, state.theta, freeze_inputs(state, adjacency, spike_input, x), params);
}

LayerState rk4_step(const LayerState& state, const FrozenInputs& inputs, double dt, const LifParams& params,
                    int layer) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("rk4_step: dt must be finite and > 0");
  require_finite(inputs.drive, "input drive", layer, state.t);

  const double half = 0.5 * dt;
  const auto k1 = lif_rhs(state.v, state.theta, inputs, params);
  const auto k2 = lif_rhs(state.v + half * k1.dv, state.theta + half * k1.dtheta, inputs, params);
  const auto k3 = lif_rhs(state.v + half * k2.dv, state.theta + half * k2.dtheta, inputs, params);
  const auto k4 = lif_rhs(state.v + dt * k3.dv, state.theta + dt * k3.dtheta, inputs, params);

  LayerState next = state;
  next.v += (dt / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  next.theta += (dt / 6.0) * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
  next.t = state.t + dt;

  const char* hint = "integration diverged; reduce dt";
  if (const long i = first_non_finite(next.v); i >= 0) throw InstabilityError(layer, i, next.t, hint);
  if (const long i = first_non_finite(next.theta); i >= 0) throw InstabilityError(layer, i, next.t, hint);
  return next;
}

LayerState rk4_step(const LayerState& state, const AdjacencyMatrix& adjacency, const AdjacencyMatrix& spike_input,
                    const Eigen::VectorXd& x, double dt, const LifParams& params) {
  state.validate();
  return rk4_step(state, freeze_inputs(state, adjacency, spike_input, x), dt, params);
}

Eigen::VectorXd detect_spikes_and_reset(LayerState& state, const LifParams& params, int layer) {
  state.validate(layer);
  const auto n = state.v.size();
  Eigen::VectorXd spikes(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool fire = state.v[i] >= state.theta[i];
    spikes[i] = fire ? 1.0 : 0.0;
    if (fire) state.v[i] = params.v_reset;
  }
  state.spikes = spikes;
  return spikes;
}

std::vector<std::size_t> active_indices(const Eigen::VectorXd& spikes) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < spikes.size(); ++i)
    if (spikes[i] != 0.0) out.push_back(static_cast<std::size_t>(i));
  return out;
}

}  // namespace wavesnn
