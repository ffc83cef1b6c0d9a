#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "wavesnn/topology.hpp"

namespace wavesnn {

/// Leaky integrate-and-fire parameters with a homeostatic threshold.
struct LifParams {
  double tau_v = 1.0;
  double tau_theta = 5.0;
  double v_th = 1.0;
  double theta_plus = 1.0;
  double v_reset = 0.0;

  void validate() const;
};

/// Voltages, thresholds and spike flags of one layer at one time-level.
///
/// `spikes` holds H(v - theta) from the last detection pass as 0/1 values; it is
/// the spike vector the dynamics see until the next detection.
struct LayerState {
  Eigen::VectorXd v;
  Eigen::VectorXd theta;
  Eigen::VectorXd spikes;
  double t = 0.0;

  /// v = 0, theta = v_th, no spikes.
  static LayerState resting(std::size_t n, const LifParams& params, double t = 0.0);
  /// Builds a state whose spike flags are H(v - theta) of the given values.
  static LayerState from_values(Eigen::VectorXd v, Eigen::VectorXd theta, double t = 0.0);

  std::size_t size() const noexcept { return static_cast<std::size_t>(v.size()); }
  void validate(int layer = -1) const;
};

struct Derivatives {
  Eigen::VectorXd dv;
  Eigen::VectorXd dtheta;
};

/// The right-hand side terms held fixed during one integration step: the
/// coupling current S*H + S^x*x and the spike vector H that gates the threshold.
struct FrozenInputs {
  Eigen::VectorXd drive;
  Eigen::VectorXd spikes;
};

FrozenInputs freeze_inputs(const LayerState& state, const AdjacencyMatrix& adjacency,
                           const AdjacencyMatrix& spike_input, const Eigen::VectorXd& x);

/// dv     = -v / tau_v + drive
/// dtheta = theta_plus                      where spiking
///        = -(theta - v_th) / tau_theta     elsewhere
Derivatives lif_rhs(const Eigen::VectorXd& v, const Eigen::VectorXd& theta, const FrozenInputs& inputs,
                    const LifParams& params);

Derivatives lif_rhs(const LayerState& state, const AdjacencyMatrix& adjacency,
                    const AdjacencyMatrix& spike_input, const Eigen::VectorXd& x, const LifParams& params);

/// Classical four-stage Runge-Kutta advance of (v, theta) by dt with the inputs
/// frozen. Advances t; leaves `spikes` unchanged. Throws InstabilityError when
/// the result is not finite; `layer` only labels the diagnostic.
LayerState rk4_step(const LayerState& state, const FrozenInputs& inputs, double dt, const LifParams& params,
                    int layer = -1);

LayerState rk4_step(const LayerState& state, const AdjacencyMatrix& adjacency, const AdjacencyMatrix& spike_input,
                    const Eigen::VectorXd& x, double dt, const LifParams& params);

/// spikes[i] = (v[i] >= theta[i]); spiking voltages are set to v_reset and the
/// state's spike flags are replaced. Returns the new spike vector.
Eigen::VectorXd detect_spikes_and_reset(LayerState& state, const LifParams& params, int layer = -1);

/// Indices with a nonzero entry, ascending.
std::vector<std::size_t> active_indices(const Eigen::VectorXd& spikes);

}  // namespace wavesnn
