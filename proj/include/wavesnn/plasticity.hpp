#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace wavesnn {

/// Inter-layer weights stored post x pre, so the forward pass is W * y_pre.
struct WeightMatrix {
  Eigen::MatrixXd w;
  int pre_layer = 0;
  int post_layer = 1;

  std::size_t n_post() const noexcept { return static_cast<std::size_t>(w.rows()); }
  std::size_t n_pre() const noexcept { return static_cast<std::size_t>(w.cols()); }
};

enum class CompetitionKind { none, winner_take_all, k_best };

struct CompetitionRule {
  CompetitionKind kind = CompetitionKind::none;
  std::size_t k = 1;

  void validate() const;
  friend bool operator==(const CompetitionRule&, const CompetitionRule&) = default;
};

struct PlasticityParams {
  double eta = 0.1;
  double w_max = 1.0;
  bool clamp = true;
  /// When > 0, a post-neuron's incoming weights are rescaled to this sum
  /// whenever they change (divisive normalization), then re-clamped.
  double row_sum_target = 0.0;

  void validate() const;
};

/// W' = W + dt * eta * (y_post outer y_pre), then clamped to [0, w_max] when
/// `clamp` is set. With `row_sum_target` > 0 every row that had a post spike is
/// rescaled to that sum and clamped again. Rows without a post spike never change.
void stdp_update(WeightMatrix& weights, const Eigen::VectorXd& y_pre, const Eigen::VectorXd& y_post, double dt,
                 const PlasticityParams& params);

/// Rescales every row with a positive sum to `target`.
void normalize_rows(Eigen::MatrixXd& w, double target);

/// Entries below max(x) become 0; entries equal to max(x) keep max(x).
Eigen::VectorXd winner_take_all(const Eigen::VectorXd& x);

/// Keeps the k largest entries (own values), ties at rank k go to the lowest index.
Eigen::VectorXd k_best(const Eigen::VectorXd& x, std::size_t k);

Eigen::VectorXd relu(const Eigen::VectorXd& z);

Eigen::VectorXd apply_competition(const Eigen::VectorXd& x, const CompetitionRule& rule);

std::string to_string(CompetitionKind kind);
CompetitionKind competition_kind_from_string(const std::string& name);

}  // namespace wavesnn
