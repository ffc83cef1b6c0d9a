#include "wavesnn/plasticity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wavesnn/errors.hpp"

namespace wavesnn {

namespace {

void require_finite(const Eigen::VectorXd& x, const char* op) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i])) throw InstabilityError(-1, static_cast<long>(i), 0.0, std::string(op) + " input");
}

}  // namespace

void CompetitionRule::validate() const {
  if (kind == CompetitionKind::k_best && k < 1) throw ValidationError("CompetitionRule: k must be >= 1");
}

void PlasticityParams::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("PlasticityParams: eta must be >= 0");
  if (!(w_max > 0.0) || !std::isfinite(w_max)) throw ValidationError("PlasticityParams: w_max must be > 0");
  if (!(row_sum_target >= 0.0)) throw ValidationError("PlasticityParams: row_sum_target must be >= 0");
}

void stdp_update(WeightMatrix& weights, const Eigen::VectorXd& y_pre, const Eigen::VectorXd& y_post, double dt,
                 const PlasticityParams& params) {
  auto& w = weights.w;
  if (y_pre.size() != w.cols() || y_post.size() != w.rows())
    throw DimensionError("stdp_update: W is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                         " but y_post/y_pre have lengths " + std::to_string(y_post.size()) + "/" +
                         std::to_string(y_pre.size()));
  const double rate = dt * params.eta;
  if (rate == 0.0) return;

  std::vector<Eigen::Index> pre;
  for (Eigen::Index j = 0; j < y_pre.size(); ++j)
    if (y_pre[j] != 0.0) pre.push_back(j);
  if (pre.empty()) return;

  for (Eigen::Index i = 0; i < y_post.size(); ++i) {
    const double post = y_post[i];
    if (post == 0.0) continue;
    for (const auto j : pre) {
      double& entry = w(i, j);
      entry += rate * post * y_pre[j];
      if (params.clamp) entry = std::clamp(entry, 0.0, params.w_max);
    }
    if (params.row_sum_target > 0.0) {
      // divisive normalization of the updated row, then back inside the clamp range
      const double sum = w.row(i).sum();
      if (sum > 0.0) w.row(i) *= params.row_sum_target / sum;
      if (params.clamp) w.row(i) = w.row(i).cwiseMin(params.w_max);
    }
  }
}

void normalize_rows(Eigen::MatrixXd& w, double target) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    const double sum = w.row(i).sum();
    if (sum > 0.0) w.row(i) *= target / sum;
  }
}

Eigen::VectorXd winner_take_all(const Eigen::VectorXd& x) {
  if (x.size() == 0) throw ValidationError("winner_take_all: empty vector");
  require_finite(x, "winner_take_all");
  const double top = x.maxCoeff();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] >= top) out[i] = top;
  return out;
}

Eigen::VectorXd k_best(const Eigen::VectorXd& x, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.size());
  if (k < 1 || k > n) throw ValidationError("k_best: k must lie in [1, " + std::to_string(n) + "]");
  require_finite(x, "k_best");
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x[a] > x[b]; });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (std::size_t r = 0; r < k; ++r) out[order[r]] = x[order[r]];
  return out;
}

Eigen::VectorXd relu(const Eigen::VectorXd& z) {
  require_finite(z, "relu");
  return z.cwiseMax(0.0);
}

Eigen::VectorXd apply_competition(const Eigen::VectorXd& x, const CompetitionRule& rule) {
  switch (rule.kind) {
    case CompetitionKind::none:
      return x;
    case CompetitionKind::winner_take_all:
      return winner_take_all(x);
    case CompetitionKind::k_best:
      return k_best(x, std::min<std::size_t>(rule.k, static_cast<std::size_t>(x.size())));
  }
  return x;
}

std::string to_string(CompetitionKind kind) {
  switch (kind) {
    case CompetitionKind::none:
      return "none";
    case CompetitionKind::winner_take_all:
      return "winner_take_all";
    case CompetitionKind::k_best:
      return "k_best";
  }
  return "none";
}

CompetitionKind competition_kind_from_string(const std::string& name) {
  if (name == "none") return CompetitionKind::none;
  if (name == "winner_take_all" || name == "wta") return CompetitionKind::winner_take_all;
  if (name == "k_best") return CompetitionKind::k_best;
  throw ValidationError("unknown competition rule '" + name + "' (expected none, winner_take_all or k_best)");
}

}  // namespace wavesnn
