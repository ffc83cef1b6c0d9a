#include "wavesnn/readout.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "wavesnn/errors.hpp"

namespace wavesnn {

namespace {

Eigen::MatrixXd standardize(const LinearClassifier& c, const Eigen::MatrixXd& features) {
  if (features.cols() != c.mean.size())
    throw DimensionError("readout: expected " + std::to_string(c.mean.size()) + " features, got " +
                         std::to_string(features.cols()));
  return (features.rowwise() - c.mean.transpose()).array().rowwise() / c.scale.transpose().array();
}

// Row-wise softmax, in place.
void softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double top = z.row(r).maxCoeff();
    z.row(r) = (z.row(r).array() - top).exp();
    z.row(r) /= z.row(r).sum();
  }
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Eigen::MatrixXd LinearClassifier::logits(const Eigen::MatrixXd& features) const {
  return (standardize(*this, features) * weights.transpose()).rowwise() + bias.transpose();
}

std::vector<int> LinearClassifier::predict(const Eigen::MatrixXd& features) const {
  const auto z = logits(features);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    Eigen::Index best = 0;
    z.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = classes[static_cast<std::size_t>(best)];
  }
  return out;
}

std::string LinearClassifier::to_json() const {
  nlohmann::json j;
  j["classes"] = classes;
  j["mean"] = to_vector(mean);
  j["scale"] = to_vector(scale);
  j["bias"] = to_vector(bias);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < weights.rows(); ++r) rows.push_back(to_vector(weights.row(r).transpose()));
  j["weights"] = rows;
  return j.dump();
}

LinearClassifier LinearClassifier::from_json(const std::string& text) {
  LinearClassifier c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.classes = j.at("classes").get<std::vector<int>>();
    c.mean = from_vector(j.at("mean").get<std::vector<double>>());
    c.scale = from_vector(j.at("scale").get<std::vector<double>>());
    c.bias = from_vector(j.at("bias").get<std::vector<double>>());
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    c.weights.resize(static_cast<Eigen::Index>(rows.size()), c.mean.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != c.mean.size())
        throw ValidationError("classifier weight row has the wrong length");
      c.weights.row(static_cast<Eigen::Index>(r)) = from_vector(rows[r]).transpose();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid classifier file: ") + e.what());
  }
  if (c.classes.size() != static_cast<std::size_t>(c.weights.rows()) || c.bias.size() != c.weights.rows() ||
      c.scale.size() != c.mean.size())
    throw ValidationError("invalid classifier file: inconsistent shapes");
  return c;
}

LinearClassifier train_readout(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                               const ReadoutHyper& hyper) {
  const auto n = features.rows();
  const auto d = features.cols();
  if (static_cast<std::size_t>(n) != labels.size()) throw DimensionError("train_readout: one label per row expected");
  if (n == 0 || d == 0) throw ValidationError("train_readout: empty training set");
  if (hyper.epochs < 0 || !(hyper.lr > 0.0) || !(hyper.l2 >= 0.0))
    throw ValidationError("train_readout: epochs >= 0, lr > 0 and l2 >= 0 required");

  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw ValidationError("train_readout: training set must contain at least two classes");

  LinearClassifier c;
  c.classes.assign(distinct.begin(), distinct.end());
  c.mean = features.colwise().mean().transpose();
  c.scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = (features.col(j).array() - c.mean[j]).square().mean();
    c.scale[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  const auto k = static_cast<Eigen::Index>(c.classes.size());
  c.weights = Eigen::MatrixXd::Zero(k, d);
  c.bias = Eigen::VectorXd::Zero(k);

  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto pos = std::lower_bound(c.classes.begin(), c.classes.end(), labels[static_cast<std::size_t>(r)]);
    targets(r, pos - c.classes.begin()) = 1.0;
  }

  const Eigen::MatrixXd x = standardize(c, features);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Eigen::MatrixXd p = (x * c.weights.transpose()).rowwise() + c.bias.transpose();
    softmax_rows(p);
    p -= targets;
    const Eigen::MatrixXd grad_w = inv_n * (p.transpose() * x) + hyper.l2 * c.weights;
    const Eigen::VectorXd grad_b = inv_n * p.colwise().sum().transpose();
    c.weights -= hyper.lr * grad_w;
    c.bias -= hyper.lr * grad_b;
  }
  return c;
}

double evaluate(const LinearClassifier& classifier, const Eigen::MatrixXd& features, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw DimensionError("evaluate: one label per row expected");
  if (labels.empty()) throw ValidationError("evaluate: empty set");
  const auto predicted = classifier.predict(features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace wavesnn
