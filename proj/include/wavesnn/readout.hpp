#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wavesnn {

struct ReadoutHyper {
  double l2 = 1e-3;
  int epochs = 500;
  double lr = 0.5;
};

/// Multinomial logistic regression on standardized features.
struct LinearClassifier {
  std::vector<int> classes;   // sorted class labels, one per output row
  Eigen::VectorXd mean;       // per-feature standardization
  Eigen::VectorXd scale;
  Eigen::MatrixXd weights;    // classes x features
  Eigen::VectorXd bias;       // classes

  /// Class scores for a samples x features matrix.
  Eigen::MatrixXd logits(const Eigen::MatrixXd& features) const;
  std::vector<int> predict(const Eigen::MatrixXd& features) const;

  std::string to_json() const;
  static LinearClassifier from_json(const std::string& text);
};

/// Full-batch gradient descent on mean cross-entropy + (l2 / 2) * |W|^2.
/// `features` is samples x features. Throws ValidationError when fewer than two
/// classes are present.
LinearClassifier train_readout(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                               const ReadoutHyper& hyper = {});

/// Fraction of samples classified correctly.
double evaluate(const LinearClassifier& classifier, const Eigen::MatrixXd& features, const std::vector<int>& labels);

}  // namespace wavesnn
