#pragma once

#include <stdexcept>
#include <string>

namespace wavesnn {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter or configuration value that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf appeared in a state or input.
///
/// `layer` is -1 when the failing call is not associated with a network layer.
class InstabilityError : public Error {
 public:
  InstabilityError(int layer, long neuron, double t, const std::string& detail);

  int layer() const noexcept { return layer_; }
  long neuron() const noexcept { return neuron_; }
  double time() const noexcept { return t_; }

 private:
  int layer_;
  long neuron_;
  double t_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A command needs an artifact (e.g. a trained classifier) that does not exist.
class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

}  // namespace wavesnn
