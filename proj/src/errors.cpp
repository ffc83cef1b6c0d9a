#include "wavesnn/errors.hpp"

#include <sstream>

namespace wavesnn {

namespace {

std::string describe(int layer, long neuron, double t, const std::string& detail) {
  std::ostringstream os;
  os << "non-finite value";
  if (layer >= 0) os << " in layer " << layer;
  if (neuron >= 0) os << " at neuron " << neuron;
  os << " (t=" << t << ")";
  if (!detail.empty()) os << ": " << detail;
  return os.str();
}

}  // namespace

InstabilityError::InstabilityError(int layer, long neuron, double t, const std::string& detail)
    : Error(describe(layer, neuron, t, detail)), layer_(layer), neuron_(neuron), t_(t) {}

}  // namespace wavesnn
