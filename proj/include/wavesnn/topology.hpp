#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wavesnn {

using Point = std::array<double, 3>;

/// Neuron positions of one layer, in lattice units. Index order is neuron identity.
struct LayerGeometry {
  std::vector<Point> positions;
  /// Periodic extents per axis; set only for generated lattices, used when
  /// distances are computed with wraparound.
  std::optional<Point> extent;

  std::size_t size() const noexcept { return positions.size(); }
  Point centroid() const;
  void validate() const;
};

enum class ExcitationForm {
  proportional,  // a_i * D inside r_i
  constant,      // a_i inside r_i
};

struct KernelParams {
  double r_i = 3.0;
  double r_o = 4.0;
  double a_i = 1.0;
  double a_o = 1.0;
  double decay_length = 10.0;
  ExcitationForm excitation = ExcitationForm::proportional;

  void validate() const;
};

using AdjacencyMatrix = Eigen::MatrixXd;

/// Row-major width x height lattice; neuron k sits at (k % width, k / width) * spacing.
LayerGeometry grid_geometry(std::size_t width, std::size_t height, double spacing = 1.0);

/// Points (k * spacing, 0) for k < n.
LayerGeometry line_geometry(std::size_t n, double spacing = 1.0);

/// Reads coordinates from CSV: one row per neuron, columns x,y[,z]. A first
/// row that does not parse as numbers is treated as a header.
LayerGeometry load_geometry_csv(const std::string& path);

/// Euclidean distances. With `toroidal`, the minimum-image distance over the
/// geometry's extent is used (requires a generated lattice).
AdjacencyMatrix distance_matrix(const LayerGeometry& geometry, bool toroidal = false);

/// Local-excitation / global-inhibition kernel applied entrywise to distances:
///   D <  r_i        -> a_i * D   (or a_i for the constant form)
///   r_i <= D <= r_o -> 0
///   D >  r_o        -> -a_o * exp(-D / decay_length)
/// The diagonal is always zero.
AdjacencyMatrix build_adjacency(const AdjacencyMatrix& distances, const KernelParams& kernel);

/// Kernel value for a single distance (off-diagonal pair).
double kernel_value(double distance, const KernelParams& kernel);

/// gain * identity.
AdjacencyMatrix build_spike_input_matrix(std::size_t n, double gain = 1.0);

}  // namespace wavesnn
