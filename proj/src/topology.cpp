#include "wavesnn/topology.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "wavesnn/errors.hpp"

namespace wavesnn {

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    if (first == std::string::npos) return false;
    const auto last = cell.find_last_not_of(" \t\r");
    cell = cell.substr(first, last - first + 1);
    std::size_t used = 0;
    try {
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      return false;
    }
    if (used != cell.size()) return false;
  }
  return !out.empty();
}

}  // namespace

Point LayerGeometry::centroid() const {
  Point c{0.0, 0.0, 0.0};
  if (positions.empty()) return c;
  for (const auto& p : positions)
    for (int a = 0; a < 3; ++a) c[a] += p[a];
  for (auto& x : c) x /= static_cast<double>(positions.size());
  return c;
}

void LayerGeometry::validate() const {
  if (positions.empty()) throw ValidationError("LayerGeometry: layer must contain at least one neuron");
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (double x : positions[i])
      if (!std::isfinite(x))
        throw ValidationError("LayerGeometry: non-finite coordinate at neuron " + std::to_string(i));
}

void KernelParams::validate() const {
  if (!(r_i > 0.0)) throw ValidationError("KernelParams: r_i must be > 0");
  if (r_i > r_o) throw ValidationError("KernelParams: r_i must be <= r_o");
  if (a_i < 0.0) throw ValidationError("KernelParams: a_i must be >= 0");
  if (a_o < 0.0) throw ValidationError("KernelParams: a_o must be >= 0");
  if (!(decay_length > 0.0)) throw ValidationError("KernelParams: decay_length must be > 0");
}

LayerGeometry grid_geometry(std::size_t width, std::size_t height, double spacing) {
  if (width == 0 || height == 0) throw ValidationError("grid_geometry: width and height must be >= 1");
  if (!(spacing > 0.0)) throw ValidationError("grid_geometry: spacing must be > 0");
  LayerGeometry g;
  g.positions.reserve(width * height);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c)
      g.positions.push_back({static_cast<double>(c) * spacing, static_cast<double>(r) * spacing, 0.0});
  g.extent = Point{static_cast<double>(width) * spacing, static_cast<double>(height) * spacing, 0.0};
  return g;
}

LayerGeometry line_geometry(std::size_t n, double spacing) {
  if (n == 0) throw ValidationError("line_geometry: n must be >= 1");
  if (!(spacing > 0.0)) throw ValidationError("line_geometry: spacing must be > 0");
  LayerGeometry g;
  g.positions.reserve(n);
  for (std::size_t k = 0; k < n; ++k) g.positions.push_back({static_cast<double>(k) * spacing, 0.0, 0.0});
  g.extent = Point{static_cast<double>(n) * spacing, 0.0, 0.0};
  return g;
}

LayerGeometry load_geometry_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open geometry file: " + path);
  LayerGeometry g;
  std::string line;
  std::vector<double> row;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (g.positions.empty() && line_no == 1) continue;  // header
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected numeric x,y[,z]");
    }
    if (row.size() < 2 || row.size() > 3)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected 2 or 3 columns");
    g.positions.push_back({row[0], row[1], row.size() == 3 ? row[2] : 0.0});
  }
  g.validate();
  return g;
}

AdjacencyMatrix distance_matrix(const LayerGeometry& geometry, bool toroidal) {
  geometry.validate();
  if (toroidal && !geometry.extent)
    throw ValidationError("distance_matrix: toroidal distances need a lattice extent");
  const auto n = static_cast<Eigen::Index>(geometry.size());
  AdjacencyMatrix d = AdjacencyMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = geometry.positions[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& q = geometry.positions[static_cast<std::size_t>(j)];
      double sq = 0.0;
      for (int a = 0; a < 3; ++a) {
        double delta = std::abs(p[a] - q[a]);
        if (toroidal) {
          const double ext = (*geometry.extent)[a];
          if (ext > 0.0) delta = std::min(delta, ext - delta);
        }
        sq += delta * delta;
      }
      d(i, j) = d(j, i) = std::sqrt(sq);
    }
  }
  return d;
}

double kernel_value(double distance, const KernelParams& kernel) {
  if (distance < kernel.r_i)
    return kernel.excitation == ExcitationForm::proportional ? kernel.a_i * distance : kernel.a_i;
  if (distance > kernel.r_o) return -kernel.a_o * std::exp(-distance / kernel.decay_length);
  return 0.0;
}

AdjacencyMatrix build_adjacency(const AdjacencyMatrix& distances, const KernelParams& kernel) {
  kernel.validate();
  if (distances.rows() != distances.cols())
    throw DimensionError("build_adjacency: distance matrix must be square");
  const auto n = distances.rows();
  AdjacencyMatrix s(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = distances(i, j);
      if (!std::isfinite(d) || d < 0.0)
        throw ValidationError("build_adjacency: distances must be finite and nonnegative");
      s(i, j) = (i == j) ? 0.0 : kernel_value(d, kernel);
    }
  }
  return s;
}

AdjacencyMatrix build_spike_input_matrix(std::size_t n, double gain) {
  if (n == 0) throw ValidationError("build_spike_input_matrix: n must be >= 1");
  if (!std::isfinite(gain)) throw ValidationError("build_spike_input_matrix: gain must be finite");
  const auto m = static_cast<Eigen::Index>(n);
  return gain * AdjacencyMatrix::Identity(m, m);
}

}  // namespace wavesnn
