#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavesnn/errors.hpp"

namespace wavesnn {

/// Grayscale images (row-major, 0..255) with digit labels.
struct LabeledDataset {
  std::size_t rows = 28;
  std::size_t cols = 28;
  std::vector<std::vector<std::uint8_t>> images;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  /// First `count` examples (or all when fewer).
  LabeledDataset head(std::size_t count) const;
  /// Examples [begin, begin + count).
  LabeledDataset slice(std::size_t begin, std::size_t count) const;
};

enum class IdxErrorKind { io, bad_magic, truncated, count_mismatch, bad_dimensions };

class IdxError : public IoError {
 public:
  IdxError(IdxErrorKind kind, const std::string& message) : IoError(message), kind_(kind) {}
  IdxErrorKind kind() const noexcept { return kind_; }

 private:
  IdxErrorKind kind_;
};

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX3 image file and an IDX1 label file (big-endian headers).
LabeledDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

/// Writes the dataset in the same IDX layout.
void write_mnist_idx(const LabeledDataset& data, const std::string& images_path, const std::string& labels_path);

/// x_i = gain * pixel_i / 255 in row-major order.
Eigen::VectorXd encode_frame(std::span<const std::uint8_t> image, std::size_t expected_size, double gain);

}  // namespace wavesnn
