#include "wavesnn/mnist.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace wavesnn {

namespace {

std::vector<std::uint8_t> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxErrorKind::io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

}  // namespace

LabeledDataset LabeledDataset::head(std::size_t count) const { return slice(0, count); }

LabeledDataset LabeledDataset::slice(std::size_t begin, std::size_t count) const {
  LabeledDataset out;
  out.rows = rows;
  out.cols = cols;
  const auto end = std::min(size(), begin + count);
  for (auto i = begin; i < end; ++i) {
    out.images.push_back(images[i]);
    out.labels.push_back(labels[i]);
  }
  return out;
}

LabeledDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_all(images_path);
  const auto lab = read_all(labels_path);

  if (img.size() < 16) throw IdxError(IdxErrorKind::truncated, images_path + ": truncated header");
  if (const auto m = be32(img, 0); m != kIdxImageMagic)
    throw IdxError(IdxErrorKind::bad_magic, images_path + ": bad magic " + hex(m) + " (expected 0x00000803)");
  if (lab.size() < 8) throw IdxError(IdxErrorKind::truncated, labels_path + ": truncated header");
  if (const auto m = be32(lab, 0); m != kIdxLabelMagic)
    throw IdxError(IdxErrorKind::bad_magic, labels_path + ": bad magic " + hex(m) + " (expected 0x00000801)");

  const std::size_t count = be32(img, 4);
  const std::size_t rows = be32(img, 8);
  const std::size_t cols = be32(img, 12);
  const std::size_t label_count = be32(lab, 4);
  if (rows == 0 || cols == 0) throw IdxError(IdxErrorKind::bad_dimensions, images_path + ": zero image dimension");
  if (count != label_count)
    throw IdxError(IdxErrorKind::count_mismatch, "image count " + std::to_string(count) +
                                                     " does not match label count " + std::to_string(label_count));
  const std::size_t pixels = rows * cols;
  if (img.size() < 16 + count * pixels)
    throw IdxError(IdxErrorKind::truncated, images_path + ": payload holds fewer than " + std::to_string(count) +
                                                " images");
  if (lab.size() < 8 + count)
    throw IdxError(IdxErrorKind::truncated, labels_path + ": payload holds fewer than " + std::to_string(count) +
                                                " labels");

  LabeledDataset data;
  data.rows = rows;
  data.cols = cols;
  data.images.reserve(count);
  data.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* first = img.data() + 16 + i * pixels;
    data.images.emplace_back(first, first + pixels);
    data.labels.push_back(static_cast<int>(lab[8 + i]));
  }
  return data;
}

void write_mnist_idx(const LabeledDataset& data, const std::string& images_path, const std::string& labels_path) {
  if (data.images.size() != data.labels.size()) throw ValidationError("write_mnist_idx: images/labels differ");
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw IdxError(IdxErrorKind::io, "cannot write IDX files");
  put_be32(img, kIdxImageMagic);
  put_be32(img, static_cast<std::uint32_t>(data.size()));
  put_be32(img, static_cast<std::uint32_t>(data.rows));
  put_be32(img, static_cast<std::uint32_t>(data.cols));
  for (const auto& im : data.images) {
    if (im.size() != data.rows * data.cols) throw ValidationError("write_mnist_idx: image size mismatch");
    img.write(reinterpret_cast<const char*>(im.data()), static_cast<std::streamsize>(im.size()));
  }
  put_be32(lab, kIdxLabelMagic);
  put_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (const int l : data.labels) lab.put(static_cast<char>(l));
}

Eigen::VectorXd encode_frame(std::span<const std::uint8_t> image, std::size_t expected_size, double gain) {
  if (image.size() != expected_size)
    throw DimensionError("encode_frame: image has " + std::to_string(image.size()) + " pixels, layer has " +
                         std::to_string(expected_size) + " neurons");
  Eigen::VectorXd x(static_cast<Eigen::Index>(image.size()));
  for (std::size_t i = 0; i < image.size(); ++i) x[static_cast<Eigen::Index>(i)] = gain * (image[i] / 255.0);
  return x;
}

}  // namespace wavesnn
