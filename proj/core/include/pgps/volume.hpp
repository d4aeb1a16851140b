#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace pgps {

/// Dense 3D scalar image, row-major with the depth axis fastest:
/// index(x, y, z) = (x * h + y) * d + z for shape (w, h, d).
struct Volume {
  std::array<std::uint64_t, 3> shape{};
  std::vector<float> data;

  std::uint64_t voxel_count() const {
    return shape[0] * shape[1] * shape[2];
  }
  std::size_t index(std::uint64_t x, std::uint64_t y, std::uint64_t z) const {
    return static_cast<std::size_t>((x * shape[1] + y) * shape[2] + z);
  }
  float at(std::uint64_t x, std::uint64_t y, std::uint64_t z) const {
    return data[index(x, y, z)];
  }
  float& at(std::uint64_t x, std::uint64_t y, std::uint64_t z) {
    return data[index(x, y, z)];
  }
  bool operator==(const Volume&) const = default;
};

/// Integer label map sharing Volume's layout. Labels are < n_classes;
/// label 0 is background.
struct LabelVolume {
  std::array<std::uint64_t, 3> shape{};
  std::vector<std::uint8_t> labels;
  std::uint64_t n_classes = 2;

  std::uint64_t voxel_count() const {
    return shape[0] * shape[1] * shape[2];
  }
  std::size_t index(std::uint64_t x, std::uint64_t y, std::uint64_t z) const {
    return static_cast<std::size_t>((x * shape[1] + y) * shape[2] + z);
  }
  std::uint8_t at(std::uint64_t x, std::uint64_t y, std::uint64_t z) const {
    return labels[index(x, y, z)];
  }
  std::uint8_t& at(std::uint64_t x, std::uint64_t y, std::uint64_t z) {
    return labels[index(x, y, z)];
  }
  bool operator==(const LabelVolume&) const = default;
};

// File format (all integers little-endian):
//   volume: 16-byte magic "PGPSVOL1" (zero padded), 3 x u64 dims,
//           then w*h*d raw float32 values.
//   labels: 16-byte magic "PGPSLAB1" (zero padded), 3 x u64 dims,
//           u64 n_classes, then w*h*d raw bytes.
// Round-trips are bit-exact. Malformed files raise format_error naming the
// byte offset of the problem.

Volume load_volume(const std::filesystem::path& path);
void save_volume(const Volume& volume, const std::filesystem::path& path);

LabelVolume load_labels(const std::filesystem::path& path);
void save_labels(const LabelVolume& labels, const std::filesystem::path& path);

/// Deterministic synthetic segmentation task: low-intensity pseudo-noise
/// background (values in [0, 0.3]) with n_blobs axis-aligned ellipsoids of
/// intensity in [0.6, 1.0] labelled 1. Radii are drawn per axis from
/// radius_range (inclusive). Throws generation_error when no blob of the
/// maximal radius fits inside the shape.
std::pair<Volume, LabelVolume> synth_blobs(
    const std::array<std::uint64_t, 3>& shape, int n_blobs,
    std::pair<std::uint64_t, std::uint64_t> radius_range, std::uint64_t seed);

}  // namespace pgps
