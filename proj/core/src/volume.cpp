#include "pgps/volume.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "pgps/errors.hpp"
#include "pgps/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "file I/O assumes a little-endian host");

namespace pgps {
namespace {

constexpr std::size_t kMagicLen = 16;
constexpr char kVolumeMagic[8] = {'P', 'G', 'P', 'S', 'V', 'O', 'L', '1'};
constexpr char kLabelMagic[8] = {'P', 'G', 'P', 'S', 'L', 'A', 'B', '1'};

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& what, std::uint64_t offset) {
  throw format_error(path.string() + ": " + what + " at byte offset " +
                     std::to_string(offset));
}

void read_exact(std::ifstream& in, const std::filesystem::path& path,
                char* out, std::size_t len, std::uint64_t offset) {
  in.read(out, static_cast<std::streamsize>(len));
  if (in.gcount() != static_cast<std::streamsize>(len))
    fail(path, "truncated payload",
         offset + static_cast<std::uint64_t>(std::max<std::streamsize>(in.gcount(), 0)));
}

std::uint64_t read_u64(std::ifstream& in, const std::filesystem::path& path,
                       std::uint64_t offset) {
  std::uint64_t value = 0;
  read_exact(in, path, reinterpret_cast<char*>(&value), sizeof(value), offset);
  return value;
}

std::array<std::uint64_t, 3> read_header(std::ifstream& in,
                                         const std::filesystem::path& path,
                                         const char* magic,
                                         std::uint64_t& offset) {
  char buf[kMagicLen] = {};
  read_exact(in, path, buf, kMagicLen, 0);
  if (std::memcmp(buf, magic, 8) != 0) fail(path, "bad magic", 0);
  offset = kMagicLen;

  std::array<std::uint64_t, 3> shape{};
  for (int axis = 0; axis < 3; ++axis) {
    shape[axis] = read_u64(in, path, offset);
    if (shape[axis] == 0) fail(path, "zero dimension", offset);
    offset += 8;
  }
  std::uint64_t count = 0;
  std::uint64_t tmp = 0;
  if (__builtin_mul_overflow(shape[0], shape[1], &tmp) ||
      __builtin_mul_overflow(tmp, shape[2], &count) ||
      count > std::numeric_limits<std::uint64_t>::max() / sizeof(float))
    fail(path, "dim overflow", kMagicLen);
  return shape;
}

void write_magic(std::ofstream& out, const char* magic) {
  char buf[kMagicLen] = {};
  std::memcpy(buf, magic, 8);
  out.write(buf, kMagicLen);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error(path.string() + ": cannot open for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw format_error(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace

Volume load_volume(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::uint64_t offset = 0;
  Volume volume;
  volume.shape = read_header(in, path, kVolumeMagic, offset);
  const std::uint64_t count = volume.voxel_count();
  volume.data.resize(count);
  in.read(reinterpret_cast<char*>(volume.data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(float)))
    fail(path, "truncated payload",
         offset + static_cast<std::uint64_t>(std::max<std::streamsize>(in.gcount(), 0)));
  for (std::uint64_t i = 0; i < count; ++i)
    if (!std::isfinite(volume.data[i]))
      fail(path, "non-finite voxel value", offset + i * sizeof(float));
  return volume;
}

void save_volume(const Volume& volume, const std::filesystem::path& path) {
  if (volume.data.size() != volume.voxel_count())
    throw contract_error("volume data length does not match its shape");
  std::ofstream out = open_out(path);
  write_magic(out, kVolumeMagic);
  out.write(reinterpret_cast<const char*>(volume.shape.data()), 3 * 8);
  out.write(reinterpret_cast<const char*>(volume.data.data()),
            static_cast<std::streamsize>(volume.data.size() * sizeof(float)));
  if (!out) throw format_error(path.string() + ": write failed");
}

LabelVolume load_labels(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::uint64_t offset = 0;
  LabelVolume labels;
  labels.shape = read_header(in, path, kLabelMagic, offset);
  labels.n_classes = read_u64(in, path, offset);
  if (labels.n_classes < 2) fail(path, "n_classes below 2", offset);
  offset += 8;
  const std::uint64_t count = labels.voxel_count();
  labels.labels.resize(count);
  in.read(reinterpret_cast<char*>(labels.labels.data()),
          static_cast<std::streamsize>(count));
  if (in.gcount() != static_cast<std::streamsize>(count))
    fail(path, "truncated payload",
         offset + static_cast<std::uint64_t>(std::max<std::streamsize>(in.gcount(), 0)));
  for (std::uint64_t i = 0; i < count; ++i)
    if (labels.labels[i] >= labels.n_classes)
      fail(path, "label out of range", offset + i);
  return labels;
}

void save_labels(const LabelVolume& labels, const std::filesystem::path& path) {
  if (labels.labels.size() != labels.voxel_count())
    throw contract_error("label data length does not match its shape");
  std::ofstream out = open_out(path);
  write_magic(out, kLabelMagic);
  out.write(reinterpret_cast<const char*>(labels.shape.data()), 3 * 8);
  out.write(reinterpret_cast<const char*>(&labels.n_classes), 8);
  out.write(reinterpret_cast<const char*>(labels.labels.data()),
            static_cast<std::streamsize>(labels.labels.size()));
  if (!out) throw format_error(path.string() + ": write failed");
}

std::pair<Volume, LabelVolume> synth_blobs(
    const std::array<std::uint64_t, 3>& shape, int n_blobs,
    std::pair<std::uint64_t, std::uint64_t> radius_range, std::uint64_t seed) {
  const auto [r_min, r_max] = radius_range;
  if (r_min == 0 || r_min > r_max)
    throw generation_error("radius range must satisfy 1 <= min <= max");
  if (n_blobs < 0) throw generation_error("blob count must be >= 0");
  for (int axis = 0; axis < 3; ++axis)
    if (shape[axis] < 2 * r_max + 1)
      throw generation_error("axis " + std::to_string(axis) + " extent " +
                             std::to_string(shape[axis]) +
                             " cannot hold a blob of radius " +
                             std::to_string(r_max));

  Volume volume;
  volume.shape = shape;
  volume.data.resize(volume.voxel_count());
  LabelVolume labels;
  labels.shape = shape;
  labels.n_classes = 2;
  labels.labels.assign(labels.voxel_count(), 0);

  RngStream noise{seed, stream_id("blob_background"), 0};
  for (float& v : volume.data) v = static_cast<float>(0.3 * noise.next_unit());

  for (int blob = 0; blob < n_blobs; ++blob) {
    RngStream rng{seed, stream_id("blob") + static_cast<std::uint64_t>(blob + 1), 0};
    std::array<std::uint64_t, 3> radius{}, center{};
    for (int axis = 0; axis < 3; ++axis) {
      radius[axis] = r_min + rng.next_below(r_max - r_min + 1);
      center[axis] =
          radius[axis] + rng.next_below(shape[axis] - 2 * radius[axis]);
    }
    const float intensity = static_cast<float>(rng.next_in(0.6, 1.0));
    for (std::uint64_t x = center[0] - radius[0]; x <= center[0] + radius[0]; ++x) {
      const double fx = (static_cast<double>(x) - static_cast<double>(center[0])) / radius[0];
      for (std::uint64_t y = center[1] - radius[1]; y <= center[1] + radius[1]; ++y) {
        const double fy = (static_cast<double>(y) - static_cast<double>(center[1])) / radius[1];
        for (std::uint64_t z = center[2] - radius[2]; z <= center[2] + radius[2]; ++z) {
          const double fz = (static_cast<double>(z) - static_cast<double>(center[2])) / radius[2];
          if (fx * fx + fy * fy + fz * fz <= 1.0) {
            volume.at(x, y, z) = intensity;
            labels.at(x, y, z) = 1;
          }
        }
      }
    }
  }
  return {std::move(volume), std::move(labels)};
}

}  // namespace pgps
