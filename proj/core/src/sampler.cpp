#include "pgps/sampler.hpp"

#include <algorithm>
#include <cstring>

#include "pgps/errors.hpp"

namespace pgps {
namespace {

// Origin range giving maximal overlap along one axis: [0, dim - size] for
// patches that fit, the degenerate full-cover range [dim - size, 0]
// otherwise.
std::pair<std::int64_t, std::int64_t> origin_range(std::uint64_t dim,
                                                   std::uint64_t size) {
  auto lo = static_cast<std::int64_t>(dim) - static_cast<std::int64_t>(size);
  return lo >= 0 ? std::pair<std::int64_t, std::int64_t>{0, lo}
                 : std::pair<std::int64_t, std::int64_t>{lo, 0};
}

void copy_patch(const Volume& volume, const LabelVolume& labels,
                const std::array<std::int64_t, 3>& origin,
                const PatchSize3D& size, SampledPatch& out) {
  out.patch.shape = size.dims;
  out.patch.data.assign(size.voxel_count(), 0.0f);
  out.labels.shape = size.dims;
  out.labels.n_classes = labels.n_classes;
  out.labels.labels.assign(size.voxel_count(), 0);

  const auto w = static_cast<std::int64_t>(volume.shape[0]);
  const auto h = static_cast<std::int64_t>(volume.shape[1]);
  const auto d = static_cast<std::int64_t>(volume.shape[2]);
  // Clip the patch box against the volume, then copy contiguous z runs.
  for (std::uint64_t px = 0; px < size[0]; ++px) {
    const std::int64_t x = origin[0] + static_cast<std::int64_t>(px);
    if (x < 0 || x >= w) continue;
    for (std::uint64_t py = 0; py < size[1]; ++py) {
      const std::int64_t y = origin[1] + static_cast<std::int64_t>(py);
      if (y < 0 || y >= h) continue;
      const std::int64_t z_lo = std::max<std::int64_t>(origin[2], 0);
      const std::int64_t z_hi =
          std::min<std::int64_t>(origin[2] + static_cast<std::int64_t>(size[2]), d);
      if (z_lo >= z_hi) continue;
      const std::size_t src = volume.index(static_cast<std::uint64_t>(x),
                                           static_cast<std::uint64_t>(y),
                                           static_cast<std::uint64_t>(z_lo));
      const std::size_t dst =
          out.patch.index(px, py, static_cast<std::uint64_t>(z_lo - origin[2]));
      const std::size_t run = static_cast<std::size_t>(z_hi - z_lo);
      std::memcpy(out.patch.data.data() + dst, volume.data.data() + src,
                  run * sizeof(float));
      std::memcpy(out.labels.labels.data() + dst, labels.labels.data() + src, run);
    }
  }
}

}  // namespace

std::vector<std::uint64_t> foreground_indices(const LabelVolume& labels) {
  std::vector<std::uint64_t> indices;
  for (std::uint64_t i = 0; i < labels.labels.size(); ++i)
    if (labels.labels[i] != 0) indices.push_back(i);
  return indices;
}

SampledPatch sample_patch(const Volume& volume, const LabelVolume& labels,
                          PatchRequest& req,
                          std::span<const std::uint64_t> fg_cache) {
  if (volume.shape != labels.shape)
    throw sampler_error("volume shape " +
                        PatchSize3D{volume.shape}.str() +
                        " does not match label shape " +
                        PatchSize3D{labels.shape}.str());
  if (volume.data.size() != volume.voxel_count() ||
      labels.labels.size() != labels.voxel_count())
    throw sampler_error("volume/label payload does not match its shape");
  req.size.voxel_count();  // validates positivity

  SampledPatch out;
  std::array<std::int64_t, 3> origin{};

  std::vector<std::uint64_t> scratch;
  std::span<const std::uint64_t> fg = fg_cache;
  if (req.force_foreground && fg.empty()) {
    scratch = foreground_indices(labels);
    fg = scratch;
  }

  if (req.force_foreground && !fg.empty()) {
    // Center the patch on a uniformly random foreground voxel, then clamp
    // the origin into the maximal-overlap range. The center stays inside
    // the patch in every clamping case.
    const std::uint64_t flat = fg[req.rng.next_below(fg.size())];
    const std::array<std::uint64_t, 3> center{
        flat / (volume.shape[1] * volume.shape[2]),
        (flat / volume.shape[2]) % volume.shape[1], flat % volume.shape[2]};
    for (int axis = 0; axis < 3; ++axis) {
      const auto [lo, hi] = origin_range(volume.shape[axis], req.size[axis]);
      const std::int64_t centered = static_cast<std::int64_t>(center[axis]) -
                                    static_cast<std::int64_t>(req.size[axis] / 2);
      origin[axis] = std::clamp(centered, lo, hi);
    }
    out.forced = true;
  } else {
    for (int axis = 0; axis < 3; ++axis) {
      const auto [lo, hi] = origin_range(volume.shape[axis], req.size[axis]);
      origin[axis] =
          lo + static_cast<std::int64_t>(
                   req.rng.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
  }

  out.origin = origin;
  copy_patch(volume, labels, origin, req.size, out);
  return out;
}

SampledPatch extract_patch(const Volume& volume, const LabelVolume& labels,
                           const std::array<std::int64_t, 3>& origin,
                           const PatchSize3D& size) {
  if (volume.shape != labels.shape)
    throw sampler_error("volume shape " + PatchSize3D{volume.shape}.str() +
                        " does not match label shape " +
                        PatchSize3D{labels.shape}.str());
  size.voxel_count();  // validates positivity
  SampledPatch out;
  out.origin = origin;
  copy_patch(volume, labels, origin, size, out);
  return out;
}

std::vector<SampledPatch> compose_batch(
    const Volume& volume, const LabelVolume& labels, const PatchSize3D& size,
    std::uint64_t batch, RngStream& rng,
    std::span<const std::uint64_t> fg_cache) {
  if (batch == 0) throw sampler_error("batch must be >= 1");
  const std::uint64_t forced = (batch + 1) / 2;

  std::vector<SampledPatch> patches;
  patches.reserve(batch);
  for (std::uint64_t k = 0; k < batch; ++k) {
    PatchRequest req{size, k < forced, rng};
    patches.push_back(sample_patch(volume, labels, req, fg_cache));
    rng = req.rng;  // carry the advanced counter forward
  }
  return patches;
}

}  // namespace pgps
