#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgps/arch.hpp"
#include "pgps/rng.hpp"
#include "pgps/volume.hpp"

namespace pgps {

/// One patch extraction request. The stream advances across calls, so a
/// request handle replays the exact same patch sequence for a fixed seed.
struct PatchRequest {
  PatchSize3D size;
  bool force_foreground = false;
  RngStream rng;
};

struct SampledPatch {
  Volume patch;
  LabelVolume labels;
  /// Patch origin in volume coordinates; negative when the patch extends
  /// past the volume and zero padding was applied.
  std::array<std::int64_t, 3> origin{};
  bool forced = false;
};

/// Linear indices of all non-background voxels, in layout order.
std::vector<std::uint64_t> foreground_indices(const LabelVolume& labels);

/// Extracts one patch of exactly req.size voxels. With force_foreground and
/// a non-empty label map, a uniformly random foreground voxel becomes the
/// patch center, clamped so the patch keeps maximal overlap with the
/// volume; otherwise the origin is uniform over all maximal-overlap
/// positions. Out-of-bounds regions are zero padded (label 0).
///
/// fg_cache, when non-empty, must equal foreground_indices(labels); it
/// saves the per-call scan in training loops.
SampledPatch sample_patch(const Volume& volume, const LabelVolume& labels,
                          PatchRequest& req,
                          std::span<const std::uint64_t> fg_cache = {});

/// Deterministic extraction at a fixed origin (may be negative or reach
/// past the volume; outside voxels are zero / label 0). Used for tiled
/// full-volume inference.
SampledPatch extract_patch(const Volume& volume, const LabelVolume& labels,
                           const std::array<std::int64_t, 3>& origin,
                           const PatchSize3D& size);

/// ceil(batch/2) forced-foreground patches followed by unconstrained ones,
/// all drawn from one stream in a fixed order.
std::vector<SampledPatch> compose_batch(
    const Volume& volume, const LabelVolume& labels, const PatchSize3D& size,
    std::uint64_t batch, RngStream& rng,
    std::span<const std::uint64_t> fg_cache = {});

}  // namespace pgps
