#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace pgps {

/// Spatial extent of a training patch in voxels, ordered width*height*depth.
struct PatchSize3D {
  std::array<std::uint64_t, 3> dims{1, 1, 1};

  std::uint64_t& operator[](std::size_t axis) { return dims[axis]; }
  std::uint64_t operator[](std::size_t axis) const { return dims[axis]; }
  bool operator==(const PatchSize3D&) const = default;

  /// Product of dims; throws contract_error if any dim is zero or the
  /// product overflows 64 bits.
  std::uint64_t voxel_count() const;

  /// "WxHxD" rendering, e.g. "80x192x160".
  std::string str() const;
};

/// Parses "WxHxD" (also accepts '*' as separator). Throws config_error.
PatchSize3D parse_patch(std::string_view text);

/// Per-axis stride-2 downsampling counts of the segmentation network.
/// The pooling counts fix which patch sizes the network can process.
struct ArchitectureSpec {
  std::string name;
  std::array<int, 3> poolings_per_axis{};
  std::optional<PatchSize3D> min_patch_override;
};

/// Throws contract_error unless every pooling count is in [0, 8].
void validate(const ArchitectureSpec& spec);

/// Smallest legal per-axis patch increments: 2^poolings per axis.
std::array<std::uint64_t, 3> axis_steps(const ArchitectureSpec& spec);

/// Smallest patch the architecture can process: two steps on the first
/// axis, one step on the others, unless an explicit override is set.
PatchSize3D min_patch(const ArchitectureSpec& spec);

/// True iff every dim is a positive multiple of its axis step and at least
/// the corresponding min_patch dim.
bool is_legal_patch(const ArchitectureSpec& spec, const PatchSize3D& p);

/// JSON document with keys: name, poolings_per_axis (array of 3),
/// optional min_patch_override (array of 3).
ArchitectureSpec arch_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ArchitectureSpec& spec);

}  // namespace pgps
