#include "pgps/arch.hpp"

#include <charconv>
#include <cstdio>

#include "pgps/errors.hpp"

namespace pgps {

std::uint64_t PatchSize3D::voxel_count() const {
  std::uint64_t product = 1;
  for (std::uint64_t d : dims) {
    if (d == 0) throw contract_error("patch dimension must be >= 1");
    if (__builtin_mul_overflow(product, d, &product))
      throw contract_error("patch voxel count overflows 64 bits");
  }
  return product;
}

std::string PatchSize3D::str() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%llux%llux%llu",
                static_cast<unsigned long long>(dims[0]),
                static_cast<unsigned long long>(dims[1]),
                static_cast<unsigned long long>(dims[2]));
  return buf;
}

PatchSize3D parse_patch(std::string_view text) {
  PatchSize3D p;
  std::size_t start = 0;
  for (int axis = 0; axis < 3; ++axis) {
    std::size_t end = text.find_first_of("x*X", start);
    if ((axis < 2) == (end == std::string_view::npos))
      throw config_error("patch size must have form WxHxD, got '" +
                         std::string(text) + "'");
    std::string_view part = text.substr(
        start, end == std::string_view::npos ? end : end - start);
    std::uint64_t value = 0;
    auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || value == 0)
      throw config_error("patch size component '" + std::string(part) +
                         "' is not a positive integer");
    p.dims[axis] = value;
    start = end + 1;
  }
  p.voxel_count();  // overflow check
  return p;
}

void validate(const ArchitectureSpec& spec) {
  for (int axis = 0; axis < 3; ++axis) {
    int n = spec.poolings_per_axis[axis];
    if (n < 0 || n > 8)
      throw contract_error("pooling count for axis " + std::to_string(axis) +
                           " must be in [0, 8], got " + std::to_string(n));
  }
  if (spec.min_patch_override) spec.min_patch_override->voxel_count();
}

std::array<std::uint64_t, 3> axis_steps(const ArchitectureSpec& spec) {
  validate(spec);
  std::array<std::uint64_t, 3> steps{};
  for (int axis = 0; axis < 3; ++axis)
    steps[axis] = std::uint64_t{1} << spec.poolings_per_axis[axis];
  return steps;
}

PatchSize3D min_patch(const ArchitectureSpec& spec) {
  if (spec.min_patch_override) {
    validate(spec);
    return *spec.min_patch_override;
  }
  auto steps = axis_steps(spec);
  return PatchSize3D{{2 * steps[0], steps[1], steps[2]}};
}

bool is_legal_patch(const ArchitectureSpec& spec, const PatchSize3D& p) {
  auto steps = axis_steps(spec);
  PatchSize3D minimal = min_patch(spec);
  for (int axis = 0; axis < 3; ++axis) {
    if (p.dims[axis] == 0 || p.dims[axis] % steps[axis] != 0) return false;
    if (p.dims[axis] < minimal.dims[axis]) return false;
  }
  return true;
}

ArchitectureSpec arch_from_json(const nlohmann::json& j) {
  ArchitectureSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    auto poolings = j.at("poolings_per_axis");
    if (!poolings.is_array() || poolings.size() != 3)
      throw config_error("poolings_per_axis must be an array of 3");
    for (int axis = 0; axis < 3; ++axis)
      spec.poolings_per_axis[axis] = poolings.at(axis).get<int>();
    if (j.contains("min_patch_override")) {
      auto over = j.at("min_patch_override");
      if (!over.is_array() || over.size() != 3)
        throw config_error("min_patch_override must be an array of 3");
      PatchSize3D p;
      for (int axis = 0; axis < 3; ++axis)
        p.dims[axis] = over.at(axis).get<std::uint64_t>();
      spec.min_patch_override = p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("invalid architecture document: ") +
                       e.what());
  }
  validate(spec);
  return spec;
}

nlohmann::json to_json(const ArchitectureSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["poolings_per_axis"] = spec.poolings_per_axis;
  if (spec.min_patch_override)
    j["min_patch_override"] = spec.min_patch_override->dims;
  return j;
}

}  // namespace pgps
