#include <doctest.h>

#include <cstdint>

#include <json.hpp>

#include "pgps/arch.hpp"
#include "pgps/errors.hpp"

using namespace pgps;

TEST_SUITE("arch") {

TEST_CASE("axis steps are powers of two of the pooling counts") {
  ArchitectureSpec lung{"lung", {4, 5, 5}, std::nullopt};
  CHECK(axis_steps(lung) == std::array<std::uint64_t, 3>{16, 32, 32});

  ArchitectureSpec hippocampus{"hippocampus", {3, 3, 3}, std::nullopt};
  CHECK(axis_steps(hippocampus) == std::array<std::uint64_t, 3>{8, 8, 8});

  ArchitectureSpec prostate{"prostate", {2, 6, 6}, std::nullopt};
  CHECK(axis_steps(prostate) == std::array<std::uint64_t, 3>{4, 64, 64});

  ArchitectureSpec flat{"flat", {0, 0, 0}, std::nullopt};
  CHECK(axis_steps(flat) == std::array<std::uint64_t, 3>{1, 1, 1});
}

TEST_CASE("minimal patch is two steps on the first axis, one on the rest") {
  CHECK(min_patch({"lung", {4, 5, 5}, std::nullopt}) ==
        PatchSize3D{{32, 32, 32}});
  CHECK(min_patch({"hippocampus", {3, 3, 3}, std::nullopt}) ==
        PatchSize3D{{16, 8, 8}});
  CHECK(min_patch({"prostate", {2, 6, 6}, std::nullopt}) ==
        PatchSize3D{{8, 64, 64}});
}

TEST_CASE("an explicit minimum overrides the derived one") {
  ArchitectureSpec spec{"toy", {2, 3, 3}, PatchSize3D{{8, 8, 8}}};
  CHECK(min_patch(spec) == PatchSize3D{{8, 8, 8}});
  CHECK(axis_steps(spec) == std::array<std::uint64_t, 3>{4, 8, 8});
}

TEST_CASE("patch legality needs divisibility and the minimum") {
  ArchitectureSpec lung{"lung", {4, 5, 5}, std::nullopt};
  CHECK(is_legal_patch(lung, PatchSize3D{{80, 192, 160}}));
  CHECK(is_legal_patch(lung, PatchSize3D{{32, 32, 32}}));
  CHECK_FALSE(is_legal_patch(lung, PatchSize3D{{81, 192, 160}}));  // stride
  CHECK_FALSE(is_legal_patch(lung, PatchSize3D{{16, 32, 32}}));    // below min
  CHECK_FALSE(is_legal_patch(lung, PatchSize3D{{80, 192, 0}}));
}

TEST_CASE("pooling counts outside [0,8] are rejected") {
  CHECK_THROWS_AS(validate({"bad", {9, 0, 0}, std::nullopt}), contract_error);
  CHECK_THROWS_AS(validate({"bad", {0, -1, 0}, std::nullopt}), contract_error);
  CHECK_NOTHROW(validate({"edge", {8, 8, 8}, std::nullopt}));
}

TEST_CASE("patch strings parse with x or * separators") {
  CHECK(parse_patch("80x192x160") == PatchSize3D{{80, 192, 160}});
  CHECK(parse_patch("8*8*8") == PatchSize3D{{8, 8, 8}});
  CHECK(parse_patch("1X2X3") == PatchSize3D{{1, 2, 3}});

  CHECK_THROWS_AS(parse_patch("80x192"), config_error);
  CHECK_THROWS_AS(parse_patch("80x192x160x2"), config_error);
  CHECK_THROWS_AS(parse_patch("axbxc"), config_error);
  CHECK_THROWS_AS(parse_patch("0x8x8"), config_error);
  CHECK_THROWS_AS(parse_patch("8x-2x8"), config_error);
  CHECK_THROWS_AS(parse_patch(""), config_error);
}

TEST_CASE("voxel_count guards zero dims and 64-bit overflow") {
  CHECK(PatchSize3D{{80, 192, 160}}.voxel_count() == 2457600);
  CHECK(PatchSize3D{{1, 1, 1}}.voxel_count() == 1);
  CHECK_THROWS_AS((PatchSize3D{{0, 8, 8}}.voxel_count()), contract_error);
  const std::uint64_t big = std::uint64_t{1} << 63;
  CHECK_THROWS_AS((PatchSize3D{{big, 2, 2}}.voxel_count()), contract_error);
}

TEST_CASE("patch renders as WxHxD") {
  CHECK(PatchSize3D{{80, 192, 160}}.str() == "80x192x160");
  CHECK(parse_patch(PatchSize3D{{20, 48, 40}}.str()) ==
        PatchSize3D{{20, 48, 40}});
}

TEST_CASE("architecture survives a json round trip") {
  ArchitectureSpec spec{"toy-lung", {2, 3, 3}, PatchSize3D{{8, 8, 8}}};
  ArchitectureSpec back = arch_from_json(to_json(spec));
  CHECK(back.name == spec.name);
  CHECK(back.poolings_per_axis == spec.poolings_per_axis);
  REQUIRE(back.min_patch_override.has_value());
  CHECK(*back.min_patch_override == *spec.min_patch_override);

  ArchitectureSpec plain{"lung", {4, 5, 5}, std::nullopt};
  ArchitectureSpec back2 = arch_from_json(to_json(plain));
  CHECK(back2.name == "lung");
  CHECK_FALSE(back2.min_patch_override.has_value());
}

TEST_CASE("malformed architecture documents name the problem") {
  CHECK_THROWS_AS(arch_from_json(nlohmann::json{{"name", "x"}}), config_error);
  CHECK_THROWS_AS(
      arch_from_json(nlohmann::json{{"name", "x"},
                                    {"poolings_per_axis", {1, 2}}}),
      config_error);
  // out-of-range poolings still go through validate()
  CHECK_THROWS_AS(
      arch_from_json(nlohmann::json{{"name", "x"},
                                    {"poolings_per_axis", {9, 1, 1}}}),
      contract_error);
}

}  // TEST_SUITE
