#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pgps/arch.hpp"
#include "pgps/curriculum.hpp"

namespace pgps {

/// One reference stage: batch size and patch extent, in the
/// batch*width*height*depth convention of the reference tables.
struct FixtureStage {
  std::uint64_t batch, w, h, d;
  PatchSize3D patch() const { return PatchSize3D{{w, h, d}}; }
};

/// Reference schedule for one Medical Segmentation Decathlon task.
struct TaskFixture {
  std::string_view name;          ///< lowercase key, e.g. "lung"
  std::string_view display_name;  ///< e.g. "Lung"
  std::array<int, 3> poolings;
  std::uint64_t default_batch;
  /// False when the published batch column deviates from the backward
  /// voxel-chain rule (hippocampus); such tasks keep the published column
  /// as an override and the deviation is reported, never hidden.
  bool batch_follows_rule;
  std::vector<FixtureStage> stages;

  ArchitectureSpec arch() const;
  PatchSize3D max_patch() const { return stages.back().patch(); }
};

/// The ten embedded task tables, in fixed order.
std::span<const TaskFixture> msd_fixtures();

/// Case-sensitive lookup by key; nullptr when unknown.
const TaskFixture* find_fixture(std::string_view name);

/// Builds the task's curriculum plan. For pgps+ on tasks whose published
/// batch column deviates from the chain rule, the published column is
/// applied as an override on top of build_plan's output.
CurriculumPlan fixture_plan(const TaskFixture& task, Scheme scheme,
                            std::uint64_t total_epochs,
                            std::uint64_t iterations_per_epoch);

/// Comparison of generated schedules against one embedded table.
struct FixtureCheck {
  std::string task;
  bool patch_ok = false;
  /// 1-based stage of first patch divergence; 0 when patch_ok.
  std::size_t first_patch_divergence = 0;
  std::string patch_detail;
  bool batch_ok = false;
  /// Set when the divergence is the documented override case.
  bool batch_exception_documented = false;
  std::size_t first_batch_divergence = 0;
  std::string batch_detail;
};

/// Regenerates every schedule from its architecture and compares against
/// the given tables (normally msd_fixtures()).
std::vector<FixtureCheck> verify_fixtures(std::span<const TaskFixture> tables);

}  // namespace pgps
