#include "pgps/fixtures.hpp"

#include <algorithm>

#include "pgps/errors.hpp"

namespace pgps {

ArchitectureSpec TaskFixture::arch() const {
  return ArchitectureSpec{std::string(name), poolings, std::nullopt};
}

std::span<const TaskFixture> msd_fixtures() {
  // batch*width*height*depth per stage. Batch columns are the pgps+ values;
  // raw pgps keeps the final stage's batch everywhere.
  static const std::vector<TaskFixture> tables = {
      {"brain", "Brain", {5, 5, 5}, 2, true,
       {{24, 64, 32, 32}, {12, 64, 64, 32}, {6, 64, 64, 64}, {4, 96, 64, 64},
        {3, 96, 96, 64}, {2, 96, 96, 96}, {2, 128, 96, 96}, {2, 128, 128, 96},
        {2, 128, 128, 128}}},
      {"heart", "Heart", {4, 5, 5}, 2, true,
       {{24, 32, 32, 32}, {12, 32, 64, 32}, {6, 32, 64, 64}, {4, 48, 64, 64},
        {3, 48, 96, 64}, {2, 48, 96, 96}, {2, 64, 96, 96}, {2, 64, 128, 96},
        {2, 64, 128, 128}, {2, 80, 128, 128}, {2, 80, 160, 128},
        {2, 80, 160, 160}, {2, 80, 192, 160}}},
      {"liver", "Liver", {5, 5, 5}, 2, true,
       {{24, 64, 32, 32}, {12, 64, 64, 32}, {6, 64, 64, 64}, {4, 96, 64, 64},
        {3, 96, 96, 64}, {2, 96, 96, 96}, {2, 128, 96, 96}, {2, 128, 128, 96},
        {2, 128, 128, 128}}},
      {"hippocampus", "Hippocampus", {3, 3, 3}, 9, false,
       {{24, 16, 8, 8}, {12, 16, 16, 8}, {9, 16, 16, 16}, {9, 24, 16, 16},
        {9, 24, 24, 16}, {9, 24, 24, 24}, {9, 32, 24, 24}, {9, 32, 32, 24},
        {9, 32, 32, 32}, {9, 40, 32, 32}, {9, 40, 40, 32}, {9, 40, 40, 40},
        {9, 40, 48, 40}, {9, 40, 56, 40}}},
      {"prostate", "Prostate", {2, 6, 6}, 2, true,
       {{24, 8, 64, 64}, {12, 8, 128, 64}, {6, 8, 128, 128}, {4, 12, 128, 128},
        {3, 12, 192, 128}, {2, 12, 192, 192}, {2, 16, 192, 192},
        {2, 16, 256, 192}, {2, 16, 256, 256}, {2, 20, 256, 256},
        {2, 20, 320, 256}}},
      {"lung", "Lung", {4, 5, 5}, 2, true,
       {{24, 32, 32, 32}, {12, 32, 64, 32}, {6, 32, 64, 64}, {4, 48, 64, 64},
        {3, 48, 96, 64}, {2, 48, 96, 96}, {2, 64, 96, 96}, {2, 64, 128, 96},
        {2, 64, 128, 128}, {2, 80, 128, 128}, {2, 80, 160, 128},
        {2, 80, 160, 160}, {2, 80, 192, 160}}},
      {"pancreas", "Pancreas", {3, 5, 5}, 2, true,
       {{24, 16, 32, 32}, {12, 16, 64, 32}, {6, 16, 64, 64}, {4, 24, 64, 64},
        {3, 24, 96, 64}, {2, 24, 96, 96}, {2, 32, 96, 96}, {2, 32, 128, 96},
        {2, 32, 128, 128}, {2, 40, 128, 128}, {2, 40, 160, 128},
        {2, 40, 160, 160}, {2, 40, 192, 160}, {2, 40, 192, 192},
        {2, 40, 224, 192}}},
      {"hepatic_vessel", "Hepatic Vessel", {4, 5, 5}, 2, true,
       {{24, 32, 32, 32}, {12, 32, 64, 32}, {6, 32, 64, 64}, {4, 48, 64, 64},
        {3, 48, 96, 64}, {2, 48, 96, 96}, {2, 64, 96, 96}, {2, 64, 128, 96},
        {2, 64, 128, 128}, {2, 64, 160, 128}, {2, 64, 160, 160},
        {2, 64, 192, 160}, {2, 64, 192, 192}}},
      {"spleen", "Spleen", {4, 5, 5}, 2, true,
       {{24, 32, 32, 32}, {12, 32, 64, 32}, {6, 32, 64, 64}, {4, 48, 64, 64},
        {3, 48, 96, 64}, {2, 48, 96, 96}, {2, 64, 96, 96}, {2, 64, 128, 96},
        {2, 64, 128, 128}, {2, 64, 160, 128}, {2, 64, 160, 160},
        {2, 64, 192, 160}}},
      {"colon", "Colon", {3, 5, 5}, 2, true,
       {{24, 16, 32, 32}, {12, 16, 64, 32}, {6, 16, 64, 64}, {4, 24, 64, 64},
        {3, 24, 96, 64}, {2, 24, 96, 96}, {2, 32, 96, 96}, {2, 32, 128, 96},
        {2, 32, 128, 128}, {2, 40, 128, 128}, {2, 40, 160, 128},
        {2, 40, 160, 160}, {2, 48, 160, 160}, {2, 48, 192, 160},
        {2, 56, 192, 160}}},
  };
  return tables;
}

const TaskFixture* find_fixture(std::string_view name) {
  for (const TaskFixture& task : msd_fixtures())
    if (task.name == name) return &task;
  return nullptr;
}

CurriculumPlan fixture_plan(const TaskFixture& task, Scheme scheme,
                            std::uint64_t total_epochs,
                            std::uint64_t iterations_per_epoch) {
  CurriculumPlan plan =
      build_plan(task.arch(), task.max_patch(), scheme, task.default_batch,
                 total_epochs, iterations_per_epoch);
  if (scheme == Scheme::pgps_plus && !task.batch_follows_rule) {
    // Published batch column overrides the chain rule.
    if (plan.stages.size() != task.stages.size())
      throw schedule_error("fixture override for '" + std::string(task.name) +
                           "': stage count mismatch");
    for (std::size_t k = 0; k < plan.stages.size(); ++k)
      plan.stages[k].batch = task.stages[k].batch;
  }
  return plan;
}

std::vector<FixtureCheck> verify_fixtures(std::span<const TaskFixture> tables) {
  std::vector<FixtureCheck> checks;
  checks.reserve(tables.size());
  for (const TaskFixture& task : tables) {
    FixtureCheck check;
    check.task = std::string(task.name);

    std::vector<PatchSize3D> generated = generate_stages(
        min_patch(task.arch()), task.max_patch(), axis_steps(task.arch()));

    check.patch_ok = generated.size() == task.stages.size();
    if (!check.patch_ok) {
      check.first_patch_divergence = std::min(generated.size(), task.stages.size()) + 1;
      check.patch_detail = "stage count " + std::to_string(generated.size()) +
                           " vs " + std::to_string(task.stages.size());
    } else {
      for (std::size_t k = 0; k < generated.size(); ++k) {
        if (generated[k] != task.stages[k].patch()) {
          check.patch_ok = false;
          check.first_patch_divergence = k + 1;
          check.patch_detail = "stage " + std::to_string(k + 1) + ": " +
                               generated[k].str() + " vs " +
                               task.stages[k].patch().str();
          break;
        }
      }
    }

    std::vector<std::uint64_t> voxels(task.stages.size());
    std::transform(task.stages.begin(), task.stages.end(), voxels.begin(),
                   [](const FixtureStage& s) { return s.patch().voxel_count(); });
    std::vector<std::uint64_t> chained =
        plan_pgps_plus_batches(voxels, task.default_batch);

    check.batch_ok = true;
    for (std::size_t k = 0; k < chained.size(); ++k) {
      if (chained[k] != task.stages[k].batch) {
        check.batch_ok = false;
        check.first_batch_divergence = k + 1;
        check.batch_detail = "stage " + std::to_string(k + 1) + ": chain " +
                             std::to_string(chained[k]) + " vs table " +
                             std::to_string(task.stages[k].batch);
        break;
      }
    }
    check.batch_exception_documented = !check.batch_ok && !task.batch_follows_rule;
    checks.push_back(std::move(check));
  }
  return checks;
}

}  // namespace pgps
