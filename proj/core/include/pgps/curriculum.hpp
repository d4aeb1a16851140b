#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pgps/arch.hpp"

namespace pgps {

/// Training schedule family.
enum class Scheme {
  cps,        ///< constant (maximal) patch size throughout
  pgps,       ///< growing patch size, constant batch
  pgps_plus,  ///< growing patch size with enlarged batches at small stages
  rpss        ///< uniformly random stage per iteration (ablation)
};

std::string_view scheme_name(Scheme scheme);          // "cps", "pgps", "pgps+", "rpss"
Scheme scheme_from_name(std::string_view name);       // throws config_error

/// One curriculum phase: a fixed patch size trained for a number of epochs.
struct Stage {
  PatchSize3D patch;
  std::uint64_t batch = 1;
  std::uint64_t epochs = 0;

  std::uint64_t tensor_voxels() const { return batch * patch.voxel_count(); }
  bool operator==(const Stage&) const = default;
};

/// Ordered stages from minimal to maximal patch plus the scheme tag.
/// Iterations per epoch are constant across stages.
struct CurriculumPlan {
  Scheme scheme = Scheme::cps;
  std::vector<Stage> stages;
  std::uint64_t total_epochs = 0;
  std::uint64_t default_batch = 2;
  std::uint64_t iterations_per_epoch = 250;

  const Stage& max_stage() const { return stages.back(); }
  bool operator==(const CurriculumPlan&) const = default;
};

/// Ordered patch sizes from min_patch to max_patch. Each consecutive pair
/// differs in exactly one axis by exactly one step; increments cycle over
/// the axes in fixed rotation (axis 1, axis 2, axis 0), skipping axes that
/// already reached their target. Throws schedule_error naming the offending
/// axis on a divisibility violation.
std::vector<PatchSize3D> generate_stages(const PatchSize3D& min_patch,
                                         const PatchSize3D& max_patch,
                                         const std::array<std::uint64_t, 3>& steps);

/// Backward-chained batch growth: the final stage keeps default_batch; each
/// earlier stage gets floor(b_next * v_next / v) clamped to
/// [default_batch, 24], so the tensor voxel count never drops between
/// consecutive stages unless the clamp binds.
std::vector<std::uint64_t> plan_pgps_plus_batches(
    std::span<const std::uint64_t> stage_voxels, std::uint64_t default_batch);

/// Constant batch for every stage.
std::vector<std::uint64_t> plan_pgps_batches(std::size_t n_stages,
                                             std::uint64_t default_batch);

/// floor(total/n) epochs per stage; the remainder goes to the final
/// (maximal) stage. Sum equals total_epochs.
std::vector<std::uint64_t> allocate_epochs(std::uint64_t total_epochs,
                                           std::size_t n_stages);

/// Exact total input voxels consumed by the plan over the whole training:
/// sum over stages of batch * patch voxels * epochs * iterations_per_epoch.
unsigned __int128 total_tensor_voxels(const CurriculumPlan& plan);

/// Total plan voxels divided by total baseline voxels. Exact integer
/// arithmetic on both sides; division happens once at the end. Throws
/// accounting_error on a zero-voxel baseline.
double voxels_shown_fraction(const CurriculumPlan& plan,
                             const CurriculumPlan& baseline);

/// Composes min_patch, generate_stages, the scheme's batch planner and
/// allocate_epochs into a validated plan. CPS yields one maximal stage;
/// RPSS yields the PGPS stage set tagged rpss (the random per-iteration
/// stage choice happens in the runner).
CurriculumPlan build_plan(const ArchitectureSpec& spec,
                          const PatchSize3D& max_patch, Scheme scheme,
                          std::uint64_t default_batch,
                          std::uint64_t total_epochs,
                          std::uint64_t iterations_per_epoch);

/// Structural invariants: single-axis single-step growth, epoch budget,
/// batch positivity, CPS stage count. When spec is non-null, also checks
/// steps and patch legality against the architecture.
void validate_plan(const CurriculumPlan& plan,
                   const ArchitectureSpec* spec = nullptr);

/// {scheme, default_batch, total_epochs, iterations_per_epoch,
///  stages:[{patch:[w,h,d], batch, epochs}]}
nlohmann::json to_json(const CurriculumPlan& plan);
CurriculumPlan plan_from_json(const nlohmann::json& j);

}  // namespace pgps
