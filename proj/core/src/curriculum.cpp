#include "pgps/curriculum.hpp"

#include <algorithm>
#include <string>

#include "pgps/errors.hpp"

namespace pgps {

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::cps: return "cps";
    case Scheme::pgps: return "pgps";
    case Scheme::pgps_plus: return "pgps+";
    case Scheme::rpss: return "rpss";
  }
  return "?";
}

Scheme scheme_from_name(std::string_view name) {
  if (name == "cps") return Scheme::cps;
  if (name == "pgps") return Scheme::pgps;
  if (name == "pgps+" || name == "pgps_plus") return Scheme::pgps_plus;
  if (name == "rpss") return Scheme::rpss;
  throw config_error("unknown scheme '" + std::string(name) +
                     "' (expected cps, pgps, pgps+ or rpss)");
}

std::vector<PatchSize3D> generate_stages(
    const PatchSize3D& min_patch, const PatchSize3D& max_patch,
    const std::array<std::uint64_t, 3>& steps) {
  for (int axis = 0; axis < 3; ++axis) {
    if (steps[axis] == 0)
      throw schedule_error("axis " + std::to_string(axis) + " has zero step");
    if (max_patch[axis] < min_patch[axis])
      throw schedule_error("axis " + std::to_string(axis) +
                           ": max patch below min patch");
    if ((max_patch[axis] - min_patch[axis]) % steps[axis] != 0)
      throw schedule_error(
          "axis " + std::to_string(axis) + ": span " +
          std::to_string(max_patch[axis] - min_patch[axis]) +
          " is not divisible by step " + std::to_string(steps[axis]));
  }

  std::vector<PatchSize3D> stages;
  PatchSize3D current = min_patch;
  stages.push_back(current);
  // Fixed rotation: height, depth, width. Exhausted axes are skipped.
  constexpr int kRotation[3] = {1, 2, 0};
  while (current != max_patch) {
    for (int axis : kRotation) {
      if (current[axis] < max_patch[axis]) {
        current[axis] += steps[axis];
        stages.push_back(current);
      }
    }
  }
  return stages;
}

std::vector<std::uint64_t> plan_pgps_plus_batches(
    std::span<const std::uint64_t> stage_voxels, std::uint64_t default_batch) {
  if (stage_voxels.empty())
    throw schedule_error("cannot plan batches for an empty stage list");
  if (default_batch == 0) throw schedule_error("default batch must be >= 1");
  const std::uint64_t cap = std::max<std::uint64_t>(24, default_batch);

  std::vector<std::uint64_t> batches(stage_voxels.size());
  batches.back() = default_batch;
  for (std::size_t k = stage_voxels.size() - 1; k-- > 0;) {
    if (stage_voxels[k] == 0)
      throw schedule_error("stage " + std::to_string(k + 1) +
                           " has zero voxels");
    unsigned __int128 budget =
        static_cast<unsigned __int128>(batches[k + 1]) * stage_voxels[k + 1];
    auto grown = static_cast<std::uint64_t>(budget / stage_voxels[k]);
    batches[k] = std::clamp(grown, default_batch, cap);
  }
  return batches;
}

std::vector<std::uint64_t> plan_pgps_batches(std::size_t n_stages,
                                             std::uint64_t default_batch) {
  if (n_stages == 0)
    throw schedule_error("cannot plan batches for an empty stage list");
  if (default_batch == 0) throw schedule_error("default batch must be >= 1");
  return std::vector<std::uint64_t>(n_stages, default_batch);
}

std::vector<std::uint64_t> allocate_epochs(std::uint64_t total_epochs,
                                           std::size_t n_stages) {
  if (n_stages == 0)
    throw schedule_error("cannot allocate epochs over zero stages");
  std::vector<std::uint64_t> epochs(n_stages, total_epochs / n_stages);
  epochs.back() += total_epochs - (total_epochs / n_stages) * n_stages;
  return epochs;
}

unsigned __int128 total_tensor_voxels(const CurriculumPlan& plan) {
  unsigned __int128 total = 0;
  for (const Stage& stage : plan.stages)
    total += static_cast<unsigned __int128>(stage.tensor_voxels()) *
             stage.epochs * plan.iterations_per_epoch;
  return total;
}

double voxels_shown_fraction(const CurriculumPlan& plan,
                             const CurriculumPlan& baseline) {
  unsigned __int128 denom = total_tensor_voxels(baseline);
  if (denom == 0)
    throw accounting_error("baseline plan shows zero voxels");
  unsigned __int128 numer = total_tensor_voxels(plan);
  return static_cast<double>(numer) / static_cast<double>(denom);
}

CurriculumPlan build_plan(const ArchitectureSpec& spec,
                          const PatchSize3D& max_patch, Scheme scheme,
                          std::uint64_t default_batch,
                          std::uint64_t total_epochs,
                          std::uint64_t iterations_per_epoch) {
  if (!is_legal_patch(spec, max_patch))
    throw schedule_error("maximal patch " + max_patch.str() +
                         " is illegal for architecture '" + spec.name + "'");
  if (iterations_per_epoch == 0)
    throw schedule_error("iterations per epoch must be >= 1");

  CurriculumPlan plan;
  plan.scheme = scheme;
  plan.default_batch = default_batch;
  plan.total_epochs = total_epochs;
  plan.iterations_per_epoch = iterations_per_epoch;

  std::vector<PatchSize3D> patches;
  if (scheme == Scheme::cps) {
    patches = {max_patch};
  } else {
    patches = generate_stages(min_patch(spec), max_patch, axis_steps(spec));
  }

  std::vector<std::uint64_t> batches;
  if (scheme == Scheme::pgps_plus) {
    std::vector<std::uint64_t> voxels(patches.size());
    std::transform(patches.begin(), patches.end(), voxels.begin(),
                   [](const PatchSize3D& p) { return p.voxel_count(); });
    batches = plan_pgps_plus_batches(voxels, default_batch);
  } else {
    batches = plan_pgps_batches(patches.size(), default_batch);
  }

  std::vector<std::uint64_t> epochs = allocate_epochs(total_epochs, patches.size());
  plan.stages.resize(patches.size());
  for (std::size_t k = 0; k < patches.size(); ++k)
    plan.stages[k] = Stage{patches[k], batches[k], epochs[k]};

  validate_plan(plan, &spec);
  return plan;
}

void validate_plan(const CurriculumPlan& plan, const ArchitectureSpec* spec) {
  if (plan.stages.empty()) throw schedule_error("plan has no stages");
  if (plan.iterations_per_epoch == 0)
    throw schedule_error("iterations per epoch must be >= 1");
  if (plan.scheme == Scheme::cps && plan.stages.size() != 1)
    throw schedule_error("cps plan must have exactly one stage");

  std::uint64_t epoch_sum = 0;
  for (const Stage& stage : plan.stages) {
    if (stage.batch == 0) throw schedule_error("stage batch must be >= 1");
    stage.patch.voxel_count();
    epoch_sum += stage.epochs;
  }
  if (epoch_sum != plan.total_epochs)
    throw schedule_error("stage epochs sum to " + std::to_string(epoch_sum) +
                         ", expected " + std::to_string(plan.total_epochs));

  std::array<std::uint64_t, 3> steps{};
  if (spec) {
    steps = axis_steps(*spec);
    if (!is_legal_patch(*spec, plan.max_stage().patch))
      throw schedule_error("maximal stage patch is illegal for architecture");
  }
  for (std::size_t k = 0; k + 1 < plan.stages.size(); ++k) {
    const auto& a = plan.stages[k].patch;
    const auto& b = plan.stages[k + 1].patch;
    int changed = -1;
    for (int axis = 0; axis < 3; ++axis) {
      if (a[axis] == b[axis]) continue;
      if (changed != -1)
        throw schedule_error("stages " + std::to_string(k + 1) + "->" +
                             std::to_string(k + 2) +
                             " change more than one axis");
      if (b[axis] < a[axis])
        throw schedule_error("stage patches must grow monotonically");
      if (spec && b[axis] - a[axis] != steps[axis])
        throw schedule_error("stages " + std::to_string(k + 1) + "->" +
                             std::to_string(k + 2) + " grow axis " +
                             std::to_string(axis) + " by " +
                             std::to_string(b[axis] - a[axis]) +
                             ", expected one step of " +
                             std::to_string(steps[axis]));
      changed = axis;
    }
    if (changed == -1)
      throw schedule_error("consecutive stages have identical patch sizes");
  }
}

nlohmann::json to_json(const CurriculumPlan& plan) {
  nlohmann::json j;
  j["scheme"] = std::string(scheme_name(plan.scheme));
  j["default_batch"] = plan.default_batch;
  j["total_epochs"] = plan.total_epochs;
  j["iterations_per_epoch"] = plan.iterations_per_epoch;
  auto& stages = j["stages"] = nlohmann::json::array();
  for (const Stage& stage : plan.stages) {
    stages.push_back({{"patch", stage.patch.dims},
                      {"batch", stage.batch},
                      {"epochs", stage.epochs}});
  }
  return j;
}

CurriculumPlan plan_from_json(const nlohmann::json& j) {
  CurriculumPlan plan;
  try {
    plan.scheme = scheme_from_name(j.at("scheme").get<std::string>());
    plan.default_batch = j.at("default_batch").get<std::uint64_t>();
    plan.total_epochs = j.at("total_epochs").get<std::uint64_t>();
    plan.iterations_per_epoch = j.at("iterations_per_epoch").get<std::uint64_t>();
    for (const auto& js : j.at("stages")) {
      Stage stage;
      auto patch = js.at("patch");
      if (!patch.is_array() || patch.size() != 3)
        throw config_error("stage patch must be an array of 3");
      for (int axis = 0; axis < 3; ++axis)
        stage.patch.dims[axis] = patch.at(axis).get<std::uint64_t>();
      stage.batch = js.at("batch").get<std::uint64_t>();
      stage.epochs = js.at("epochs").get<std::uint64_t>();
      plan.stages.push_back(stage);
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("invalid plan document: ") + e.what());
  }
  validate_plan(plan);
  return plan;
}

}  // namespace pgps
