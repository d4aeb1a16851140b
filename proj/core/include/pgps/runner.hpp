#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pgps/cost.hpp"
#include "pgps/curriculum.hpp"
#include "pgps/toynet.hpp"
#include "pgps/volume.hpp"

namespace pgps {

/// One training case with its cached foreground voxel list.
struct SegCase {
  Volume image;
  LabelVolume labels;
  std::vector<std::uint64_t> foreground;
};

struct Dataset {
  std::vector<SegCase> train;
  std::vector<SegCase> val;
  std::uint64_t n_classes = 2;
};

/// Deterministic blob-segmentation dataset; distinct sub-seeds per case.
Dataset make_synthetic_dataset(std::uint64_t n_train, std::uint64_t n_val,
                               const std::array<std::uint64_t, 3>& shape,
                               int n_blobs,
                               std::pair<std::uint64_t, std::uint64_t>
                                   radius_range,
                               std::uint64_t seed);

/// Loads every "<stem>.vol" / "<stem>.lab" pair in the directory, sorted
/// by stem. With two or more cases the last becomes validation; a single
/// case serves as both. Throws format_error on unpaired files.
Dataset load_dataset(const std::filesystem::path& dir);

struct RunConfig {
  std::uint64_t hidden_channels = 8;
  std::uint64_t n_classes = 2;
  double learning_rate = 0.05;
  double momentum = 0.9;
  bool validate_every_epoch = true;
  CostModel cost = CostModel::calibrated_default();
};

struct EpochRecord {
  std::uint64_t epoch = 0;  ///< 0-based
  /// Stage trained this epoch; -1 when the stage is redrawn every
  /// iteration, in which case patch/batch show the inference settings.
  std::int64_t stage_index = 0;
  PatchSize3D patch;
  std::uint64_t batch = 0;
  double loss = 0.0;  ///< mean over the epoch's iterations
  double val_dice = 0.0;  ///< -1 when validation was skipped
};

struct TrainReport {
  Scheme scheme = Scheme::cps;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> records;
  std::uint64_t voxels_shown = 0;  ///< exact sum of batch * patch voxels
  double wallclock_seconds = 0.0;
  double estimated_co2_grams = 0.0;
  bool valid = true;
  std::string failure;  ///< empty when valid
  nlohmann::json config;  ///< plan + hyperparameter snapshot

  double final_val_dice() const;  ///< last record's val_dice; -1 when empty
};

/// Stage drawn for one iteration of a per-iteration-randomized schedule.
/// Pure function of (seed, global iteration), so accounting and training
/// see identical draws.
std::size_t random_stage_at(std::uint64_t seed, std::uint64_t global_iter,
                            std::size_t n_stages);

/// Voxels the plan will consume, without training. Exact for staged
/// schemes; for per-iteration randomized schedules the draws for the given
/// seed are replayed.
unsigned __int128 planned_voxels(const CurriculumPlan& plan,
                                 std::uint64_t seed);

/// Trains the toy network under the plan. Stages run in order for their
/// allocated epochs (a single maximal stage for the constant baseline);
/// per-iteration randomized schedules redraw the stage each iteration at
/// the default batch. Validation runs tiled at the maximal patch size
/// after every epoch. Deterministic per seed except wallclock-derived
/// fields. A numeric failure is caught and returned as an invalid report
/// carrying the partial record list.
TrainReport run_experiment(const CurriculumPlan& plan, const Dataset& dataset,
                           const RunConfig& config, std::uint64_t seed);

/// Mean foreground Dice over the validation cases, predicting each full
/// volume by tiling it with max-size patches and averaging probabilities
/// where tiles overlap.
double validation_dice(const ToyNet<float>& net, const Dataset& dataset,
                       const PatchSize3D& patch);

/// Runs one experiment per seed. Parallel workers are capped by the
/// PGPS_THREADS environment variable (non-numeric values are ignored);
/// results preserve seed order.
std::vector<TrainReport> run_many(const CurriculumPlan& plan,
                                  const Dataset& dataset,
                                  const RunConfig& config,
                                  std::span<const std::uint64_t> seeds);

/// Base schedule parameters for an iteration-budget sweep.
struct SweepConfig {
  ArchitectureSpec arch;
  PatchSize3D max_patch;
  std::uint64_t default_batch = 2;
  std::uint64_t total_epochs = 13;
  std::uint64_t base_iterations = 10;
};

struct SweepRow {
  Scheme scheme = Scheme::cps;
  double fraction = 1.0;
  std::uint64_t iterations_per_epoch = 0;
  double mean_final_dice = 0.0;
  double mean_voxels = 0.0;
  double mean_runtime_seconds = 0.0;
};

/// Trains every (scheme, fraction) cell over the given seeds, scaling
/// iterations per epoch by the fraction (minimum 1). Rows are sorted by
/// (scheme name, fraction). Fractions must lie in (0, 1].
std::vector<SweepRow> sweep_iteration_budgets(
    const SweepConfig& base, std::span<const double> fractions,
    std::span<const Scheme> schemes, std::span<const std::uint64_t> seeds,
    const Dataset& dataset, const RunConfig& config);

/// Report serialization. JSON keys are emitted in sorted order, so equal
/// reports dump to identical bytes.
nlohmann::json to_json(const TrainReport& report);
void write_report_json(const TrainReport& report,
                       const std::filesystem::path& path);
/// Per-epoch CSV: epoch,stage_index,patch_w,patch_h,patch_d,batch,loss,val_dice.
void write_report_csv(const TrainReport& report,
                      const std::filesystem::path& path);
/// Sweep CSV: scheme,fraction,iterations_per_epoch,mean_dice,mean_voxels,mean_runtime_seconds.
void write_sweep_csv(std::span<const SweepRow> rows,
                     const std::filesystem::path& path);

}  // namespace pgps
