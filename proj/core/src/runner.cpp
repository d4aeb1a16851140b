#include "pgps/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "pgps/errors.hpp"
#include "pgps/rng.hpp"
#include "pgps/sampler.hpp"

namespace pgps {
namespace {

SegCase make_case(Volume image, LabelVolume labels) {
  SegCase c;
  c.image = std::move(image);
  c.labels = std::move(labels);
  c.foreground = foreground_indices(c.labels);
  return c;
}

std::pair<TensorBatch<float>, LabelBatch> to_batch(
    const std::vector<SampledPatch>& patches) {
  const std::uint64_t n = patches.size();
  const auto shape = patches.front().patch.shape;
  auto input = TensorBatch<float>::zeros(n, 1, shape);
  LabelBatch labels;
  labels.batch = n;
  labels.shape = shape;
  labels.labels.resize(n * patches.front().patch.voxel_count());
  const std::size_t plane = patches.front().patch.data.size();
  for (std::uint64_t b = 0; b < n; ++b) {
    std::copy(patches[b].patch.data.begin(), patches[b].patch.data.end(),
              input.data.begin() + b * plane);
    std::copy(patches[b].labels.labels.begin(),
              patches[b].labels.labels.end(),
              labels.labels.begin() + b * plane);
  }
  return {std::move(input), std::move(labels)};
}

/// Tile starts covering [0, dim) with fixed-size windows; the last window
/// is shifted back so it ends exactly at dim. Oversized windows collapse
/// to one centered start.
std::vector<std::int64_t> tile_starts(std::uint64_t dim, std::uint64_t size) {
  std::vector<std::int64_t> out;
  if (size >= dim) {
    out.push_back((static_cast<std::int64_t>(dim) -
                   static_cast<std::int64_t>(size)) / 2);
    return out;
  }
  for (std::uint64_t s = 0;; s += size) {
    if (s + size >= dim) {
      out.push_back(static_cast<std::int64_t>(dim - size));
      break;
    }
    out.push_back(static_cast<std::int64_t>(s));
  }
  return out;
}

std::size_t thread_cap() {
  if (const char* env = std::getenv("PGPS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0') return v >= 1 ? static_cast<std::size_t>(v) : 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

nlohmann::json config_snapshot(const CurriculumPlan& plan,
                               const RunConfig& config) {
  return nlohmann::json{{"plan", to_json(plan)},
                        {"hidden_channels", config.hidden_channels},
                        {"n_classes", config.n_classes},
                        {"learning_rate", config.learning_rate},
                        {"momentum", config.momentum},
                        {"validate_every_epoch", config.validate_every_epoch}};
}

}  // namespace

Dataset make_synthetic_dataset(std::uint64_t n_train, std::uint64_t n_val,
                               const std::array<std::uint64_t, 3>& shape,
                               int n_blobs,
                               std::pair<std::uint64_t, std::uint64_t>
                                   radius_range,
                               std::uint64_t seed) {
  Dataset ds;
  const std::uint64_t kValBase = 1ull << 32;
  for (std::uint64_t i = 0; i < n_train; ++i) {
    auto [vol, lab] = synth_blobs(
        shape, n_blobs, radius_range,
        RngStream::value_at(seed, stream_id("dataset"), i));
    ds.train.push_back(make_case(std::move(vol), std::move(lab)));
  }
  for (std::uint64_t i = 0; i < n_val; ++i) {
    auto [vol, lab] = synth_blobs(
        shape, n_blobs, radius_range,
        RngStream::value_at(seed, stream_id("dataset"), kValBase + i));
    ds.val.push_back(make_case(std::move(vol), std::move(lab)));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::map<std::string, std::pair<bool, bool>> stems;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".vol")
      stems[entry.path().stem().string()].first = true;
    else if (ext == ".lab")
      stems[entry.path().stem().string()].second = true;
  }
  if (stems.empty())
    throw format_error("no .vol/.lab cases found in " + dir.string());

  Dataset ds;
  std::vector<SegCase> cases;
  for (const auto& [stem, present] : stems) {
    if (!present.first || !present.second)
      throw format_error("case '" + stem + "' in " + dir.string() +
                         " is missing its " +
                         (present.first ? ".lab" : ".vol") + " file");
    Volume vol = load_volume(dir / (stem + ".vol"));
    LabelVolume lab = load_labels(dir / (stem + ".lab"));
    ds.n_classes = std::max(ds.n_classes, lab.n_classes);
    cases.push_back(make_case(std::move(vol), std::move(lab)));
  }
  if (cases.size() >= 2) {
    ds.val.push_back(std::move(cases.back()));
    cases.pop_back();
    ds.train = std::move(cases);
  } else {
    ds.train = cases;
    ds.val = std::move(cases);
  }
  return ds;
}

double TrainReport::final_val_dice() const {
  return records.empty() ? -1.0 : records.back().val_dice;
}

std::size_t random_stage_at(std::uint64_t seed, std::uint64_t global_iter,
                            std::size_t n_stages) {
  if (n_stages == 0) throw contract_error("stage draw over zero stages");
  return static_cast<std::size_t>(
      RngStream::value_at(seed, stream_id("rpss"), global_iter) % n_stages);
}

unsigned __int128 planned_voxels(const CurriculumPlan& plan,
                                 std::uint64_t seed) {
  if (plan.scheme != Scheme::rpss) return total_tensor_voxels(plan);
  unsigned __int128 total = 0;
  const std::uint64_t iters =
      plan.total_epochs * plan.iterations_per_epoch;
  for (std::uint64_t it = 0; it < iters; ++it) {
    const auto& stage = plan.stages[random_stage_at(seed, it,
                                                    plan.stages.size())];
    total += static_cast<unsigned __int128>(plan.default_batch) *
             stage.patch.voxel_count();
  }
  return total;
}

double validation_dice(const ToyNet<float>& net, const Dataset& dataset,
                       const PatchSize3D& patch) {
  if (dataset.val.empty()) return -1.0;
  const std::uint64_t n_classes = net.n_classes;
  double dice_sum = 0.0;
  for (const SegCase& c : dataset.val) {
    const auto& shape = c.image.shape;
    const std::uint64_t voxels = c.image.voxel_count();
    std::vector<float> acc(n_classes * voxels, 0.0f);
    const auto xs = tile_starts(shape[0], patch[0]);
    const auto ys = tile_starts(shape[1], patch[1]);
    const auto zs = tile_starts(shape[2], patch[2]);
    for (const std::int64_t ox : xs)
      for (const std::int64_t oy : ys)
        for (const std::int64_t oz : zs) {
          SampledPatch tile =
              extract_patch(c.image, c.labels, {ox, oy, oz}, patch);
          auto input = TensorBatch<float>::zeros(1, 1, patch.dims);
          input.data = tile.patch.data;
          const TensorBatch<float> probs = forward(net, input);
          const std::uint64_t plane = probs.voxels();
          for (std::uint64_t px = 0; px < patch[0]; ++px) {
            const std::int64_t x = ox + static_cast<std::int64_t>(px);
            if (x < 0 || x >= static_cast<std::int64_t>(shape[0])) continue;
            for (std::uint64_t py = 0; py < patch[1]; ++py) {
              const std::int64_t y = oy + static_cast<std::int64_t>(py);
              if (y < 0 || y >= static_cast<std::int64_t>(shape[1])) continue;
              for (std::uint64_t pz = 0; pz < patch[2]; ++pz) {
                const std::int64_t z = oz + static_cast<std::int64_t>(pz);
                if (z < 0 || z >= static_cast<std::int64_t>(shape[2]))
                  continue;
                const std::size_t vi =
                    c.image.index(static_cast<std::uint64_t>(x),
                                  static_cast<std::uint64_t>(y),
                                  static_cast<std::uint64_t>(z));
                const std::size_t pi = (px * patch[1] + py) * patch[2] + pz;
                for (std::uint64_t k = 0; k < n_classes; ++k)
                  acc[k * voxels + vi] += probs.data[k * plane + pi];
              }
            }
          }
        }
    // Overlapping tiles just accumulate; argmax is scale-free per voxel as
    // every class sees the same tile count.
    std::vector<std::uint8_t> pred(voxels, 0);
    for (std::uint64_t v = 0; v < voxels; ++v) {
      float best = acc[v];
      std::uint8_t arg = 0;
      for (std::uint64_t k = 1; k < n_classes; ++k)
        if (acc[k * voxels + v] > best) {
          best = acc[k * voxels + v];
          arg = static_cast<std::uint8_t>(k);
        }
      pred[v] = arg;
    }
    dice_sum += dice_score(pred, c.labels.labels, n_classes).mean;
  }
  return dice_sum / static_cast<double>(dataset.val.size());
}

TrainReport run_experiment(const CurriculumPlan& plan, const Dataset& dataset,
                           const RunConfig& config, std::uint64_t seed) {
  validate_plan(plan);
  if (dataset.train.empty())
    throw contract_error("experiment needs at least one training case");
  if (config.n_classes < dataset.n_classes)
    throw contract_error("network has " + std::to_string(config.n_classes) +
                         " classes but the dataset uses " +
                         std::to_string(dataset.n_classes));

  const auto t0 = std::chrono::steady_clock::now();
  TrainReport report;
  report.scheme = plan.scheme;
  report.seed = seed;
  report.config = config_snapshot(plan, config);

  ToyNet<float> net =
      ToyNet<float>::make(config.hidden_channels, config.n_classes, seed);
  auto optim = OptimState<float>::make(
      net, config.learning_rate, config.momentum,
      std::max<std::uint64_t>(1, plan.total_epochs));

  std::vector<std::size_t> stage_of_epoch;
  stage_of_epoch.reserve(plan.total_epochs);
  for (std::size_t s = 0; s < plan.stages.size(); ++s)
    for (std::uint64_t e = 0; e < plan.stages[s].epochs; ++e)
      stage_of_epoch.push_back(s);

  const bool mixed = plan.scheme == Scheme::rpss;
  RngStream sampler_rng{seed, stream_id("sampler"), 0};
  unsigned __int128 voxels = 0;

  try {
    for (std::uint64_t epoch = 0; epoch < plan.total_epochs; ++epoch) {
      const std::size_t stage_idx = stage_of_epoch[epoch];
      double loss_sum = 0.0;
      for (std::uint64_t it = 0; it < plan.iterations_per_epoch; ++it) {
        const std::uint64_t global_iter =
            epoch * plan.iterations_per_epoch + it;
        const Stage& stage =
            mixed ? plan.stages[random_stage_at(seed, global_iter,
                                                plan.stages.size())]
                  : plan.stages[stage_idx];
        const std::uint64_t batch =
            mixed ? plan.default_batch : stage.batch;
        const SegCase& c =
            dataset.train[RngStream::value_at(seed, stream_id("volume_pick"),
                                              global_iter) %
                          dataset.train.size()];
        const auto patches = compose_batch(c.image, c.labels, stage.patch,
                                           batch, sampler_rng, c.foreground);
        auto [input, labels] = to_batch(patches);
        loss_sum += train_step(net, optim, input, labels, epoch);
        voxels += static_cast<unsigned __int128>(batch) *
                  stage.patch.voxel_count();
      }
      EpochRecord rec;
      rec.epoch = epoch;
      rec.stage_index = mixed ? -1 : static_cast<std::int64_t>(stage_idx);
      rec.patch = mixed ? plan.max_stage().patch : plan.stages[stage_idx].patch;
      rec.batch = mixed ? plan.default_batch : plan.stages[stage_idx].batch;
      rec.loss = plan.iterations_per_epoch
                     ? loss_sum / static_cast<double>(plan.iterations_per_epoch)
                     : 0.0;
      rec.val_dice = config.validate_every_epoch
                         ? validation_dice(net, dataset,
                                           plan.max_stage().patch)
                         : -1.0;
      report.records.push_back(rec);
    }
  } catch (const numeric_error& e) {
    report.valid = false;
    report.failure = e.what();
  }

  if (voxels > static_cast<unsigned __int128>(UINT64_MAX))
    throw accounting_error("voxel counter exceeds 64 bits");
  report.voxels_shown = static_cast<std::uint64_t>(voxels);
  report.wallclock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report.estimated_co2_grams =
      estimate_co2_grams(report.wallclock_seconds, config.cost);
  return report;
}

std::vector<TrainReport> run_many(const CurriculumPlan& plan,
                                  const Dataset& dataset,
                                  const RunConfig& config,
                                  std::span<const std::uint64_t> seeds) {
  std::vector<TrainReport> reports(seeds.size());
  const std::size_t workers = std::min(thread_cap(), seeds.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i)
      reports[i] = run_experiment(plan, dataset, config, seeds[i]);
    return reports;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < seeds.size();
             i = next.fetch_add(1))
          reports[i] = run_experiment(plan, dataset, config, seeds[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

std::vector<SweepRow> sweep_iteration_budgets(
    const SweepConfig& base, std::span<const double> fractions,
    std::span<const Scheme> schemes, std::span<const std::uint64_t> seeds,
    const Dataset& dataset, const RunConfig& config) {
  for (const double f : fractions)
    if (!(f > 0.0 && f <= 1.0))
      throw config_error("sweep fraction " + std::to_string(f) +
                         " outside (0, 1]");
  if (seeds.empty()) throw config_error("sweep needs at least one seed");

  std::vector<SweepRow> rows;
  for (const Scheme scheme : schemes)
    for (const double f : fractions) {
      SweepRow row;
      row.scheme = scheme;
      row.fraction = f;
      row.iterations_per_epoch = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(
                 std::llround(f * static_cast<double>(base.base_iterations))));
      const CurriculumPlan plan =
          build_plan(base.arch, base.max_patch, scheme, base.default_batch,
                     base.total_epochs, row.iterations_per_epoch);
      const auto reports = run_many(plan, dataset, config, seeds);
      double dice = 0.0, vox = 0.0, secs = 0.0;
      for (const TrainReport& r : reports) {
        if (!r.valid)
          throw numeric_error("sweep run failed (scheme " +
                              std::string(scheme_name(scheme)) + ", fraction " +
                              std::to_string(f) + "): " + r.failure);
        dice += r.final_val_dice();
        vox += static_cast<double>(r.voxels_shown);
        secs += r.wallclock_seconds;
      }
      const double n = static_cast<double>(reports.size());
      row.mean_final_dice = dice / n;
      row.mean_voxels = vox / n;
      row.mean_runtime_seconds = secs / n;
      rows.push_back(row);
    }

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    const auto an = scheme_name(a.scheme), bn = scheme_name(b.scheme);
    return an != bn ? an < bn : a.fraction < b.fraction;
  });
  return rows;
}

nlohmann::json to_json(const TrainReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const EpochRecord& r : report.records)
    records.push_back(nlohmann::json{
        {"epoch", r.epoch},
        {"stage_index", r.stage_index},
        {"patch", {r.patch[0], r.patch[1], r.patch[2]}},
        {"batch", r.batch},
        {"loss", r.loss},
        {"val_dice", r.val_dice}});
  return nlohmann::json{
      {"scheme", std::string(scheme_name(report.scheme))},
      {"seed", report.seed},
      {"records", std::move(records)},
      {"totals",
       {{"voxels_shown", report.voxels_shown},
        {"wallclock_seconds", report.wallclock_seconds},
        {"estimated_co2_grams", report.estimated_co2_grams}}},
      {"valid", report.valid},
      {"failure", report.failure},
      {"config", report.config}};
}

void write_report_json(const TrainReport& report,
                       const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw format_error("cannot write report: " + path.string());
  f << to_json(report).dump(2) << '\n';
}

void write_report_csv(const TrainReport& report,
                      const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw format_error("cannot write report: " + path.string());
  f << "epoch,stage_index,patch_w,patch_h,patch_d,batch,loss,val_dice\n";
  std::ostringstream line;
  line.precision(10);
  for (const EpochRecord& r : report.records) {
    line.str("");
    line << r.epoch << ',' << r.stage_index << ',' << r.patch[0] << ','
         << r.patch[1] << ',' << r.patch[2] << ',' << r.batch << ',' << r.loss
         << ',' << r.val_dice << '\n';
    f << line.str();
  }
}

void write_sweep_csv(std::span<const SweepRow> rows,
                     const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw format_error("cannot write sweep table: " + path.string());
  f << "scheme,fraction,iterations_per_epoch,mean_dice,mean_voxels,"
       "mean_runtime_seconds\n";
  std::ostringstream line;
  line.precision(10);
  for (const SweepRow& r : rows) {
    line.str("");
    line << scheme_name(r.scheme) << ',' << r.fraction << ','
         << r.iterations_per_epoch << ',' << r.mean_final_dice << ','
         << r.mean_voxels << ',' << r.mean_runtime_seconds << '\n';
    f << line.str();
  }
}

}  // namespace pgps
