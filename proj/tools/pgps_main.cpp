// pgps: curriculum planning and desk-scale training for patch-based 3D
// segmentation. Subcommands: plan, verify-fixtures, sample, train, report.
//
// Exit codes: 0 success, 1 runtime failure (divergent fixture, aborted
// run), 2 invalid configuration.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgps/arch.hpp"
#include "pgps/cost.hpp"
#include "pgps/curriculum.hpp"
#include "pgps/errors.hpp"
#include "pgps/fixtures.hpp"
#include "pgps/runner.hpp"
#include "pgps/sampler.hpp"
#include "pgps/volume.hpp"

namespace {

using nlohmann::json;

/// Binds config-file keys to the same variables the flags write, so values
/// load in the order: built-in default, config file, explicit flag.
struct ConfigBinder {
  std::map<std::string, std::function<void(const json&)>> setters;

  template <typename T>
  void bind(const std::string& key, T& target) {
    setters[key] = [&target, key](const json& v) {
      try {
        target = v.get<T>();
      } catch (const json::exception& e) {
        throw pgps::config_error("config field '" + key + "': " + e.what());
      }
    };
  }

  void apply(const json& cfg) const {
    if (!cfg.is_object())
      throw pgps::config_error("config file must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      const auto it = setters.find(key);
      if (it == setters.end())
        throw pgps::config_error("unknown config field '" + key + "'");
      it->second(value);
    }
  }
};

struct TaskChoice {
  pgps::ArchitectureSpec arch;
  pgps::PatchSize3D max_patch;
  std::uint64_t default_batch = 2;
  const pgps::TaskFixture* fixture = nullptr;
};

/// "toy-lung" is the desk-scale preset (the lung schedule shrunk 4x per
/// axis); every embedded task name works as well.
TaskChoice resolve_task(const std::string& name) {
  if (name == "toy-lung") {
    TaskChoice t;
    t.arch = pgps::ArchitectureSpec{"toy-lung", {2, 3, 3}, std::nullopt};
    t.max_patch = pgps::PatchSize3D{{20, 48, 40}};
    t.default_batch = 2;
    return t;
  }
  if (const auto* f = pgps::find_fixture(name))
    return TaskChoice{f->arch(), f->max_patch(), f->default_batch, f};
  throw pgps::config_error("unknown task '" + name +
                           "' (expected toy-lung or an embedded task name)");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw pgps::config_error("bad fraction '" + item + "' in --sweep");
    }
  }
  if (out.empty()) throw pgps::config_error("--sweep needs at least one fraction");
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(text)) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw pgps::config_error("bad seed '" + item + "' in --seeds");
    }
  }
  if (out.empty()) throw pgps::config_error("--seeds needs at least one seed");
  return out;
}

std::pair<std::uint64_t, std::uint64_t> parse_radius(const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 2)
    throw pgps::config_error("--radius expects 'lo,hi'");
  try {
    return {std::stoull(parts[0]), std::stoull(parts[1])};
  } catch (const std::exception&) {
    throw pgps::config_error("--radius expects 'lo,hi'");
  }
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f)
    throw pgps::format_error("cannot write output file: " + out_path);
  f << text;
}

// ---------------------------------------------------------------- plan --

struct PlanOptions {
  std::string task;
  std::string poolings;   // "a,b,c" overrides the task architecture
  std::string max_patch;  // "WxHxD" overrides the task target
  std::string scheme = "pgps";
  std::uint64_t batch = 0;  // 0 = task default
  std::uint64_t epochs = 1000;
  std::uint64_t iters = 250;
  std::string emit = "table";
  std::string out;
  std::string config_path;
};

std::string render_plan_table(const pgps::CurriculumPlan& plan,
                              const std::string& note) {
  std::ostringstream os;
  os << "scheme " << pgps::scheme_name(plan.scheme) << "  stages "
     << plan.stages.size() << "  epochs " << plan.total_epochs
     << "  iterations/epoch " << plan.iterations_per_epoch << "\n";
  os << std::setw(5) << "stage" << std::setw(7) << "batch" << std::setw(7)
     << "width" << std::setw(8) << "height" << std::setw(7) << "depth"
     << std::setw(8) << "epochs" << "\n";
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const auto& s = plan.stages[i];
    os << std::setw(5) << i + 1 << std::setw(7) << s.batch << std::setw(7)
       << s.patch[0] << std::setw(8) << s.patch[1] << std::setw(7)
       << s.patch[2] << std::setw(8) << s.epochs << "\n";
  }
  if (!note.empty()) os << "note: " << note << "\n";
  return os.str();
}

std::string render_plan_csv(const pgps::CurriculumPlan& plan) {
  std::ostringstream os;
  os << "stage,batch,width,height,depth,epochs\n";
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const auto& s = plan.stages[i];
    os << i + 1 << ',' << s.batch << ',' << s.patch[0] << ',' << s.patch[1]
       << ',' << s.patch[2] << ',' << s.epochs << '\n';
  }
  return os.str();
}

int cmd_plan(const PlanOptions& o) {
  pgps::ArchitectureSpec arch;
  pgps::PatchSize3D max_patch;
  std::uint64_t batch = o.batch;
  const pgps::TaskFixture* fixture = nullptr;

  if (!o.task.empty()) {
    TaskChoice t = resolve_task(o.task);
    arch = t.arch;
    max_patch = t.max_patch;
    fixture = t.fixture;
    if (batch == 0) batch = t.default_batch;
  } else if (!o.poolings.empty() && !o.max_patch.empty()) {
    const auto parts = split_list(o.poolings);
    if (parts.size() != 3)
      throw pgps::config_error("--poolings expects three comma-separated counts");
    arch.name = "custom";
    for (int i = 0; i < 3; ++i) {
      try {
        arch.poolings_per_axis[i] = std::stoi(parts[i]);
      } catch (const std::exception&) {
        throw pgps::config_error("bad pooling count '" + parts[i] + "'");
      }
    }
  } else {
    throw pgps::config_error(
        "plan needs --task or both --poolings and --max-patch");
  }
  if (!o.max_patch.empty()) max_patch = pgps::parse_patch(o.max_patch);
  if (batch == 0) batch = 2;

  const pgps::Scheme scheme = pgps::scheme_from_name(o.scheme);
  pgps::CurriculumPlan plan;
  std::string note;
  if (fixture) {
    plan = pgps::fixture_plan(*fixture, scheme, o.epochs, o.iters);
    if (batch != fixture->default_batch && batch != 0) {
      // explicit batch replaces the task default
      plan = pgps::build_plan(arch, max_patch, scheme, batch, o.epochs, o.iters);
    } else if (scheme == pgps::Scheme::pgps_plus && !fixture->batch_follows_rule) {
      note = "batch column uses the published override for this task; the "
             "backward chain rule gives a different column (see verify-fixtures)";
    }
  } else {
    plan = pgps::build_plan(arch, max_patch, scheme, batch, o.epochs, o.iters);
  }

  std::string rendered;
  if (o.emit == "json")
    rendered = pgps::to_json(plan).dump(2) + "\n";
  else if (o.emit == "csv")
    rendered = render_plan_csv(plan);
  else if (o.emit == "table")
    rendered = render_plan_table(plan, note);
  else
    throw pgps::config_error("--emit must be json, table or csv");
  write_or_print(rendered, o.out);
  return 0;
}

// ----------------------------------------------------- verify-fixtures --

int cmd_verify_fixtures() {
  const auto checks = pgps::verify_fixtures(pgps::msd_fixtures());
  int patch_pass = 0, batch_pass = 0, documented = 0;
  bool failed = false;
  for (const auto& c : checks) {
    std::ostringstream line;
    line << std::left << std::setw(16) << c.task;
    if (c.patch_ok) {
      ++patch_pass;
      line << "patch OK";
    } else {
      failed = true;
      line << "patch DIVERGES at stage " << c.first_patch_divergence << " ("
           << c.patch_detail << ")";
    }
    line << "  ";
    if (c.batch_ok) {
      ++batch_pass;
      line << "batch OK";
    } else if (c.batch_exception_documented) {
      ++documented;
      line << "batch OVERRIDE (documented exception: " << c.batch_detail
           << ")";
    } else {
      failed = true;
      line << "batch DIVERGES at stage " << c.first_batch_divergence << " ("
           << c.batch_detail << ")";
    }
    std::cout << line.str() << "\n";
  }
  std::cout << "summary: " << patch_pass << "/" << checks.size()
            << " patch columns, " << batch_pass << "/" << checks.size()
            << " batch columns";
  if (documented) std::cout << " + " << documented << " documented exception";
  std::cout << "\n";
  return failed ? 1 : 0;
}

// -------------------------------------------------------------- sample --

struct SampleOptions {
  std::string volume_path;
  std::string labels_path;
  bool synthetic = false;
  std::string shape = "64x64x64";
  int blobs = 3;
  std::string radius = "6,14";
  std::string patch;
  std::uint64_t count = 1;
  bool force_foreground = false;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string config_path;
};

int cmd_sample(const SampleOptions& o) {
  if (o.patch.empty()) throw pgps::config_error("sample needs --patch WxHxD");
  const pgps::PatchSize3D patch = pgps::parse_patch(o.patch);

  pgps::Volume volume;
  pgps::LabelVolume labels;
  if (o.synthetic) {
    const auto shape = pgps::parse_patch(o.shape).dims;
    std::tie(volume, labels) =
        pgps::synth_blobs(shape, o.blobs, parse_radius(o.radius), o.seed);
  } else if (!o.volume_path.empty() && !o.labels_path.empty()) {
    volume = pgps::load_volume(o.volume_path);
    labels = pgps::load_labels(o.labels_path);
  } else {
    throw pgps::config_error(
        "sample needs --synthetic or both --volume and --labels");
  }

  const auto fg = pgps::foreground_indices(labels);
  pgps::RngStream rng{o.seed, pgps::stream_id("sampler"), 0};
  json summary;
  summary["patches"] = json::array();
  for (std::uint64_t k = 0; k < o.count; ++k) {
    pgps::PatchRequest req{patch, o.force_foreground, rng};
    const pgps::SampledPatch sp = pgps::sample_patch(volume, labels, req, fg);
    rng = req.rng;
    std::uint64_t fg_voxels = 0;
    for (const auto v : sp.labels.labels)
      if (v != 0) ++fg_voxels;
    summary["patches"].push_back(
        json{{"origin", {sp.origin[0], sp.origin[1], sp.origin[2]}},
             {"forced", sp.forced},
             {"foreground_voxels", fg_voxels}});
    if (!o.out_dir.empty()) {
      const std::filesystem::path dir(o.out_dir);
      std::filesystem::create_directories(dir);
      const std::string stem = "patch_" + std::to_string(k);
      pgps::save_volume(sp.patch, dir / (stem + ".vol"));
      pgps::save_labels(sp.labels, dir / (stem + ".lab"));
    }
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------------- train --

struct TrainOptions {
  std::string task = "toy-lung";
  std::string scheme = "pgps";
  std::string schemes;  // sweep only
  std::uint64_t epochs = 26;
  std::uint64_t iters = 10;
  std::uint64_t batch = 0;  // 0 = task default
  std::uint64_t seed = 42;
  std::string seeds;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t hidden = 8;
  bool synthetic = false;
  std::string data_dir;
  std::uint64_t volumes = 4;
  std::uint64_t val_volumes = 1;
  std::string shape = "64x64x64";
  int blobs = 3;
  std::string radius = "6,14";
  std::string sweep;
  std::string out_dir = ".";
  bool no_validate = false;
  std::string config_path;
};

int cmd_train(const TrainOptions& o) {
  const TaskChoice task = resolve_task(o.task);
  const std::uint64_t batch = o.batch ? o.batch : task.default_batch;

  pgps::Dataset dataset;
  if (!o.data_dir.empty()) {
    dataset = pgps::load_dataset(o.data_dir);
  } else if (o.synthetic) {
    dataset = pgps::make_synthetic_dataset(
        o.volumes, o.val_volumes, pgps::parse_patch(o.shape).dims, o.blobs,
        parse_radius(o.radius), o.seed);
  } else {
    throw pgps::config_error("train needs --synthetic or --data <dir>");
  }

  pgps::RunConfig config;
  config.hidden_channels = o.hidden;
  config.n_classes = dataset.n_classes;
  config.learning_rate = o.learning_rate;
  config.momentum = o.momentum;
  config.validate_every_epoch = !o.no_validate;

  const std::filesystem::path out_dir(o.out_dir);
  std::filesystem::create_directories(out_dir);

  std::vector<std::uint64_t> seeds =
      o.seeds.empty() ? std::vector<std::uint64_t>{o.seed}
                      : parse_seeds(o.seeds);

  if (!o.sweep.empty()) {
    pgps::SweepConfig base;
    base.arch = task.arch;
    base.max_patch = task.max_patch;
    base.default_batch = batch;
    base.total_epochs = o.epochs;
    base.base_iterations = o.iters;
    std::vector<pgps::Scheme> schemes;
    for (const auto& name :
         split_list(o.schemes.empty() ? o.scheme : o.schemes))
      schemes.push_back(pgps::scheme_from_name(name));
    const auto rows = pgps::sweep_iteration_budgets(
        base, parse_fractions(o.sweep), schemes, seeds, dataset, config);
    pgps::write_sweep_csv(rows, out_dir / "sweep.csv");
    std::cout << "scheme     fraction  iters  mean_dice  mean_voxels\n";
    for (const auto& r : rows)
      std::cout << std::left << std::setw(10) << pgps::scheme_name(r.scheme)
                << std::right << std::setw(9) << r.fraction << std::setw(7)
                << r.iterations_per_epoch << std::setw(11) << std::fixed
                << std::setprecision(4) << r.mean_final_dice << std::setw(13)
                << std::setprecision(0) << r.mean_voxels
                << std::defaultfloat << "\n";
    std::cout << "wrote " << (out_dir / "sweep.csv").string() << "\n";
    return 0;
  }

  const pgps::Scheme scheme = pgps::scheme_from_name(o.scheme);
  const pgps::CurriculumPlan plan = pgps::build_plan(
      task.arch, task.max_patch, scheme, batch, o.epochs, o.iters);
  const pgps::CurriculumPlan baseline = pgps::build_plan(
      task.arch, task.max_patch, pgps::Scheme::cps, batch, o.epochs, o.iters);

  const auto reports = pgps::run_many(plan, dataset, config, seeds);
  bool any_invalid = false;
  double dice_sum = 0.0;
  const auto baseline_voxels =
      static_cast<double>(pgps::total_tensor_voxels(baseline));
  for (const auto& r : reports) {
    const std::string stem = "report_" + std::string(pgps::scheme_name(scheme)) +
                             "_seed" + std::to_string(r.seed);
    pgps::write_report_json(r, out_dir / (stem + ".json"));
    pgps::write_report_csv(r, out_dir / (stem + ".csv"));
    const double fraction =
        baseline_voxels > 0.0
            ? static_cast<double>(r.voxels_shown) / baseline_voxels
            : 0.0;
    std::cout << "scheme " << pgps::scheme_name(scheme) << "  seed " << r.seed
              << "  epochs " << r.records.size() << "  final dice "
              << std::fixed << std::setprecision(4) << r.final_val_dice()
              << "  voxels " << r.voxels_shown << " (" << std::setprecision(4)
              << fraction << " of constant-patch baseline)  wallclock "
              << std::setprecision(2) << r.wallclock_seconds << " s  co2 "
              << std::setprecision(3) << r.estimated_co2_grams << " g"
              << std::defaultfloat << "\n";
    if (!r.valid) {
      any_invalid = true;
      std::cerr << "run aborted (seed " << r.seed << "): " << r.failure
                << "\n";
    }
    dice_sum += r.final_val_dice();
  }
  if (reports.size() > 1)
    std::cout << "mean final dice over " << reports.size() << " seeds: "
              << std::fixed << std::setprecision(4)
              << dice_sum / static_cast<double>(reports.size())
              << std::defaultfloat << "\n";
  return any_invalid ? 1 : 0;
}

// -------------------------------------------------------------- report --

struct ReportOptions {
  std::string in_path;
  std::string emit = "summary";
  std::string out;
  std::string config_path;
};

int cmd_report(const ReportOptions& o) {
  std::ifstream f(o.in_path);
  if (!f) throw pgps::format_error("cannot open report: " + o.in_path);
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded())
    throw pgps::format_error("report is not valid JSON: " + o.in_path);

  if (o.emit == "summary") {
    std::ostringstream os;
    const auto& totals = j.at("totals");
    os << "scheme " << j.at("scheme").get<std::string>() << "  seed "
       << j.at("seed").get<std::uint64_t>() << "  epochs "
       << j.at("records").size() << "  valid "
       << (j.at("valid").get<bool>() ? "yes" : "no") << "\n";
    double final_dice = -1.0;
    if (!j.at("records").empty())
      final_dice = j.at("records").back().at("val_dice").get<double>();
    os << "final dice " << std::fixed << std::setprecision(4) << final_dice
       << "  voxels " << totals.at("voxels_shown").get<std::uint64_t>()
       << "  wallclock " << std::setprecision(2)
       << totals.at("wallclock_seconds").get<double>() << " s  co2 "
       << std::setprecision(3)
       << totals.at("estimated_co2_grams").get<double>() << " g\n";
    write_or_print(os.str(), o.out);
  } else if (o.emit == "csv") {
    std::ostringstream os;
    os << "epoch,stage_index,patch_w,patch_h,patch_d,batch,loss,val_dice\n";
    os.precision(10);
    for (const auto& r : j.at("records")) {
      const auto& p = r.at("patch");
      os << r.at("epoch").get<std::uint64_t>() << ','
         << r.at("stage_index").get<std::int64_t>() << ','
         << p.at(0).get<std::uint64_t>() << ',' << p.at(1).get<std::uint64_t>()
         << ',' << p.at(2).get<std::uint64_t>() << ','
         << r.at("batch").get<std::uint64_t>() << ','
         << r.at("loss").get<double>() << ','
         << r.at("val_dice").get<double>() << '\n';
    }
    write_or_print(os.str(), o.out);
  } else {
    throw pgps::config_error("--emit must be summary or csv");
  }
  return 0;
}

// ---------------------------------------------------------------- main --

/// Pre-parse peek at "<subcommand> ... --config <path>" so config values
/// are in place before CLI11 runs.
std::pair<std::string, std::string> peek_config(int argc, char** argv) {
  std::string sub, config;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (sub.empty() && !arg.empty() && arg[0] != '-') {
      sub = arg;
      continue;
    }
    if (arg == "--config" && i + 1 < argc)
      config = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      config = arg.substr(9);
  }
  return {sub, config};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-size curriculum planning and desk-scale training"};
  app.name("pgps");
  app.require_subcommand(1);

  PlanOptions plan_opts;
  ConfigBinder plan_binder;
  auto* plan = app.add_subcommand(
      "plan", "Generate a patch-size curriculum for a task or architecture");
  plan->add_option("--task", plan_opts.task,
                   "Task preset (toy-lung or an embedded task name)");
  plan_binder.bind("task", plan_opts.task);
  plan->add_option("--poolings", plan_opts.poolings,
                   "Per-axis pooling counts 'a,b,c' (custom architecture)");
  plan_binder.bind("poolings", plan_opts.poolings);
  plan->add_option("--max-patch", plan_opts.max_patch,
                   "Maximal patch WxHxD (overrides the task target)");
  plan_binder.bind("max-patch", plan_opts.max_patch);
  plan->add_option("--scheme", plan_opts.scheme,
                   "Schedule: cps, pgps, pgps+ or rpss");
  plan_binder.bind("scheme", plan_opts.scheme);
  plan->add_option("--batch", plan_opts.batch,
                   "Default batch size (0 = task default)");
  plan_binder.bind("batch", plan_opts.batch);
  plan->add_option("--epochs", plan_opts.epochs, "Total training epochs");
  plan_binder.bind("epochs", plan_opts.epochs);
  plan->add_option("--iters", plan_opts.iters, "Iterations per epoch");
  plan_binder.bind("iters", plan_opts.iters);
  plan->add_option("--emit", plan_opts.emit, "Output format: table, json, csv");
  plan_binder.bind("emit", plan_opts.emit);
  plan->add_option("--out", plan_opts.out, "Write output here instead of stdout");
  plan_binder.bind("out", plan_opts.out);
  plan->add_option("--config", plan_opts.config_path,
                   "JSON config file; explicit flags win");

  auto* verify = app.add_subcommand(
      "verify-fixtures", "Compare generated schedules against the embedded "
                         "reference tables");

  SampleOptions sample_opts;
  ConfigBinder sample_binder;
  auto* sample = app.add_subcommand(
      "sample", "Extract patches from a volume (optionally forced onto "
                "foreground)");
  sample->add_option("--volume", sample_opts.volume_path, "Image file (.vol)");
  sample_binder.bind("volume", sample_opts.volume_path);
  sample->add_option("--labels", sample_opts.labels_path, "Label file (.lab)");
  sample_binder.bind("labels", sample_opts.labels_path);
  sample->add_flag("--synthetic", sample_opts.synthetic,
                   "Generate a synthetic blob volume instead of loading one");
  sample_binder.bind("synthetic", sample_opts.synthetic);
  sample->add_option("--shape", sample_opts.shape, "Synthetic volume WxHxD");
  sample_binder.bind("shape", sample_opts.shape);
  sample->add_option("--blobs", sample_opts.blobs, "Synthetic blob count");
  sample_binder.bind("blobs", sample_opts.blobs);
  sample->add_option("--radius", sample_opts.radius,
                     "Synthetic blob radius range 'lo,hi'");
  sample_binder.bind("radius", sample_opts.radius);
  sample->add_option("--patch", sample_opts.patch, "Patch size WxHxD");
  sample_binder.bind("patch", sample_opts.patch);
  sample->add_option("--count", sample_opts.count, "Number of patches");
  sample_binder.bind("count", sample_opts.count);
  sample->add_flag("--force-foreground", sample_opts.force_foreground,
                   "Center each patch on a random foreground voxel");
  sample_binder.bind("force-foreground", sample_opts.force_foreground);
  sample->add_option("--seed", sample_opts.seed, "Sampling seed");
  sample_binder.bind("seed", sample_opts.seed);
  sample->add_option("--out", sample_opts.out_dir,
                     "Directory for extracted patch files");
  sample_binder.bind("out", sample_opts.out_dir);
  sample->add_option("--config", sample_opts.config_path,
                     "JSON config file; explicit flags win");

  TrainOptions train_opts;
  ConfigBinder train_binder;
  auto* train = app.add_subcommand(
      "train", "Train the toy segmentation network under a schedule");
  train->add_option("--task", train_opts.task,
                    "Task preset shaping the schedule");
  train_binder.bind("task", train_opts.task);
  train->add_option("--scheme", train_opts.scheme,
                    "Schedule: cps, pgps, pgps+ or rpss");
  train_binder.bind("scheme", train_opts.scheme);
  train->add_option("--schemes", train_opts.schemes,
                    "Comma list of schemes (sweep mode)");
  train_binder.bind("schemes", train_opts.schemes);
  train->add_option("--epochs", train_opts.epochs, "Total training epochs");
  train_binder.bind("epochs", train_opts.epochs);
  train->add_option("--iters", train_opts.iters, "Iterations per epoch");
  train_binder.bind("iters", train_opts.iters);
  train->add_option("--batch", train_opts.batch,
                    "Default batch size (0 = task default)");
  train_binder.bind("batch", train_opts.batch);
  train->add_option("--seed", train_opts.seed, "Training seed");
  train_binder.bind("seed", train_opts.seed);
  train->add_option("--seeds", train_opts.seeds,
                    "Comma list of seeds (multi-seed run)");
  train_binder.bind("seeds", train_opts.seeds);
  train->add_option("--lr", train_opts.learning_rate, "Base learning rate");
  train_binder.bind("lr", train_opts.learning_rate);
  train->add_option("--momentum", train_opts.momentum, "SGD momentum");
  train_binder.bind("momentum", train_opts.momentum);
  train->add_option("--hidden", train_opts.hidden, "Hidden channel count");
  train_binder.bind("hidden", train_opts.hidden);
  train->add_flag("--synthetic", train_opts.synthetic,
                  "Train on the synthetic blob dataset");
  train_binder.bind("synthetic", train_opts.synthetic);
  train->add_option("--data", train_opts.data_dir,
                    "Directory of .vol/.lab case pairs");
  train_binder.bind("data", train_opts.data_dir);
  train->add_option("--volumes", train_opts.volumes,
                    "Synthetic training case count");
  train_binder.bind("volumes", train_opts.volumes);
  train->add_option("--val-volumes", train_opts.val_volumes,
                    "Synthetic validation case count");
  train_binder.bind("val-volumes", train_opts.val_volumes);
  train->add_option("--shape", train_opts.shape, "Synthetic volume WxHxD");
  train_binder.bind("shape", train_opts.shape);
  train->add_option("--blobs", train_opts.blobs, "Synthetic blob count");
  train_binder.bind("blobs", train_opts.blobs);
  train->add_option("--radius", train_opts.radius,
                    "Synthetic blob radius range 'lo,hi'");
  train_binder.bind("radius", train_opts.radius);
  train->add_option("--sweep", train_opts.sweep,
                    "Comma list of iteration fractions in (0,1]");
  train_binder.bind("sweep", train_opts.sweep);
  train->add_option("--out", train_opts.out_dir, "Report output directory");
  train_binder.bind("out", train_opts.out_dir);
  train->add_flag("--no-validate", train_opts.no_validate,
                  "Skip per-epoch validation");
  train_binder.bind("no-validate", train_opts.no_validate);
  train->add_option("--config", train_opts.config_path,
                    "JSON config file; explicit flags win");

  ReportOptions report_opts;
  ConfigBinder report_binder;
  auto* report = app.add_subcommand(
      "report", "Summarize or convert a training report");
  report->add_option("--in", report_opts.in_path, "Report JSON file")
      ->required();
  report_binder.bind("in", report_opts.in_path);
  report->add_option("--emit", report_opts.emit,
                     "Output format: summary or csv");
  report_binder.bind("emit", report_opts.emit);
  report->add_option("--out", report_opts.out,
                     "Write output here instead of stdout");
  report_binder.bind("out", report_opts.out);
  report->add_option("--config", report_opts.config_path,
                     "JSON config file; explicit flags win");

  try {
    const auto [sub, config_path] = peek_config(argc, argv);
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f)
        throw pgps::config_error("cannot open config file: " + config_path);
      json cfg = json::parse(f, nullptr, false);
      if (cfg.is_discarded())
        throw pgps::config_error("config file is not valid JSON: " +
                                 config_path);
      if (sub == "plan")
        plan_binder.apply(cfg);
      else if (sub == "sample")
        sample_binder.apply(cfg);
      else if (sub == "train")
        train_binder.apply(cfg);
      else if (sub == "report")
        report_binder.apply(cfg);
    }

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }

    if (plan->parsed()) return cmd_plan(plan_opts);
    if (verify->parsed()) return cmd_verify_fixtures();
    if (sample->parsed()) return cmd_sample(sample_opts);
    if (train->parsed()) return cmd_train(train_opts);
    if (report->parsed()) return cmd_report(report_opts);
    return 2;
  } catch (const pgps::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pgps::contract_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pgps::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
