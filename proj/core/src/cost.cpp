#include "pgps/cost.hpp"

#include <cmath>

#include "pgps/errors.hpp"

namespace pgps {
namespace {

constexpr double kCalibrationHours = 13.55;
constexpr double kCalibrationGrams = 5590.0;
constexpr double kCalibrationWatts = 700.0;
constexpr double kCalibrationVoxels = 1000.0 * 250.0 * 2.0 * (80.0 * 192.0 * 160.0);

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void CostModel::validate() const {
  if (!positive_finite(device_power_watts))
    throw accounting_error("cost model: device_power_watts must be positive");
  if (!positive_finite(grid_intensity_g_per_kwh))
    throw accounting_error(
        "cost model: grid_intensity_g_per_kwh must be positive");
  if (!positive_finite(seconds_per_voxel))
    throw accounting_error("cost model: seconds_per_voxel must be positive");
}

CostModel CostModel::calibrated_default() {
  CostModel m;
  m.device_power_watts = kCalibrationWatts;
  m.grid_intensity_g_per_kwh =
      kCalibrationGrams / (kCalibrationHours * (kCalibrationWatts / 1000.0));
  m.seconds_per_voxel = kCalibrationHours * 3600.0 / kCalibrationVoxels;
  return m;
}

double estimate_co2_grams(double wallclock_seconds, const CostModel& model) {
  model.validate();
  if (!(wallclock_seconds >= 0.0) || !std::isfinite(wallclock_seconds))
    throw accounting_error("co2 estimate: wallclock must be non-negative");
  return (wallclock_seconds / 3600.0) * (model.device_power_watts / 1000.0) *
         model.grid_intensity_g_per_kwh;
}

double extrapolate_cps_runtime(double epoch_time_seconds, uint64_t n_epochs) {
  if (!positive_finite(epoch_time_seconds))
    throw accounting_error("runtime extrapolation: epoch time must be positive");
  return epoch_time_seconds * static_cast<double>(n_epochs);
}

double predict_runtime_seconds(unsigned __int128 voxels,
                               const CostModel& model) {
  model.validate();
  return static_cast<double>(voxels) * model.seconds_per_voxel;
}

}  // namespace pgps
