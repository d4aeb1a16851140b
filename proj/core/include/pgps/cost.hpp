#pragma once

#include <cstdint>

namespace pgps {

// Parametric energy/emissions estimator. Replaces hardware metering with
// three calibration constants so desk-scale runs can report comparable
// figures.
struct CostModel {
  double device_power_watts = 0.0;
  double grid_intensity_g_per_kwh = 0.0;
  double seconds_per_voxel = 0.0;

  // Throws accounting_error unless all three constants are strictly
  // positive and finite.
  void validate() const;

  // Default calibration: a 700 W device whose grid intensity is chosen so
  // that a 13.55-hour run emits 5590 g CO2-eq, and whose throughput maps
  // 1.2288e12 processed voxels onto that same 13.55-hour wallclock.
  static CostModel calibrated_default();
};

// grams = (seconds/3600) * (watts/1000) * intensity. Exact product,
// linear in every factor.
double estimate_co2_grams(double wallclock_seconds, const CostModel& model);

// Full-training wallclock projected from one measured epoch at the
// maximal patch size.
double extrapolate_cps_runtime(double epoch_time_seconds, uint64_t n_epochs);

// Simulated wallclock for accounting-only runs.
double predict_runtime_seconds(unsigned __int128 voxels,
                               const CostModel& model);

}  // namespace pgps
