#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rbe/types.hpp"

namespace rbe {

// Abnormality injection applied on top of clean measurements. Every injected
// event lands in the returned log; identical (spec, seed) pairs reproduce the
// same corruption byte for byte.
struct CorruptionSpec {
  // none | gmm-outlier | missing | bias-random | piecewise | tdoa-outlier
  std::string mode = "none";
  double lambda = 0.0;
  double gamma = 1.0;
  // When gamma_hi > gamma_lo, gamma is drawn from U(gamma_lo, gamma_hi) once
  // per replicate (seeded), mirroring the randomized-nuisance campaigns.
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  // bias-random block.
  double xi = 90.0;
  double sigma_o = 0.4;
  int window_start = 1;  // 1-based, inclusive
  int window_end = 0;    // 0 -> K
  // piecewise schedule (drift ramp, constant bias, outlier burst).
  int ramp_start = 100, ramp_end = 500;
  double ramp_base = 50.0, ramp_slope = 0.25;
  int const_start = 600, const_end = 800;
  double const_value = 150.0;
  int burst_start = 900, burst_end = 1300;
  double burst_prob = 0.4, burst_var = 12500.0;
  // tdoa-outlier: per-sensor corruption with a shared reference sensor;
  // 0 keeps the plain per-dimension behavior.
  int tdoa_sensors = 0;
};

struct CorruptionResult {
  Mat measurements;
  std::vector<CorruptionEvent> log;
  double gamma_used = 1.0;
};

CorruptionResult corrupt(const Mat& measurements, const CorruptionSpec& spec,
                         const Vec& nominal_var, std::uint64_t seed);

// Ground-truth views of the log consumed by reference estimators.
std::vector<Eigen::VectorXi> rejection_schedule_from_log(
    const std::vector<CorruptionEvent>& log, int K, int m);

struct TruthSchedules {
  std::vector<Vec> bias_shift;
  std::vector<Vec> extra_noise_var;
};
TruthSchedules truth_schedules_from_log(const std::vector<CorruptionEvent>& log, int K, int m);

}  // namespace rbe
