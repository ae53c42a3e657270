#include "rbe/corrupt.hpp"

#include <cmath>
#include <stdexcept>

#include "rbe/rng.hpp"

namespace rbe {

CorruptionResult corrupt(const Mat& measurements, const CorruptionSpec& spec,
                         const Vec& nominal_var, std::uint64_t seed) {
  const int K = static_cast<int>(measurements.rows());
  const int m = static_cast<int>(measurements.cols());
  if (nominal_var.size() != m) {
    throw std::invalid_argument("corrupt: nominal variance length mismatch");
  }

  CorruptionResult out;
  out.measurements = measurements;
  Rng rng(seed, 0xc0de);

  double gamma = spec.gamma;
  if (spec.gamma_hi > spec.gamma_lo) {
    gamma = rng.uniform(spec.gamma_lo, spec.gamma_hi);
  }
  out.gamma_used = gamma;

  if (spec.mode == "none" || (spec.mode != "piecewise" && spec.lambda <= 0.0)) {
    return out;
  }

  if (spec.mode == "gmm-outlier") {
    // Total noise becomes the mixture (1-lambda) N(0, var) + lambda
    // N(0, gamma var): an additive spike of variance (gamma-1) var on top of
    // the nominal draw.
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < m; ++i) {
        if (rng.uniform() < spec.lambda) {
          const double extra_var = (gamma - 1.0) * nominal_var[i];
          const double spike = rng.normal(0.0, std::sqrt(extra_var));
          out.measurements(k, i) += spike;
          out.log.push_back({k + 1, i, AbnormalityType::kOutlier, spike, extra_var});
        }
      }
    }
  } else if (spec.mode == "missing") {
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < m; ++i) {
        if (rng.uniform() < spec.lambda) {
          const double original = out.measurements(k, i);
          out.measurements(k, i) = 0.0;
          out.log.push_back({k + 1, i, AbnormalityType::kMissing, original, 0.0});
        }
      }
    }
  } else if (spec.mode == "bias-random") {
    const int first = std::max(1, spec.window_start);
    const int last = spec.window_end > 0 ? std::min(spec.window_end, K) : K;
    std::vector<char> active(m, 0);
    std::vector<double> level(m, 0.0);
    for (int i = 0; i < m; ++i) {
      active[i] = rng.uniform() < spec.lambda ? 1 : 0;
      level[i] = active[i] ? rng.uniform(0.0, spec.xi) : 0.0;
    }
    for (int k = first; k <= last; ++k) {
      for (int i = 0; i < m; ++i) {
        if (!active[i]) {
          continue;
        }
        const double jitter =
            spec.sigma_o > 0.0 ? rng.normal(0.0, std::sqrt(spec.sigma_o)) : 0.0;
        const double add = level[i] + jitter;
        out.measurements(k - 1, i) += add;
        out.log.push_back({k, i, AbnormalityType::kBias, add, level[i]});
      }
    }
  } else if (spec.mode == "piecewise") {
    if (m != 1) {
      throw std::invalid_argument("corrupt: piecewise schedule is one-dimensional");
    }
    for (int k = 1; k <= K; ++k) {
      if (k >= spec.ramp_start && k <= spec.ramp_end) {
        const double level = spec.ramp_base + spec.ramp_slope * (k - spec.ramp_start);
        out.measurements(k - 1, 0) += level;
        out.log.push_back({k, 0, AbnormalityType::kDrift, level, level});
      } else if (k >= spec.const_start && k <= spec.const_end) {
        out.measurements(k - 1, 0) += spec.const_value;
        out.log.push_back({k, 0, AbnormalityType::kBias, spec.const_value, spec.const_value});
      } else if (k >= spec.burst_start && k <= spec.burst_end) {
        if (rng.uniform() < spec.burst_prob) {
          const double spike = rng.normal(0.0, std::sqrt(spec.burst_var));
          out.measurements(k - 1, 0) += spike;
          out.log.push_back({k, 0, AbnormalityType::kOutlier, spike, spec.burst_var});
        }
      }
    }
  } else if (spec.mode == "tdoa-outlier") {
    const int sensors = spec.tdoa_sensors > 0 ? spec.tdoa_sensors : m + 1;
    if (sensors != m + 1) {
      throw std::invalid_argument("corrupt: tdoa sensor count must be m + 1");
    }
    std::vector<char> hit(sensors, 0);
    for (int k = 0; k < K; ++k) {
      for (int s = 0; s < sensors; ++s) {
        hit[s] = rng.uniform() < spec.lambda ? 1 : 0;
      }
      for (int j = 0; j < m; ++j) {
        // Dimension j differences sensors 1 and j+2; the shared reference
        // corrupts every dimension at once.
        if (hit[0] || hit[j + 1]) {
          const double extra_var = gamma * nominal_var[j];
          const double spike = rng.normal(0.0, std::sqrt(extra_var));
          out.measurements(k, j) += spike;
          out.log.push_back({k + 1, j, AbnormalityType::kOutlier, spike, extra_var});
        }
      }
    }
  } else {
    throw std::invalid_argument("corrupt: unknown mode " + spec.mode);
  }
  return out;
}

std::vector<Eigen::VectorXi> rejection_schedule_from_log(
    const std::vector<CorruptionEvent>& log, int K, int m) {
  std::vector<Eigen::VectorXi> keep(K, Eigen::VectorXi::Ones(m));
  for (const auto& event : log) {
    if (event.step >= 1 && event.step <= K && event.dim >= 0 && event.dim < m) {
      keep[event.step - 1][event.dim] = 0;
    }
  }
  return keep;
}

TruthSchedules truth_schedules_from_log(const std::vector<CorruptionEvent>& log, int K,
                                        int m) {
  TruthSchedules out;
  out.bias_shift.assign(K, Vec::Zero(m));
  out.extra_noise_var.assign(K, Vec::Zero(m));
  for (const auto& event : log) {
    if (event.step < 1 || event.step > K) {
      continue;
    }
    const int k = event.step - 1;
    switch (event.type) {
      case AbnormalityType::kBias:
      case AbnormalityType::kDrift:
        out.bias_shift[k][event.dim] += event.param;
        break;
      case AbnormalityType::kOutlier:
        out.extra_noise_var[k][event.dim] += event.param;
        break;
      case AbnormalityType::kMissing:
        // A zeroed reading carries no information; flat likelihood stands in.
        out.extra_noise_var[k][event.dim] += 1e12;
        break;
    }
  }
  return out;
}

}  // namespace rbe
