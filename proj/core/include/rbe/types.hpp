#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace rbe {

class Rng;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct GaussianBelief {
  Vec mean;
  Mat cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

// Discrete-time model x_k = f(x_{k-1}) + q_{k-1}, y_k = h(x_k) + r_k.
// The maps receive the step index k so scenarios with a deterministic drive
// term fit the same interface; time-invariant models ignore it.
struct StateSpaceModel {
  int n = 0;
  int m = 0;
  std::function<Vec(const Vec&, int)> transition;
  std::function<Vec(const Vec&)> observation;
  Mat Q;
  Mat R;
  // Optional Jacobians; EKF-style consumers throw when these are absent.
  std::function<Mat(const Vec&, int)> transition_jacobian;
  std::function<Mat(const Vec&)> observation_jacobian;
  // Optional non-Gaussian process-noise draw; N(0, Q) when absent.
  std::function<Vec(Rng&)> process_noise_sampler;

  Vec apply_transition(const Vec& x, int step) const { return transition(x, step); }
  bool has_jacobians() const {
    return static_cast<bool>(transition_jacobian) && static_cast<bool>(observation_jacobian);
  }
};

enum class AbnormalityType { kOutlier, kMissing, kBias, kDrift };

std::string to_string(AbnormalityType type);

struct CorruptionEvent {
  int step = 0;  // 1-based time index
  int dim = 0;   // 0-based measurement dimension
  AbnormalityType type = AbnormalityType::kOutlier;
  double value = 0.0;  // realized additive disturbance (or sentinel for missing)
  double param = 0.0;  // deterministic component: injected variance for
                       // outliers, bias level for bias/drift events
};

struct Trajectory {
  Mat states;        // K x n, row k-1 holds x_k
  Mat measurements;  // K x m
  std::vector<CorruptionEvent> corruption_log;

  int steps() const { return static_cast<int>(states.rows()); }
};

}  // namespace rbe
