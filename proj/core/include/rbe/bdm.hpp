#pragma once

#include <optional>
#include <vector>

#include "rbe/gaussian_filter.hpp"
#include "rbe/types.hpp"

namespace rbe {

struct BiasBelief {
  Vec theta_hat;  // bias mean
  Mat sigma;      // bias covariance, PSD
};

struct BdmConfig {
  Mat sigma_tilde;   // fresh-bias covariance (default 1000 R)
  Mat sigma_breve;   // drift covariance (default 0.1 R)
  Vec theta_prior;   // per-dimension bias prior probability; 0.5 when empty
  double conv_tol = 1e-4;
  int max_iters = 50;
  // Starting occurrence probabilities for the VB loop; empty falls back to
  // theta_prior. The runner carries the previous step's converged values
  // (clamped to [0.05, 0.95]): a low carried probability stiffens the
  // fresh-bias penalty, which is what keeps clean data from being flagged
  // while leaving genuine shifts detectable.
  Vec omega_init;
  // Test/ablation hook: pin every bias-occurrence probability to this value
  // instead of updating it (0 reduces the filter to the plain UKF track).
  std::optional<double> omega_override;

  static BdmConfig defaults_for(const Mat& R);
  Vec theta_or_default(int m) const;
};

// Moment-matched one-step bias prediction given the previous posterior and
// per-dimension occurrence probabilities.
BiasBelief bdm_predict_bias(const BiasBelief& prev, const Vec& omega_prev,
                            const BdmConfig& cfg);

struct BdmStepResult {
  GaussianBelief state;
  BiasBelief bias;
  Vec omega;
  int iterations = 0;
  bool converged = false;
};

// One VB measurement update cycling the state, bias-magnitude, and
// occurrence-probability blocks (in that order) until the state estimate
// settles. Requires diagonal R.
BdmStepResult bdm_vb_iterate(const GaussianBelief& prior, const BiasBelief& bias_prior,
                             const Vec& y, const StateSpaceModel& model,
                             const BdmConfig& cfg, const UtParams& params);

struct BdmRunResult {
  std::vector<GaussianBelief> states;
  std::vector<BiasBelief> biases;
  std::vector<Vec> omegas;
};

BdmRunResult bdm_run(const StateSpaceModel& model, const Mat& ys,
                     const GaussianBelief& prior, const BiasBelief& bias_prior,
                     const BdmConfig& cfg, const UtParams& params);

}  // namespace rbe
