#pragma once

#include <tuple>
#include <vector>

#include "rbe/gaussian_filter.hpp"
#include "rbe/structured_cov.hpp"
#include "rbe/types.hpp"

namespace rbe {

struct EmorfConfig {
  Vec theta;  // no-outlier prior per dimension; 0.5 when empty
  double epsilon = 1e-6;
  double conv_tol = 1e-4;
  int max_iters = 50;

  Vec theta_or_default(int m) const;
};

struct EmorfDiagnostics {
  int iterations = 0;
  bool converged = false;
};

struct EmorfStepResult {
  GaussianBelief belief;
  IndicatorVector indicator;
  EmorfDiagnostics diagnostics;
};

// EM measurement update for fully populated R: E-step refreshes the state
// with R(I) through its structured inverse, M-step sweeps the indicator
// entries in ascending index order using the latest estimates.
EmorfStepResult emorf_step(const GaussianBelief& prior, const Vec& y,
                           const StateSpaceModel& model, const EmorfConfig& cfg,
                           const UtParams& params);

struct EmorsResult {
  std::vector<GaussianBelief> smoothed;
  std::vector<IndicatorVector> indicators;
  int outer_iterations = 0;
  bool converged = false;
};

// Batch smoother: outer EM loop of forward filter with the current indicator
// sequence, RTS backward pass, then per-step indicator refresh from the
// smoothed marginals.
EmorsResult emors_run(const StateSpaceModel& model, const Mat& ys,
                      const GaussianBelief& prior, const EmorfConfig& cfg,
                      const UtParams& params);

}  // namespace rbe
