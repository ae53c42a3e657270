#pragma once

#include <utility>

#include "rbe/gaussian_filter.hpp"
#include "rbe/types.hpp"

namespace rbe {

struct SorConfig {
  double epsilon = 1e-6;
  Vec theta;  // per-dimension no-outlier prior; filled with 0.5 when empty
  double conv_tol = 1e-4;
  int max_iters = 50;

  void validate(int m) const;
  Vec theta_or_default(int m) const;
};

struct SorDiagnostics {
  Vec omega;
  int iterations = 0;
  bool converged = false;
};

// W(i) = <(y_i - h_i(x))^2> under the posterior q(x).
Vec sor_w_stat(const GaussianBelief& posterior, const Vec& y, const StateSpaceModel& model,
               const UtParams& params);

// Bernoulli posterior probability of "no outlier" per dimension.
Vec sor_omega(const Vec& W, const Vec& R_diag, const SorConfig& cfg);

// One full VB measurement update for a diagonal-R model. Alternates the
// Gaussian update with effective noise R(i,i)/<I_i> against the W / Omega
// refresh until the relative state change drops below conv_tol.
std::pair<GaussianBelief, SorDiagnostics> sor_step(const GaussianBelief& prior, const Vec& y,
                                                   const StateSpaceModel& model,
                                                   const SorConfig& cfg,
                                                   const UtParams& params);

}  // namespace rbe
