#pragma once

#include <vector>

#include "rbe/types.hpp"
#include "rbe/ut.hpp"

namespace rbe {

// UT moments of the observation map under a belief: mean, noiseless spread U,
// and state/observation cross-covariance C. Robust filters iterate the update
// with varying effective noise; these moments stay fixed, so they are staged.
struct ObservationMoments {
  Vec mean;       // mu
  Mat spread;     // U (no measurement noise added)
  Mat crosscov;   // C
};

ObservationMoments observation_moments(const GaussianBelief& belief,
                                       const StateSpaceModel& model,
                                       const UtParams& params);

GaussianBelief ggf_predict(const GaussianBelief& belief, const StateSpaceModel& model,
                           const UtParams& params, int step = 0);

// Posterior from staged moments: gain K = C (U + R_eff)^-1 solved rather than
// inverted, innovation y - offset - mu, P+ = P- - C K^T (PSD-repaired).
GaussianBelief gaussian_update(const GaussianBelief& prior, const ObservationMoments& obs,
                               const Vec& y, const Mat& R_eff, const Vec& offset);

// Same update driven by the inverse of the effective noise. Used where the
// effective covariance holds entries of order 1/epsilon that should never be
// formed (gain identity K = C(Rinv - Rinv (I + U Rinv)^-1 U Rinv)).
GaussianBelief gaussian_update_precision(const GaussianBelief& prior,
                                         const ObservationMoments& obs, const Vec& y,
                                         const Mat& R_inv_eff);

GaussianBelief ggf_update(const GaussianBelief& belief, const Vec& y,
                          const StateSpaceModel& model, const Mat& R_eff,
                          const Vec& offset, const UtParams& params);

GaussianBelief ggf_update(const GaussianBelief& belief, const Vec& y,
                          const StateSpaceModel& model, const UtParams& params);

GaussianBelief ekf_predict(const GaussianBelief& belief, const StateSpaceModel& model,
                           int step = 0);

GaussianBelief ekf_update(const GaussianBelief& belief, const Vec& y,
                          const StateSpaceModel& model);

// RTS backward pass over aligned filtered/predicted sequences. filtered[k] is
// the posterior at step k, predicted[k] the prior at step k+1 (length K each;
// predicted[K-1] is unused). first_step is the time index of filtered[0].
std::vector<GaussianBelief> rts_backward(const std::vector<GaussianBelief>& filtered,
                                         const std::vector<GaussianBelief>& predicted,
                                         const StateSpaceModel& model,
                                         const UtParams& params, int first_step = 1);

}  // namespace rbe
