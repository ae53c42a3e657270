#pragma once

#include <functional>

#include "rbe/types.hpp"

namespace rbe {

struct UtParams {
  double alpha = 1.0;
  double beta = 2.0;
  double kappa = 0.0;

  double lambda(int n) const { return alpha * alpha * (n + kappa) - n; }
};

struct SigmaPointSet {
  Mat points;        // (2n+1) x n, one sigma point per row
  Vec mean_weights;  // length 2n+1
  Vec cov_weights;
};

SigmaPointSet sigma_points(const GaussianBelief& belief, const UtParams& params);

struct UtMoments {
  Vec mean;      // d
  Mat cov;       // d x d, includes the additive term
  Mat crosscov;  // n x d
};

// Moment-matched mean / covariance / cross-covariance of map(x) for
// x ~ N(belief), with `additive_cov` added to the output covariance.
UtMoments unscented_transform(const GaussianBelief& belief,
                              const std::function<Vec(const Vec&)>& map,
                              const UtParams& params, const Mat& additive_cov);

}  // namespace rbe
