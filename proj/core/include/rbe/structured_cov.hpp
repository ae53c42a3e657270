#pragma once

#include "rbe/types.hpp"

namespace rbe {

// Per-dimension outlier indicator over {epsilon, 1}. epsilon == 0 is allowed
// and yields the hard-rejection covariance used by the performance bounds.
struct IndicatorVector {
  Vec values;
  double epsilon = 1e-6;

  static IndicatorVector all_inliers(int m, double epsilon = 1e-6);
  bool inlier(int i) const { return values[i] == 1.0; }
  int size() const { return static_cast<int>(values.size()); }
  void validate() const;
};

// Realized measurement covariance: diagonal R(i,i)/I(i); off-diagonal (i,j)
// kept only when both dimensions are inliers.
Mat r_structured(const Mat& R, const IndicatorVector& indicator);

// Inverse of r_structured computed blockwise: eps/R(i,i) on outlier
// diagonals, zero coupling, dense inverse of the inlier submatrix.
Mat r_inv_structured(const Mat& R, const IndicatorVector& indicator);

// R^-1(I_i = 1, I_-i) - R^-1(I_i = eps, I_-i) via the four Schur blocks.
// indicator[i] itself is ignored.
Mat delta_r_inv(const Mat& R, const IndicatorVector& indicator, int i);

struct TauResult {
  double tau;
  double decision;  // 1 (inlier) or epsilon (outlier)
};

// Inlier/outlier test statistic for dimension i given the other indicator
// entries: tr(W dR^-1) + log-det ratio + ln(eps) + 2 ln(1/theta - 1);
// decision is inlier iff tau <= 0.
TauResult tau_indicator(const Mat& W, const Mat& R, const IndicatorVector& indicator, int i,
                        double theta, double epsilon);

}  // namespace rbe
