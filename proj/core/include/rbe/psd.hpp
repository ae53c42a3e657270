#pragma once

#include "rbe/types.hpp"

namespace rbe {

struct PsdRepairStats {
  bool clamped = false;      // true when a negative eigenvalue was clipped
  double clamp_magnitude = 0.0;  // most negative eigenvalue before clipping
};

// (M + M^T)/2 with eigenvalues clamped at >= 0. Every covariance-producing
// operation in the library routes its output through this. Clamps larger than
// 1e-8 * ||M|| are reported through `stats` and counted globally.
Mat symmetrize_psd(const Mat& M, PsdRepairStats* stats = nullptr);

// Number of repairs so far whose clamp exceeded the reporting threshold.
long psd_clamp_report_count();

bool is_symmetric(const Mat& M, double rel_tol = 1e-9);

// B with B * B^T = M for PSD M. Cholesky of the repaired matrix when it is
// positive definite, eigen square root otherwise (semi-definite inputs are
// legal: a delta posterior has zero covariance). Throws on non-finite input.
Mat psd_sqrt(const Mat& M);

}  // namespace rbe
