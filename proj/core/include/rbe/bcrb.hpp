#pragma once

#include <cstdint>
#include <vector>

#include "rbe/types.hpp"

namespace rbe {

struct FisherTerms {
  Mat d11;
  Mat d12;
  Mat d22_1;
  Mat d22_2;
};

struct BcrbFilterResult {
  std::vector<Mat> info_post;   // J+_k, k = 1..K
  std::vector<Mat> info_prior;  // J-_k
  std::vector<Mat> bound;       // (J+_k)^-1
  std::vector<FisherTerms> terms;  // terms[k] bridges step k -> k+1 (0-based k)
  double max_psd_correction = 0.0;
};

// Recursive Fisher information for the perfect rejector: measurement rows and
// columns flagged 0 in the rejection schedule contribute nothing. State
// expectations are Monte-Carlo averages over the supplied per-step samples
// (state_samples[k] is n x S at step k, k = 0 holding x_0 draws).
// d22_2_override, when given, replaces the measurement information term per
// step (used to wire the Monte-Carlo bias terms into the same recursion).
BcrbFilterResult bcrb_filter(const StateSpaceModel& model,
                             const std::vector<Eigen::VectorXi>& rejection_schedule,
                             const std::vector<Mat>& state_samples, const Mat& J0,
                             const std::vector<Mat>* d22_2_override = nullptr);

struct BcrbSmootherResult {
  std::vector<Mat> info;   // J^s_k
  std::vector<Mat> bound;  // (J^s_k)^-1
  double max_monotonicity_violation = 0.0;  // vs. the filtering information
};

BcrbSmootherResult bcrb_smoother(const BcrbFilterResult& filter);

// Overrides for the measurement term of the biased-range scenario, estimated
// by Monte Carlo with phi terms at bias onset and difference-of-measurement
// terms while the bias persists.
struct BiasMcConfig {
  double lambda = 0.5;
  double xi = 90.0;       // fresh bias magnitude ~ U(0, xi)
  double sigma_o = 0.4;   // bias jitter variance
  int onset_step = 1;     // 1-based step where biases switch on
  int end_step = 0;       // last biased step (0 = none)
  int n_mc = 100;         // per-step sample count (both inner and outer)
};

struct McFisherResult {
  std::vector<Mat> d22_2;       // per step k = 1..K
  std::vector<double> std_err;  // Frobenius standard error of each estimate
};

McFisherResult mc_fisher_bias_terms(const StateSpaceModel& model, const BiasMcConfig& cfg,
                                    int K, const Vec& x0, std::uint64_t seed);

}  // namespace rbe
