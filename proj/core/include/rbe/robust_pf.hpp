#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rbe/rng.hpp"
#include "rbe/types.hpp"

namespace rbe {

// Regime labels per measurement dimension: 0 clean, 1 outlier, 2 bias.
struct AbnormalityConfig {
  Vec outlier_var;       // diagonal of U
  Vec bias_jitter_var;   // diagonal of Upsilon
  Vec drift_var;         // diagonal of Delta
  Vec fresh_lo;          // c
  Vec fresh_hi;          // d
  Eigen::Matrix3d transition;  // rows: previous regime -> next regime

  static AbnormalityConfig uniform_defaults(int m);
  void validate(int m) const;
};

struct AugmentedParticle {
  Vec x;
  Vec theta;
  Eigen::VectorXi regimes;
  double weight = 0.0;
};

AugmentedParticle propagate_particle(const AugmentedParticle& particle,
                                     const StateSpaceModel& model,
                                     const AbnormalityConfig& cfg, Rng& rng, int step = 0);

double particle_log_likelihood(const AugmentedParticle& particle, const Vec& y,
                               const StateSpaceModel& model, const AbnormalityConfig& cfg);

enum class PfMode { kRobust, kBootstrap, kIdeal };

// Ground-truth abnormality schedule for the hypothetical filter with perfect
// knowledge: per step, known mean shifts and extra noise variances.
struct IdealSchedule {
  std::vector<Vec> bias_shift;       // K entries, length m
  std::vector<Vec> extra_noise_var;  // K entries, length m
};

struct PfPriors {
  std::function<Vec(Rng&)> sample_x0;
  std::function<Vec(Rng&)> sample_theta0;          // unused in bootstrap/ideal
  std::function<Eigen::VectorXi(Rng&)> sample_regimes0;  // idem
};

struct PfResult {
  Mat estimates;  // K x n, weighted mean before resampling
  Vec ess;        // effective sample size per step
  int underflow_resets = 0;
};

PfResult robust_pf_run(const StateSpaceModel& model, const Mat& ys, const PfPriors& priors,
                       const AbnormalityConfig& cfg, int N, std::uint64_t seed, PfMode mode,
                       const IdealSchedule* schedule = nullptr);

}  // namespace rbe
