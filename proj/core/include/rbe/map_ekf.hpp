#pragma once

#include <vector>

#include "rbe/types.hpp"

namespace rbe {

// Prior over the m+1 mutually exclusive outlier hypotheses: none, or exactly
// one corrupted dimension. Hypothesis i > 0 inflates dimension i-1 of the
// measurement noise by outlier_var[i-1].
struct OutlierHypothesisPrior {
  Vec pi;           // length m+1, simplex
  Vec outlier_var;  // length m, the nonzero diagonal entry of each V^i

  void validate(int m) const;
};

struct HypothesisPosterior {
  GaussianBelief belief;
  double log_evidence;  // log N(y | ybar_i, S_i) + log pi(i)
};

// One conditional EKF update per hypothesis, linearized at the prior mean.
std::vector<HypothesisPosterior> hypothesis_posteriors(const GaussianBelief& prior,
                                                       const Vec& y,
                                                       const StateSpaceModel& model,
                                                       const OutlierHypothesisPrior& hyp);

struct MapEkfResult {
  GaussianBelief belief;
  int selected_mode;  // 0 = nominal, i >= 1 = outlier in dimension i
};

// Keeps the mixture mode whose mean maximizes the full mixture posterior
// density; ties break to the smallest index.
MapEkfResult map_ekf_step(const GaussianBelief& prior, const Vec& y,
                          const StateSpaceModel& model, const OutlierHypothesisPrior& hyp);

}  // namespace rbe
