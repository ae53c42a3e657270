#pragma once

#include <vector>

#include "rbe/types.hpp"

namespace rbe {

class Rng;

// Systematic resampling: index i is replicated floor(N*w_i) or
// floor(N*w_i)+1 times. Weights must be nonnegative with sum 1 (drift up to
// 1e-9 is renormalized); an all-zero vector is an error.
std::vector<int> systematic_resample(const Vec& weights, Rng& rng);

}  // namespace rbe
