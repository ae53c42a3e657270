#pragma once

#include <cstdint>

#include "rbe/types.hpp"

namespace rbe {

// Roll the model forward K steps from x0. States pick up process noise drawn
// from Q (or the model's custom sampler), measurements pick up noise from R.
// The result is a pure function of (model, x0, K, seed).
Trajectory simulate(const StateSpaceModel& model, const Vec& x0, int K, std::uint64_t seed);

}  // namespace rbe
