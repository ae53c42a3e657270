#include "rbe/resample.hpp"

#include <cmath>
#include <stdexcept>

#include "rbe/rng.hpp"

namespace rbe {

std::vector<int> systematic_resample(const Vec& weights, Rng& rng) {
  const int N = static_cast<int>(weights.size());
  if (N == 0) {
    throw std::invalid_argument("systematic_resample: empty weight vector");
  }
  if (weights.minCoeff() < 0.0) {
    throw std::invalid_argument("systematic_resample: negative weight");
  }
  const double total = weights.sum();
  if (total <= 0.0) {
    throw std::invalid_argument("systematic_resample: all weights zero");
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("systematic_resample: weights must sum to 1");
  }

  std::vector<int> indices(N);
  const double u0 = rng.uniform();
  double cumulative = weights[0] / total;
  int j = 0;
  for (int i = 0; i < N; ++i) {
    const double u = (i + u0) / N;
    while (u > cumulative && j < N - 1) {
      ++j;
      cumulative += weights[j] / total;
    }
    indices[i] = j;
  }
  return indices;
}

}  // namespace rbe
