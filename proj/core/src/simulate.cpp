#include "rbe/simulate.hpp"

#include <stdexcept>

#include "rbe/psd.hpp"
#include "rbe/rng.hpp"

namespace rbe {

namespace {

Vec gaussian_draw(const Mat& sqrt_cov, Rng& rng) {
  Vec z(sqrt_cov.cols());
  for (int i = 0; i < z.size(); ++i) {
    z[i] = rng.normal();
  }
  return sqrt_cov * z;
}

}  // namespace

Trajectory simulate(const StateSpaceModel& model, const Vec& x0, int K, std::uint64_t seed) {
  if (x0.size() != model.n) {
    throw std::invalid_argument("simulate: x0 length does not match model state dimension");
  }
  if (K < 1) {
    throw std::invalid_argument("simulate: K must be >= 1");
  }
  if (!is_symmetric(model.Q) || !is_symmetric(model.R)) {
    throw std::invalid_argument("simulate: Q and R must be symmetric");
  }

  const Mat sqrt_q = psd_sqrt(model.Q);
  const Mat sqrt_r = psd_sqrt(model.R);

  Rng rng(seed);
  Trajectory out;
  out.states.resize(K, model.n);
  out.measurements.resize(K, model.m);

  Vec x = x0;
  for (int k = 1; k <= K; ++k) {
    Vec q;
    if (model.process_noise_sampler) {
      q = model.process_noise_sampler(rng);
    } else {
      q = gaussian_draw(sqrt_q, rng);
    }
    x = model.apply_transition(x, k) + q;
    const Vec y = model.observation(x) + gaussian_draw(sqrt_r, rng);
    out.states.row(k - 1) = x.transpose();
    out.measurements.row(k - 1) = y.transpose();
  }
  return out;
}

}  // namespace rbe
