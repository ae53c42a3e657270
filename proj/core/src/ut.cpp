#include "rbe/ut.hpp"

#include <cmath>
#include <stdexcept>

#include "rbe/psd.hpp"

namespace rbe {

SigmaPointSet sigma_points(const GaussianBelief& belief, const UtParams& params) {
  const int n = belief.dim();
  const double lambda = params.lambda(n);
  if (n + lambda <= 0.0) {
    throw std::invalid_argument("sigma_points: n + lambda must be positive");
  }

  const Mat root = std::sqrt(n + lambda) * psd_sqrt(belief.cov);

  SigmaPointSet set;
  set.points.resize(2 * n + 1, n);
  set.points.row(0) = belief.mean.transpose();
  for (int i = 0; i < n; ++i) {
    set.points.row(1 + i) = (belief.mean + root.col(i)).transpose();
    set.points.row(1 + n + i) = (belief.mean - root.col(i)).transpose();
  }

  set.mean_weights.resize(2 * n + 1);
  set.cov_weights.resize(2 * n + 1);
  const double wi = 1.0 / (2.0 * (n + lambda));
  set.mean_weights.setConstant(wi);
  set.cov_weights.setConstant(wi);
  set.mean_weights[0] = lambda / (n + lambda);
  set.cov_weights[0] = lambda / (n + lambda) + (1.0 - params.alpha * params.alpha + params.beta);
  return set;
}

UtMoments unscented_transform(const GaussianBelief& belief,
                              const std::function<Vec(const Vec&)>& map,
                              const UtParams& params, const Mat& additive_cov) {
  const SigmaPointSet set = sigma_points(belief, params);
  const int count = static_cast<int>(set.points.rows());
  const int n = belief.dim();

  Mat images;
  for (int i = 0; i < count; ++i) {
    const Vec y = map(set.points.row(i).transpose());
    if (i == 0) {
      images.resize(count, y.size());
    }
    images.row(i) = y.transpose();
  }
  const int d = static_cast<int>(images.cols());

  UtMoments out;
  out.mean = images.transpose() * set.mean_weights;

  out.cov = Mat::Zero(d, d);
  out.crosscov = Mat::Zero(n, d);
  for (int i = 0; i < count; ++i) {
    const Vec dy = images.row(i).transpose() - out.mean;
    const Vec dx = set.points.row(i).transpose() - belief.mean;
    out.cov.noalias() += set.cov_weights[i] * dy * dy.transpose();
    out.crosscov.noalias() += set.cov_weights[i] * dx * dy.transpose();
  }
  out.cov += additive_cov;
  out.cov = symmetrize_psd(out.cov);
  return out;
}

}  // namespace rbe
