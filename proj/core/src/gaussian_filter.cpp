#include "rbe/gaussian_filter.hpp"

#include <stdexcept>

#include "rbe/psd.hpp"

namespace rbe {

ObservationMoments observation_moments(const GaussianBelief& belief,
                                       const StateSpaceModel& model,
                                       const UtParams& params) {
  const UtMoments ut = unscented_transform(
      belief, [&](const Vec& x) { return model.observation(x); }, params,
      Mat::Zero(model.m, model.m));
  return ObservationMoments{ut.mean, ut.cov, ut.crosscov};
}

GaussianBelief ggf_predict(const GaussianBelief& belief, const StateSpaceModel& model,
                           const UtParams& params, int step) {
  const UtMoments ut = unscented_transform(
      belief, [&](const Vec& x) { return model.apply_transition(x, step); }, params, model.Q);
  return GaussianBelief{ut.mean, ut.cov};
}

GaussianBelief gaussian_update(const GaussianBelief& prior, const ObservationMoments& obs,
                               const Vec& y, const Mat& R_eff, const Vec& offset) {
  const Mat S = symmetrize_psd(obs.spread + R_eff);
  Eigen::LDLT<Mat> ldlt(S);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("gaussian_update: singular innovation covariance");
  }
  const Mat gain_t = ldlt.solve(obs.crosscov.transpose());  // K^T
  const Vec innovation = y - offset - obs.mean;
  GaussianBelief post;
  post.mean = prior.mean + gain_t.transpose() * innovation;
  post.cov = symmetrize_psd(prior.cov - obs.crosscov * gain_t);
  return post;
}

GaussianBelief gaussian_update_precision(const GaussianBelief& prior,
                                         const ObservationMoments& obs, const Vec& y,
                                         const Mat& R_inv_eff) {
  const int m = static_cast<int>(y.size());
  const Mat inner = Mat::Identity(m, m) + obs.spread * R_inv_eff;
  Eigen::PartialPivLU<Mat> lu(inner);
  const Mat gain =
      obs.crosscov * (R_inv_eff - R_inv_eff * lu.solve(obs.spread * R_inv_eff));
  const Vec innovation = y - obs.mean;
  GaussianBelief post;
  post.mean = prior.mean + gain * innovation;
  post.cov = symmetrize_psd(prior.cov - obs.crosscov * gain.transpose());
  return post;
}

GaussianBelief ggf_update(const GaussianBelief& belief, const Vec& y,
                          const StateSpaceModel& model, const Mat& R_eff,
                          const Vec& offset, const UtParams& params) {
  return gaussian_update(belief, observation_moments(belief, model, params), y, R_eff,
                         offset);
}

GaussianBelief ggf_update(const GaussianBelief& belief, const Vec& y,
                          const StateSpaceModel& model, const UtParams& params) {
  return ggf_update(belief, y, model, model.R, Vec::Zero(model.m), params);
}

GaussianBelief ekf_predict(const GaussianBelief& belief, const StateSpaceModel& model,
                           int step) {
  if (!model.transition_jacobian) {
    throw std::runtime_error("ekf_predict: transition Jacobian unavailable");
  }
  const Mat F = model.transition_jacobian(belief.mean, step);
  GaussianBelief out;
  out.mean = model.apply_transition(belief.mean, step);
  out.cov = symmetrize_psd(F * belief.cov * F.transpose() + model.Q);
  return out;
}

GaussianBelief ekf_update(const GaussianBelief& belief, const Vec& y,
                          const StateSpaceModel& model) {
  if (!model.observation_jacobian) {
    throw std::runtime_error("ekf_update: observation Jacobian unavailable");
  }
  const Mat H = model.observation_jacobian(belief.mean);
  ObservationMoments obs;
  obs.mean = model.observation(belief.mean);
  obs.spread = H * belief.cov * H.transpose();
  obs.crosscov = belief.cov * H.transpose();
  return gaussian_update(belief, obs, y, model.R, Vec::Zero(model.m));
}

std::vector<GaussianBelief> rts_backward(const std::vector<GaussianBelief>& filtered,
                                         const std::vector<GaussianBelief>& predicted,
                                         const StateSpaceModel& model,
                                         const UtParams& params, int first_step) {
  if (filtered.size() != predicted.size()) {
    throw std::invalid_argument("rts_backward: sequence lengths differ");
  }
  const int K = static_cast<int>(filtered.size());
  std::vector<GaussianBelief> smoothed(K);
  if (K == 0) {
    return smoothed;
  }
  smoothed[K - 1] = filtered[K - 1];
  for (int k = K - 2; k >= 0; --k) {
    const int next_step = first_step + k + 1;
    const UtMoments ut = unscented_transform(
        filtered[k], [&](const Vec& x) { return model.apply_transition(x, next_step); },
        params, Mat::Zero(model.n, model.n));
    Eigen::LDLT<Mat> ldlt(symmetrize_psd(predicted[k].cov));
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("rts_backward: singular predicted covariance");
    }
    const Mat gain_t = ldlt.solve(ut.crosscov.transpose());  // G^T
    smoothed[k].mean =
        filtered[k].mean + gain_t.transpose() * (smoothed[k + 1].mean - predicted[k].mean);
    smoothed[k].cov = symmetrize_psd(
        filtered[k].cov +
        gain_t.transpose() * (smoothed[k + 1].cov - predicted[k].cov) * gain_t);
  }
  return smoothed;
}

}  // namespace rbe
