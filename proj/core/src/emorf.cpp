#include "rbe/emorf.hpp"

#include <cmath>
#include <stdexcept>

#include "rbe/psd.hpp"

namespace rbe {

namespace {

// <(y - h(x))(y - h(x))^T> under N(mean, cov) for the current state marginal.
Mat residual_spread(const GaussianBelief& marginal, const Vec& y,
                    const StateSpaceModel& model, const UtParams& params) {
  const ObservationMoments obs = observation_moments(marginal, model, params);
  const Vec resid = y - obs.mean;
  return obs.spread + resid * resid.transpose();
}

void indicator_sweep(const Mat& W, const Mat& R, const Vec& theta, double epsilon,
                     IndicatorVector& indicator) {
  for (int i = 0; i < indicator.size(); ++i) {
    indicator.values[i] =
        tau_indicator(W, R, indicator, i, theta[i], epsilon).decision;
  }
}

}  // namespace

Vec EmorfConfig::theta_or_default(int m) const {
  if (theta.size() == 0) {
    return Vec::Constant(m, 0.5);
  }
  if (theta.size() != m) {
    throw std::invalid_argument("EmorfConfig: theta length mismatch");
  }
  return theta;
}

EmorfStepResult emorf_step(const GaussianBelief& prior, const Vec& y,
                           const StateSpaceModel& model, const EmorfConfig& cfg,
                           const UtParams& params) {
  const Vec theta = cfg.theta_or_default(model.m);
  const ObservationMoments obs = observation_moments(prior, model, params);

  EmorfStepResult result;
  result.indicator = IndicatorVector::all_inliers(model.m, cfg.epsilon);
  result.belief = prior;

  Vec prev_mean;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const Mat r_inv = r_inv_structured(model.R, result.indicator);
    result.belief = gaussian_update_precision(prior, obs, y, r_inv);

    const Mat W = residual_spread(result.belief, y, model, params);
    indicator_sweep(W, model.R, theta, cfg.epsilon, result.indicator);

    result.diagnostics.iterations = iter;
    if (prev_mean.size() > 0) {
      const double denom = std::max(prev_mean.norm(), 1e-12);
      if ((result.belief.mean - prev_mean).norm() / denom < cfg.conv_tol) {
        result.diagnostics.converged = true;
        break;
      }
    }
    prev_mean = result.belief.mean;
  }
  return result;
}

EmorsResult emors_run(const StateSpaceModel& model, const Mat& ys,
                      const GaussianBelief& prior, const EmorfConfig& cfg,
                      const UtParams& params) {
  const int K = static_cast<int>(ys.rows());
  if (K < 1) {
    throw std::invalid_argument("emors_run: empty measurement batch");
  }
  const Vec theta = cfg.theta_or_default(model.m);

  EmorsResult result;
  result.indicators.assign(K, IndicatorVector::all_inliers(model.m, cfg.epsilon));

  std::vector<GaussianBelief> filtered(K);
  std::vector<GaussianBelief> predicted(K);
  Vec prev_stack;

  for (int outer = 1; outer <= cfg.max_iters; ++outer) {
    GaussianBelief belief = prior;
    for (int k = 0; k < K; ++k) {
      belief = ggf_predict(belief, model, params, k + 1);
      predicted[k] = belief;
      const ObservationMoments obs = observation_moments(belief, model, params);
      const Mat r_inv = r_inv_structured(model.R, result.indicators[k]);
      belief = gaussian_update_precision(belief, obs, ys.row(k).transpose(), r_inv);
      filtered[k] = belief;
    }

    // predicted[k] above is the prior at step k; rts_backward wants the prior
    // at step k+1 in slot k.
    std::vector<GaussianBelief> ahead(K);
    for (int k = 0; k + 1 < K; ++k) {
      ahead[k] = predicted[k + 1];
    }
    ahead[K - 1] = filtered[K - 1];
    result.smoothed = rts_backward(filtered, ahead, model, params, 1);

    for (int k = 0; k < K; ++k) {
      const Mat W =
          residual_spread(result.smoothed[k], ys.row(k).transpose(), model, params);
      indicator_sweep(W, model.R, theta, cfg.epsilon, result.indicators[k]);
    }

    Vec stack(K * model.n);
    for (int k = 0; k < K; ++k) {
      stack.segment(k * model.n, model.n) = result.smoothed[k].mean;
    }
    result.outer_iterations = outer;
    if (prev_stack.size() > 0) {
      const double denom = std::max(prev_stack.norm(), 1e-12);
      if ((stack - prev_stack).norm() / denom < cfg.conv_tol) {
        result.converged = true;
        break;
      }
    }
    prev_stack = stack;
  }
  return result;
}

}  // namespace rbe
