#include "rbe/sor.hpp"

#include <cmath>
#include <stdexcept>

#include "rbe/psd.hpp"

namespace rbe {

namespace {

bool is_diagonal(const Mat& M) {
  const double scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      if (i != j && std::abs(M(i, j)) > 1e-12 * scale) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

void SorConfig::validate(int m) const {
  if (epsilon <= 0.0 || epsilon >= 1.0) {
    throw std::invalid_argument("SorConfig: epsilon must lie in (0, 1)");
  }
  const Vec th = theta_or_default(m);
  if ((th.array() <= 0.0).any() || (th.array() >= 1.0).any()) {
    throw std::invalid_argument("SorConfig: theta entries must lie strictly in (0, 1)");
  }
}

Vec SorConfig::theta_or_default(int m) const {
  if (theta.size() == 0) {
    return Vec::Constant(m, 0.5);
  }
  if (theta.size() != m) {
    throw std::invalid_argument("SorConfig: theta length mismatch");
  }
  return theta;
}

Vec sor_w_stat(const GaussianBelief& posterior, const Vec& y, const StateSpaceModel& model,
               const UtParams& params) {
  const ObservationMoments obs = observation_moments(posterior, model, params);
  const Vec resid = y - obs.mean;
  return resid.cwiseProduct(resid) + obs.spread.diagonal();
}

Vec sor_omega(const Vec& W, const Vec& R_diag, const SorConfig& cfg) {
  if ((R_diag.array() <= 0.0).any()) {
    throw std::invalid_argument("sor_omega: R diagonal must be positive");
  }
  const int m = static_cast<int>(W.size());
  const Vec theta = cfg.theta_or_default(m);
  Vec omega(m);
  for (int i = 0; i < m; ++i) {
    // log of sqrt(eps)(1/theta - 1) exp(W (1-eps) / (2R)); logistic keeps the
    // exponent from overflowing for W/R in the hundreds.
    const double t = 0.5 * std::log(cfg.epsilon) + std::log(1.0 / theta[i] - 1.0) +
                     W[i] * (1.0 - cfg.epsilon) / (2.0 * R_diag[i]);
    double value;
    if (t > 0.0) {
      value = std::exp(-t) / (1.0 + std::exp(-t));
    } else {
      value = 1.0 / (1.0 + std::exp(t));
    }
    omega[i] = std::min(std::max(value, 1e-300), 1.0 - 1e-15);
  }
  return omega;
}

std::pair<GaussianBelief, SorDiagnostics> sor_step(const GaussianBelief& prior, const Vec& y,
                                                   const StateSpaceModel& model,
                                                   const SorConfig& cfg,
                                                   const UtParams& params) {
  if (!is_diagonal(model.R)) {
    throw std::invalid_argument(
        "sor_step: R must be diagonal; use the correlated-noise EM filter for fully "
        "populated R");
  }
  cfg.validate(model.m);
  const Vec r_diag = model.R.diagonal();

  const ObservationMoments obs = observation_moments(prior, model, params);

  SorDiagnostics diag;
  diag.omega = Vec::Ones(model.m);

  // All-inlier start: V^-1 = R^-1.
  Vec indicator_mean = Vec::Ones(model.m);
  GaussianBelief posterior = prior;
  Vec prev_mean;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const Mat v_eff = r_diag.cwiseQuotient(indicator_mean).asDiagonal();
    posterior = gaussian_update(prior, obs, y, v_eff, Vec::Zero(model.m));

    const Vec W = sor_w_stat(posterior, y, model, params);
    diag.omega = sor_omega(W, r_diag, cfg);
    indicator_mean =
        diag.omega + (Vec::Ones(model.m) - diag.omega) * cfg.epsilon;

    diag.iterations = iter;
    if (prev_mean.size() > 0) {
      const double denom = std::max(prev_mean.norm(), 1e-12);
      if ((posterior.mean - prev_mean).norm() / denom < cfg.conv_tol) {
        diag.converged = true;
        break;
      }
    }
    prev_mean = posterior.mean;
  }
  return {posterior, diag};
}

}  // namespace rbe
