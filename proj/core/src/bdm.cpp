#include "rbe/bdm.hpp"

#include <cmath>
#include <stdexcept>

#include "rbe/psd.hpp"

namespace rbe {

namespace {

void require_diagonal_r(const Mat& R) {
  const double scale = std::max(1.0, R.diagonal().cwiseAbs().maxCoeff());
  for (int i = 0; i < R.rows(); ++i) {
    for (int j = 0; j < R.cols(); ++j) {
      if (i != j && std::abs(R(i, j)) > 1e-12 * scale) {
        throw std::invalid_argument("bdm: R must be diagonal (independent sensors)");
      }
    }
  }
}

}  // namespace

BdmConfig BdmConfig::defaults_for(const Mat& R) {
  BdmConfig cfg;
  cfg.sigma_tilde = 1000.0 * R;
  cfg.sigma_breve = 0.1 * R;
  return cfg;
}

Vec BdmConfig::theta_or_default(int m) const {
  if (theta_prior.size() == 0) {
    return Vec::Constant(m, 0.5);
  }
  if (theta_prior.size() != m) {
    throw std::invalid_argument("BdmConfig: theta_prior length mismatch");
  }
  if ((theta_prior.array() <= 0.0).any() || (theta_prior.array() >= 1.0).any()) {
    throw std::invalid_argument("BdmConfig: theta_prior entries must lie in (0, 1)");
  }
  return theta_prior;
}

BiasBelief bdm_predict_bias(const BiasBelief& prev, const Vec& omega_prev,
                            const BdmConfig& cfg) {
  const int m = static_cast<int>(prev.theta_hat.size());
  if ((omega_prev.array() < 0.0).any() || (omega_prev.array() > 1.0).any()) {
    throw std::invalid_argument("bdm_predict_bias: omega entries must lie in [0, 1]");
  }
  const Vec one_minus = Vec::Ones(m) - omega_prev;
  const Mat omega_diag = omega_prev.asDiagonal();
  const Mat one_minus_diag = one_minus.asDiagonal();

  BiasBelief pred;
  pred.theta_hat = omega_prev.cwiseProduct(prev.theta_hat);

  const Mat bernoulli_second =
      omega_prev * omega_prev.transpose() +
      Mat(omega_prev.cwiseProduct(one_minus).asDiagonal());
  pred.sigma = one_minus_diag * cfg.sigma_tilde + omega_diag * cfg.sigma_breve +
               prev.sigma.cwiseProduct(bernoulli_second) +
               Mat(omega_prev.cwiseProduct(one_minus)
                       .cwiseProduct(prev.theta_hat.cwiseProduct(prev.theta_hat))
                       .asDiagonal());
  pred.sigma = symmetrize_psd(pred.sigma);
  return pred;
}

BdmStepResult bdm_vb_iterate(const GaussianBelief& prior, const BiasBelief& bias_prior,
                             const Vec& y, const StateSpaceModel& model,
                             const BdmConfig& cfg, const UtParams& params) {
  require_diagonal_r(model.R);
  const int m = model.m;
  const Vec theta = cfg.theta_or_default(m);
  const Vec r_diag = model.R.diagonal();

  // Observation moments under the prior stay fixed across VB iterations, and
  // with S = U + R constant so do the gain and posterior covariance.
  const ObservationMoments obs = observation_moments(prior, model, params);
  const Mat S = symmetrize_psd(obs.spread + model.R);
  Eigen::LDLT<Mat> s_ldlt(S);
  if (s_ldlt.info() != Eigen::Success) {
    throw std::runtime_error("bdm_vb_iterate: singular innovation covariance");
  }
  const Mat gain_t = s_ldlt.solve(obs.crosscov.transpose());
  const Mat post_cov = symmetrize_psd(prior.cov - obs.crosscov * gain_t);

  BdmStepResult result;
  if (cfg.omega_override) {
    result.omega = Vec::Constant(m, *cfg.omega_override);
  } else if (cfg.omega_init.size() == m) {
    result.omega = cfg.omega_init;
  } else {
    result.omega = theta;
  }
  result.bias = bias_prior;
  result.state = prior;

  Vec prev_mean;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    // State block.
    const Vec offset = result.omega.cwiseProduct(result.bias.theta_hat);
    result.state.mean = prior.mean + gain_t.transpose() * (y - offset - obs.mean);
    result.state.cov = post_cov;

    // Posterior observation moments feed both remaining blocks.
    const ObservationMoments post_obs = observation_moments(result.state, model, params);
    const Vec nu = post_obs.mean;
    const Vec h_var = post_obs.spread.diagonal();

    // Bias-magnitude block. This must precede the occurrence block: the
    // fresh-bias prediction is near-uninformative (1000 R), and judging the
    // occurrence probability against that spread drives every probability to
    // zero before a magnitude is ever learned, freezing the filter in its
    // bias-blind state.
    const Mat omega_diag = result.omega.asDiagonal();
    const Mat cross = bias_prior.sigma * omega_diag;  // Sigma^- Omega^T
    const Mat s_bias = symmetrize_psd(omega_diag * bias_prior.sigma * omega_diag + model.R);
    Eigen::LDLT<Mat> sb_ldlt(s_bias);
    const Mat k_bias_t = sb_ldlt.solve(cross.transpose());
    const Vec innov =
        y - nu - result.omega.cwiseProduct(bias_prior.theta_hat);
    const Vec theta_star = bias_prior.theta_hat + k_bias_t.transpose() * innov;
    const Mat sigma_star = symmetrize_psd(bias_prior.sigma - cross * k_bias_t);

    // Sigma+ = (Omega(I-Omega)R^-1 + Sigma*^-1)^-1 through factorization solves.
    Eigen::LDLT<Mat> star_ldlt(sigma_star);
    if (star_ldlt.info() != Eigen::Success) {
      throw std::runtime_error("bdm_vb_iterate: singular bias covariance");
    }
    const Mat star_inv = star_ldlt.solve(Mat::Identity(m, m));
    const Vec d = result.omega.cwiseProduct(Vec::Ones(m) - result.omega)
                      .cwiseQuotient(r_diag);
    Eigen::LDLT<Mat> plus_ldlt(symmetrize_psd(Mat(d.asDiagonal()) + star_inv));
    result.bias.sigma = symmetrize_psd(plus_ldlt.solve(Mat::Identity(m, m)));
    result.bias.theta_hat = result.bias.sigma * star_ldlt.solve(theta_star);

    // Occurrence-probability block.
    if (!cfg.omega_override) {
      for (int i = 0; i < m; ++i) {
        const double theta_var = result.bias.sigma(i, i);
        const double e0 =
            (h_var[i] + (y[i] - nu[i]) * (y[i] - nu[i])) / (2.0 * r_diag[i]);
        const double resid1 = nu[i] + result.bias.theta_hat[i] - y[i];
        const double e1 = (h_var[i] + theta_var + resid1 * resid1) / (2.0 * r_diag[i]);
        const double t = std::log(1.0 / theta[i] - 1.0) + e1 - e0;
        const double omega = t > 0.0 ? std::exp(-t) / (1.0 + std::exp(-t))
                                     : 1.0 / (1.0 + std::exp(t));
        // Probabilities stay strictly inside (0, 1); saturation would freeze
        // the bias gain permanently.
        result.omega[i] = std::min(std::max(omega, 1e-12), 1.0 - 1e-12);
      }
    }

    result.iterations = iter;
    if (prev_mean.size() > 0) {
      const double denom = std::max(prev_mean.norm(), 1e-12);
      if ((result.state.mean - prev_mean).norm() / denom < cfg.conv_tol) {
        result.converged = true;
        break;
      }
    }
    prev_mean = result.state.mean;
  }
  return result;
}

BdmRunResult bdm_run(const StateSpaceModel& model, const Mat& ys,
                     const GaussianBelief& prior, const BiasBelief& bias_prior,
                     const BdmConfig& cfg, const UtParams& params) {
  const int K = static_cast<int>(ys.rows());
  const Vec theta = cfg.theta_or_default(model.m);

  BdmRunResult out;
  out.states.reserve(K);
  out.biases.reserve(K);
  out.omegas.reserve(K);

  GaussianBelief state = prior;
  BiasBelief bias = bias_prior;
  Vec omega = cfg.omega_override ? Vec::Constant(model.m, *cfg.omega_override)
                                 : Vec(theta);
  BdmConfig step_cfg = cfg;
  for (int k = 0; k < K; ++k) {
    const GaussianBelief predicted = ggf_predict(state, model, params, k + 1);
    const BiasBelief bias_pred = bdm_predict_bias(bias, omega, cfg);
    step_cfg.omega_init =
        omega.cwiseMax(Vec::Constant(model.m, 0.05)).cwiseMin(Vec::Constant(model.m, 0.95));
    BdmStepResult step = bdm_vb_iterate(predicted, bias_pred, ys.row(k).transpose(),
                                        model, step_cfg, params);
    state = step.state;
    bias = step.bias;
    omega = step.omega;
    out.states.push_back(state);
    out.biases.push_back(bias);
    out.omegas.push_back(omega);
  }
  return out;
}

}  // namespace rbe
