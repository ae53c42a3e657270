#include "rbe/map_ekf.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rbe/psd.hpp"

namespace rbe {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

double log_gaussian(const Vec& x, const Vec& mean, const Mat& cov) {
  Eigen::LDLT<Mat> ldlt(symmetrize_psd(cov));
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("log_gaussian: singular covariance");
  }
  const Vec diag = ldlt.vectorD();
  double log_det = 0.0;
  for (int i = 0; i < diag.size(); ++i) {
    log_det += std::log(std::max(diag[i], 1e-300));
  }
  const Vec r = x - mean;
  const double quad = r.dot(ldlt.solve(r));
  return -0.5 * (x.size() * kLogTwoPi + log_det + quad);
}

}  // namespace

void OutlierHypothesisPrior::validate(int m) const {
  if (pi.size() != m + 1) {
    throw std::invalid_argument("OutlierHypothesisPrior: pi must have length m+1");
  }
  if (outlier_var.size() != m) {
    throw std::invalid_argument("OutlierHypothesisPrior: outlier_var must have length m");
  }
  if (pi.minCoeff() < 0.0 || std::abs(pi.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("OutlierHypothesisPrior: pi must be a probability vector");
  }
  if (outlier_var.minCoeff() < 0.0) {
    throw std::invalid_argument("OutlierHypothesisPrior: outlier variances must be >= 0");
  }
}

std::vector<HypothesisPosterior> hypothesis_posteriors(const GaussianBelief& prior,
                                                       const Vec& y,
                                                       const StateSpaceModel& model,
                                                       const OutlierHypothesisPrior& hyp) {
  hyp.validate(model.m);
  if (!model.observation_jacobian) {
    throw std::runtime_error("hypothesis_posteriors: observation Jacobian unavailable");
  }

  const Mat H = model.observation_jacobian(prior.mean);
  const Vec ybar = model.observation(prior.mean);
  const Mat S0 = H * prior.cov * H.transpose() + model.R;
  const Mat C = prior.cov * H.transpose();

  std::vector<HypothesisPosterior> out;
  out.reserve(model.m + 1);
  for (int i = 0; i <= model.m; ++i) {
    Mat S = S0;
    if (i > 0) {
      S(i - 1, i - 1) += hyp.outlier_var[i - 1];
    }
    S = symmetrize_psd(S);
    Eigen::LDLT<Mat> ldlt(S);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("hypothesis_posteriors: singular innovation covariance");
    }
    const Mat gain_t = ldlt.solve(C.transpose());

    HypothesisPosterior mode;
    mode.belief.mean = prior.mean + gain_t.transpose() * (y - ybar);
    mode.belief.cov = symmetrize_psd(prior.cov - gain_t.transpose() * S * gain_t);
    const double log_pi =
        hyp.pi[i] > 0.0 ? std::log(hyp.pi[i]) : -std::numeric_limits<double>::infinity();
    mode.log_evidence = log_gaussian(y, ybar, S) + log_pi;
    out.push_back(std::move(mode));
  }
  return out;
}

MapEkfResult map_ekf_step(const GaussianBelief& prior, const Vec& y,
                          const StateSpaceModel& model, const OutlierHypothesisPrior& hyp) {
  const auto modes = hypothesis_posteriors(prior, y, model, hyp);
  const int count = static_cast<int>(modes.size());

  // Mixture posterior density evaluated at each candidate mean, log domain.
  int best = 0;
  double best_log = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    if (!std::isfinite(modes[i].log_evidence)) {
      continue;
    }
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(count);
    for (int j = 0; j < count; ++j) {
      if (!std::isfinite(modes[j].log_evidence)) {
        continue;
      }
      const double t = modes[j].log_evidence +
                       log_gaussian(modes[i].belief.mean, modes[j].belief.mean,
                                    modes[j].belief.cov);
      terms.push_back(t);
      max_term = std::max(max_term, t);
    }
    double sum = 0.0;
    for (const double t : terms) {
      sum += std::exp(t - max_term);
    }
    const double log_density = max_term + std::log(sum);
    if (log_density > best_log) {
      best_log = log_density;
      best = i;
    }
  }
  return MapEkfResult{modes[best].belief, best};
}

}  // namespace rbe
