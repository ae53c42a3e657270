#include "rbe/bcrb.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rbe/psd.hpp"
#include "rbe/rng.hpp"
#include "rbe/structured_cov.hpp"

namespace rbe {

namespace {

Mat psd_project(const Mat& M, double* max_correction) {
  PsdRepairStats stats;
  const Mat out = symmetrize_psd(M, &stats);
  if (max_correction && stats.clamped) {
    *max_correction = std::max(*max_correction, stats.clamp_magnitude);
  }
  return out;
}

Mat invert_spd(const Mat& M) {
  Eigen::LDLT<Mat> ldlt(M);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("bcrb: singular information matrix");
  }
  return ldlt.solve(Mat::Identity(M.rows(), M.cols()));
}

}  // namespace

BcrbFilterResult bcrb_filter(const StateSpaceModel& model,
                             const std::vector<Eigen::VectorXi>& rejection_schedule,
                             const std::vector<Mat>& state_samples, const Mat& J0,
                             const std::vector<Mat>* d22_2_override) {
  if (!model.transition_jacobian || !model.observation_jacobian) {
    throw std::runtime_error("bcrb_filter: model Jacobians unavailable");
  }
  const int K = static_cast<int>(rejection_schedule.size());
  if (static_cast<int>(state_samples.size()) < K + 1) {
    throw std::invalid_argument("bcrb_filter: need state samples for steps 0..K");
  }

  const Mat q_inv = invert_spd(symmetrize_psd(model.Q));

  BcrbFilterResult result;
  result.info_post.reserve(K);
  result.info_prior.reserve(K);
  result.bound.reserve(K);
  result.terms.reserve(K);

  Mat j_post = symmetrize_psd(J0);
  for (int k = 0; k < K; ++k) {
    FisherTerms terms;
    const Mat& samples_prev = state_samples[k];
    const int count_prev = static_cast<int>(samples_prev.cols());
    terms.d11 = Mat::Zero(model.n, model.n);
    Mat f_bar = Mat::Zero(model.n, model.n);
    for (int s = 0; s < count_prev; ++s) {
      const Mat F = model.transition_jacobian(samples_prev.col(s), k + 1);
      terms.d11.noalias() += F.transpose() * q_inv * F;
      f_bar += F;
    }
    terms.d11 /= count_prev;
    f_bar /= count_prev;
    terms.d12 = -f_bar.transpose() * q_inv;
    terms.d22_1 = q_inv;

    // Hard rejection: zeroed rows/columns, dense inverse of the kept block.
    IndicatorVector keep;
    keep.epsilon = 0.0;
    keep.values = rejection_schedule[k].cast<double>();
    const Mat r_inv = r_inv_structured(model.R, keep);

    if (d22_2_override) {
      terms.d22_2 = (*d22_2_override)[k];
    } else {
      const Mat& samples_now = state_samples[k + 1];
      const int count_now = static_cast<int>(samples_now.cols());
      terms.d22_2 = Mat::Zero(model.n, model.n);
      for (int s = 0; s < count_now; ++s) {
        const Mat H = model.observation_jacobian(samples_now.col(s));
        terms.d22_2.noalias() += H.transpose() * r_inv * H;
      }
      terms.d22_2 /= count_now;
    }

    Eigen::LDLT<Mat> ldlt(symmetrize_psd(j_post + terms.d11));
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("bcrb_filter: singular information recursion");
    }
    const Mat j_prior = psd_project(
        terms.d22_1 - terms.d12.transpose() * ldlt.solve(terms.d12),
        &result.max_psd_correction);
    j_post = psd_project(j_prior + terms.d22_2, &result.max_psd_correction);

    result.terms.push_back(terms);
    result.info_prior.push_back(j_prior);
    result.info_post.push_back(j_post);
    result.bound.push_back(invert_spd(j_post));
  }
  return result;
}

BcrbSmootherResult bcrb_smoother(const BcrbFilterResult& filter) {
  const int K = static_cast<int>(filter.info_post.size());
  if (K == 0) {
    return {};
  }
  BcrbSmootherResult result;
  result.info.assign(K, Mat());
  result.bound.assign(K, Mat());
  result.info[K - 1] = filter.info_post[K - 1];
  result.bound[K - 1] = invert_spd(result.info[K - 1]);

  for (int k = K - 2; k >= 0; --k) {
    const FisherTerms& terms = filter.terms[k + 1];
    const Mat inner =
        symmetrize_psd(terms.d22_1 + result.info[k + 1] - filter.info_prior[k + 1]);
    Eigen::LDLT<Mat> ldlt(inner);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("bcrb_smoother: singular inner matrix");
    }
    Mat j_s = filter.info_post[k] + terms.d11 -
              terms.d12 * ldlt.solve(terms.d12.transpose());
    j_s = symmetrize_psd(j_s);

    // Smoothing cannot lose information relative to filtering.
    Eigen::SelfAdjointEigenSolver<Mat> gap(j_s - filter.info_post[k]);
    const double min_eig = gap.eigenvalues().minCoeff();
    if (min_eig < 0.0) {
      result.max_monotonicity_violation =
          std::max(result.max_monotonicity_violation, -min_eig);
    }
    result.info[k] = j_s;
    result.bound[k] = invert_spd(j_s);
  }
  return result;
}

McFisherResult mc_fisher_bias_terms(const StateSpaceModel& model, const BiasMcConfig& cfg,
                                    int K, const Vec& x0, std::uint64_t seed) {
  if (!model.observation_jacobian) {
    throw std::runtime_error("mc_fisher_bias_terms: observation Jacobian unavailable");
  }
  if (cfg.n_mc < 10) {
    throw std::invalid_argument("mc_fisher_bias_terms: n_mc must be at least 10");
  }
  const int S = cfg.n_mc;
  const int m = model.m;
  Rng rng(seed, 0xb1a5);

  // State sample trajectories for the p(x_k) expectations.
  const Mat sqrt_q = psd_sqrt(model.Q);
  const Mat sqrt_r = psd_sqrt(model.R);
  std::vector<Mat> states(K + 1, Mat(model.n, S));
  for (int s = 0; s < S; ++s) {
    states[0].col(s) = x0;
  }
  for (int k = 1; k <= K; ++k) {
    for (int s = 0; s < S; ++s) {
      Vec z(model.n);
      for (int i = 0; i < model.n; ++i) {
        z[i] = rng.normal();
      }
      states[k].col(s) = model.apply_transition(states[k - 1].col(s), k) + sqrt_q * z;
    }
  }

  const Mat r_inv = invert_spd(symmetrize_psd(model.R));
  auto draw_meas_noise = [&](Rng& gen) {
    Vec z(m);
    for (int i = 0; i < m; ++i) {
      z[i] = rng.normal();
    }
    (void)gen;
    return Vec(sqrt_r * z);
  };
  auto draw_bias = [&](Vec& b, Eigen::VectorXi& active) {
    for (int i = 0; i < m; ++i) {
      active[i] = rng.uniform() < cfg.lambda ? 1 : 0;
      const double o = rng.uniform(0.0, cfg.xi);
      const double jitter = cfg.sigma_o > 0.0 ? rng.normal(0.0, std::sqrt(cfg.sigma_o)) : 0.0;
      b[i] = active[i] ? o + jitter : 0.0;
    }
  };

  McFisherResult result;
  result.d22_2.reserve(K);
  result.std_err.reserve(K);

  for (int k = 1; k <= K; ++k) {
    const bool biased = cfg.end_step >= cfg.onset_step && k >= cfg.onset_step &&
                        k <= cfg.end_step && cfg.lambda > 0.0;
    Mat mean_term = Mat::Zero(model.n, model.n);
    Mat sq_accum = Mat::Zero(model.n, model.n);
    std::vector<Mat> per_sample;
    per_sample.reserve(S);

    if (!biased) {
      for (int s = 0; s < S; ++s) {
        const Mat H = model.observation_jacobian(states[k].col(s));
        per_sample.push_back(H.transpose() * r_inv * H);
      }
    } else if (k == cfg.onset_step) {
      // Onset: the density of y given x is a mixture over fresh bias draws.
      std::vector<Vec> bias_bank(S, Vec(m));
      Eigen::VectorXi active(m);
      for (int i = 0; i < S; ++i) {
        draw_bias(bias_bank[i], active);
      }
      for (int s = 0; s < S; ++s) {
        const Vec x = states[k].col(s);
        const Vec h = model.observation(x);
        Vec b_true(m);
        draw_bias(b_true, active);
        const Vec y = h + draw_meas_noise(rng) + b_true;

        const Mat H = model.observation_jacobian(x);
        double max_phi = -std::numeric_limits<double>::infinity();
        std::vector<double> phi(S);
        std::vector<Vec> whitened(S);
        for (int i = 0; i < S; ++i) {
          const Vec d = y - h - bias_bank[i];
          whitened[i] = r_inv * d;
          phi[i] = -0.5 * d.dot(whitened[i]);
          max_phi = std::max(max_phi, phi[i]);
        }
        double norm = 0.0;
        Vec score = Vec::Zero(m);
        for (int i = 0; i < S; ++i) {
          const double e = std::exp(phi[i] - max_phi);
          norm += e;
          score += e * whitened[i];
        }
        score /= norm;
        const Vec g = H.transpose() * score;
        per_sample.push_back(g * g.transpose());
      }
    } else {
      // Persistence: condition on the previous measurement; the effective
      // density mixes over which dimensions carry the sustained bias.
      std::vector<Eigen::VectorXi> j_bank(S, Eigen::VectorXi(m));
      for (int i = 0; i < S; ++i) {
        for (int d = 0; d < m; ++d) {
          j_bank[i][d] = rng.uniform() < cfg.lambda ? 1 : 0;
        }
      }
      std::vector<Mat> cov_inv(S);
      std::vector<double> log_det(S);
      for (int i = 0; i < S; ++i) {
        Mat cov = model.R;
        for (int d = 0; d < m; ++d) {
          if (j_bank[i][d]) {
            cov(d, d) += model.R(d, d) + 2.0 * cfg.sigma_o;
          }
        }
        Eigen::LDLT<Mat> ldlt(cov);
        cov_inv[i] = ldlt.solve(Mat::Identity(m, m));
        log_det[i] = 0.0;
        for (int d = 0; d < m; ++d) {
          log_det[i] += std::log(ldlt.vectorD()[d]);
        }
      }

      Eigen::VectorXi active(m);
      for (int s = 0; s < S; ++s) {
        const Vec x_prev = states[k - 1].col(s);
        const Vec x_now = states[k].col(s);
        const Vec h_prev = model.observation(x_prev);
        const Vec h_now = model.observation(x_now);
        Vec o(m);
        for (int d = 0; d < m; ++d) {
          active[d] = rng.uniform() < cfg.lambda ? 1 : 0;
          o[d] = active[d] ? rng.uniform(0.0, cfg.xi) : 0.0;
        }
        Vec jitter_prev = Vec::Zero(m);
        Vec jitter_now = Vec::Zero(m);
        if (cfg.sigma_o > 0.0) {
          for (int d = 0; d < m; ++d) {
            if (active[d]) {
              jitter_prev[d] = rng.normal(0.0, std::sqrt(cfg.sigma_o));
              jitter_now[d] = rng.normal(0.0, std::sqrt(cfg.sigma_o));
            }
          }
        }
        const Vec y_prev = h_prev + draw_meas_noise(rng) + o + jitter_prev;
        const Vec y_now = h_now + draw_meas_noise(rng) + o + jitter_now;
        const Vec prev_resid = y_prev - h_prev;

        const Mat H = model.observation_jacobian(x_now);
        double max_t = -std::numeric_limits<double>::infinity();
        std::vector<double> t(S);
        std::vector<Vec> whitened(S);
        for (int i = 0; i < S; ++i) {
          Vec d = y_now - h_now;
          for (int dd = 0; dd < m; ++dd) {
            if (j_bank[i][dd]) {
              d[dd] -= prev_resid[dd];
            }
          }
          whitened[i] = cov_inv[i] * d;
          t[i] = -0.5 * d.dot(whitened[i]) - 0.5 * log_det[i];
          max_t = std::max(max_t, t[i]);
        }
        double norm = 0.0;
        Vec score = Vec::Zero(m);
        for (int i = 0; i < S; ++i) {
          const double e = std::exp(t[i] - max_t);
          norm += e;
          score += e * whitened[i];
        }
        score /= norm;
        const Vec g = H.transpose() * score;
        per_sample.push_back(g * g.transpose());
      }
    }

    for (const Mat& term : per_sample) {
      mean_term += term;
    }
    mean_term /= static_cast<double>(per_sample.size());
    for (const Mat& term : per_sample) {
      const Mat d = term - mean_term;
      sq_accum += d.cwiseProduct(d);
    }
    const double n_eff = static_cast<double>(per_sample.size());
    const double se =
        std::sqrt(sq_accum.sum() / std::max(1.0, n_eff - 1.0)) / std::sqrt(n_eff);

    result.d22_2.push_back(symmetrize_psd(mean_term));
    result.std_err.push_back(se);
  }
  return result;
}

}  // namespace rbe
