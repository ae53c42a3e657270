#include "rbe/robust_pf.hpp"

#include <cmath>
#include <stdexcept>

#include "rbe/psd.hpp"
#include "rbe/resample.hpp"

namespace rbe {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

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

// Dense multivariate normal log-density; used when R carries correlations.
double dense_log_normal(const Vec& resid, const Mat& cov) {
  Eigen::LDLT<Mat> ldlt(cov);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("particle_log_likelihood: non-PSD effective covariance");
  }
  const Vec diag = ldlt.vectorD();
  double log_det = 0.0;
  for (int i = 0; i < diag.size(); ++i) {
    if (diag[i] <= 0.0) {
      throw std::runtime_error("particle_log_likelihood: non-PSD effective covariance");
    }
    log_det += std::log(diag[i]);
  }
  return -0.5 * (resid.size() * kLogTwoPi + log_det + resid.dot(ldlt.solve(resid)));
}

int draw_regime(const Eigen::Matrix3d& transition, int prev, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int next = 0; next < 3; ++next) {
    acc += transition(prev, next);
    if (u < acc) {
      return next;
    }
  }
  return 2;
}

// Process-noise drawer resolved once per run; the custom sampler hook wins,
// then a diagonal fast path, then a dense square-root draw.
struct ProcessNoise {
  enum class Kind { kCustom, kDiagonal, kDense } kind;
  const StateSpaceModel* model;
  Vec std_diag;
  Mat root;

  explicit ProcessNoise(const StateSpaceModel& m) : model(&m) {
    if (m.process_noise_sampler) {
      kind = Kind::kCustom;
    } else if (is_diagonal(m.Q)) {
      kind = Kind::kDiagonal;
      std_diag = m.Q.diagonal().cwiseSqrt();
    } else {
      kind = Kind::kDense;
      root = psd_sqrt(m.Q);
    }
  }

  void add(Vec& x, Rng& rng) const {
    switch (kind) {
      case Kind::kCustom:
        x += model->process_noise_sampler(rng);
        break;
      case Kind::kDiagonal:
        for (int i = 0; i < x.size(); ++i) {
          x[i] += std_diag[i] * rng.normal();
        }
        break;
      case Kind::kDense: {
        Vec z(x.size());
        for (int i = 0; i < z.size(); ++i) {
          z[i] = rng.normal();
        }
        x.noalias() += root * z;
        break;
      }
    }
  }
};

}  // namespace

AbnormalityConfig AbnormalityConfig::uniform_defaults(int m) {
  AbnormalityConfig cfg;
  cfg.outlier_var = Vec::Zero(m);
  cfg.bias_jitter_var = Vec::Zero(m);
  cfg.drift_var = Vec::Zero(m);
  cfg.fresh_lo = Vec::Constant(m, -1.0);
  cfg.fresh_hi = Vec::Constant(m, 1.0);
  cfg.transition.setConstant(1.0 / 3.0);
  return cfg;
}

void AbnormalityConfig::validate(int m) const {
  if (outlier_var.size() != m || bias_jitter_var.size() != m || drift_var.size() != m ||
      fresh_lo.size() != m || fresh_hi.size() != m) {
    throw std::invalid_argument("AbnormalityConfig: dimension mismatch");
  }
  if (outlier_var.minCoeff() < 0.0 || bias_jitter_var.minCoeff() < 0.0 ||
      drift_var.minCoeff() < 0.0) {
    throw std::invalid_argument("AbnormalityConfig: variances must be nonnegative");
  }
  if ((fresh_lo.array() >= fresh_hi.array()).any()) {
    throw std::invalid_argument("AbnormalityConfig: fresh-bias bounds need c < d");
  }
  for (int row = 0; row < 3; ++row) {
    if (std::abs(transition.row(row).sum() - 1.0) > 1e-9 ||
        transition.row(row).minCoeff() < 0.0) {
      throw std::invalid_argument("AbnormalityConfig: transition rows must be simplex");
    }
  }
}

AugmentedParticle propagate_particle(const AugmentedParticle& particle,
                                     const StateSpaceModel& model,
                                     const AbnormalityConfig& cfg, Rng& rng, int step) {
  const ProcessNoise noise(model);
  AugmentedParticle next;
  next.weight = particle.weight;
  next.x = model.apply_transition(particle.x, step);
  noise.add(next.x, rng);

  const int m = static_cast<int>(particle.theta.size());
  next.theta.resize(m);
  next.regimes.resize(m);
  for (int i = 0; i < m; ++i) {
    if (particle.regimes[i] == 2) {
      next.theta[i] = cfg.drift_var[i] > 0.0
                          ? rng.normal(particle.theta[i], std::sqrt(cfg.drift_var[i]))
                          : particle.theta[i];
    } else {
      next.theta[i] = rng.uniform(cfg.fresh_lo[i], cfg.fresh_hi[i]);
    }
    next.regimes[i] = draw_regime(cfg.transition, particle.regimes[i], rng);
  }
  return next;
}

double particle_log_likelihood(const AugmentedParticle& particle, const Vec& y,
                               const StateSpaceModel& model, const AbnormalityConfig& cfg) {
  const Vec h = model.observation(particle.x);
  const int m = static_cast<int>(y.size());

  if (is_diagonal(model.R)) {
    double log_lik = 0.0;
    for (int i = 0; i < m; ++i) {
      double mean = h[i];
      double var = model.R(i, i);
      if (particle.regimes[i] == 1) {
        var += cfg.outlier_var[i];
      } else if (particle.regimes[i] == 2) {
        mean += particle.theta[i];
        var += cfg.bias_jitter_var[i];
      }
      const double r = y[i] - mean;
      log_lik += -0.5 * (kLogTwoPi + std::log(var) + r * r / var);
    }
    return log_lik;
  }

  Vec mean = h;
  Mat cov = model.R;
  for (int i = 0; i < m; ++i) {
    if (particle.regimes[i] == 1) {
      cov(i, i) += cfg.outlier_var[i];
    } else if (particle.regimes[i] == 2) {
      mean[i] += particle.theta[i];
      cov(i, i) += cfg.bias_jitter_var[i];
    }
  }
  return dense_log_normal(y - mean, cov);
}

PfResult robust_pf_run(const StateSpaceModel& model, const Mat& ys, const PfPriors& priors,
                       const AbnormalityConfig& cfg, int N, std::uint64_t seed, PfMode mode,
                       const IdealSchedule* schedule) {
  if (N < 2) {
    throw std::invalid_argument("robust_pf_run: need at least two particles");
  }
  const int K = static_cast<int>(ys.rows());
  const int m = model.m;
  if (mode == PfMode::kRobust) {
    cfg.validate(m);
  }
  if (mode == PfMode::kIdeal &&
      (!schedule || static_cast<int>(schedule->bias_shift.size()) < K)) {
    throw std::invalid_argument("robust_pf_run: ideal mode needs a full schedule");
  }
  const bool diag_r = is_diagonal(model.R);
  const Vec r_diag = model.R.diagonal();
  const Vec drift_std = cfg.drift_var.size() == m ? Vec(cfg.drift_var.cwiseSqrt()) : Vec();
  const ProcessNoise noise(model);

  Rng rng(seed);
  std::vector<AugmentedParticle> particles(N);
  for (auto& p : particles) {
    p.x = priors.sample_x0(rng);
    if (mode == PfMode::kRobust) {
      p.theta = priors.sample_theta0 ? priors.sample_theta0(rng) : Vec::Zero(m);
      p.regimes = priors.sample_regimes0 ? priors.sample_regimes0(rng)
                                         : Eigen::VectorXi::Zero(m);
    } else {
      p.theta = Vec::Zero(m);
      p.regimes = Eigen::VectorXi::Zero(m);
    }
    p.weight = 1.0 / N;
  }

  PfResult result;
  result.estimates.resize(K, model.n);
  result.ess.resize(K);

  Vec log_w(N);
  Vec w(N);
  std::vector<AugmentedParticle> scratch(N);

  for (int k = 0; k < K; ++k) {
    const Vec y = ys.row(k).transpose();

    for (int l = 0; l < N; ++l) {
      auto& p = particles[l];
      p.x = model.apply_transition(p.x, k + 1);
      noise.add(p.x, rng);

      if (mode == PfMode::kRobust) {
        for (int i = 0; i < m; ++i) {
          if (p.regimes[i] == 2) {
            if (cfg.drift_var[i] > 0.0) {
              p.theta[i] += drift_std[i] * rng.normal();
            }
          } else {
            p.theta[i] = rng.uniform(cfg.fresh_lo[i], cfg.fresh_hi[i]);
          }
          p.regimes[i] = draw_regime(cfg.transition, p.regimes[i], rng);
        }
        log_w[l] = particle_log_likelihood(p, y, model, cfg);
        continue;
      }

      const Vec h = model.observation(p.x);
      if (mode == PfMode::kBootstrap) {
        if (diag_r) {
          double s = 0.0;
          for (int i = 0; i < m; ++i) {
            const double r = y[i] - h[i];
            s += -0.5 * (kLogTwoPi + std::log(r_diag[i]) + r * r / r_diag[i]);
          }
          log_w[l] = s;
        } else {
          log_w[l] = dense_log_normal(y - h, model.R);
        }
      } else {
        const Vec& shift = schedule->bias_shift[k];
        const Vec& extra = schedule->extra_noise_var[k];
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
          const double var = r_diag[i] + extra[i];
          const double r = y[i] - h[i] - shift[i];
          s += -0.5 * (kLogTwoPi + std::log(var) + r * r / var);
        }
        log_w[l] = s;
      }
    }

    const double max_log = log_w.maxCoeff();
    if (!std::isfinite(max_log)) {
      w.setConstant(1.0 / N);
      ++result.underflow_resets;
    } else {
      double total = 0.0;
      for (int l = 0; l < N; ++l) {
        w[l] = std::exp(log_w[l] - max_log);
        total += w[l];
      }
      w /= total;
    }

    Vec estimate = Vec::Zero(model.n);
    double sq = 0.0;
    for (int l = 0; l < N; ++l) {
      estimate.noalias() += w[l] * particles[l].x;
      sq += w[l] * w[l];
    }
    result.estimates.row(k) = estimate.transpose();
    result.ess[k] = 1.0 / sq;

    const std::vector<int> picks = systematic_resample(w / w.sum(), rng);
    for (int l = 0; l < N; ++l) {
      scratch[l] = particles[picks[l]];
      scratch[l].weight = 1.0 / N;
    }
    particles.swap(scratch);
  }
  return result;
}

}  // namespace rbe
