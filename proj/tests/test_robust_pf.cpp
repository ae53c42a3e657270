#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "rbe/robust_pf.hpp"
#include "rbe/scenario.hpp"
#include "rbe/simulate.hpp"

#include "oracles.hpp"

using rbe::AbnormalityConfig;
using rbe::AugmentedParticle;
using rbe::Mat;
using rbe::PfMode;
using rbe::PfPriors;
using rbe::Rng;
using rbe::StateSpaceModel;
using rbe::Vec;

namespace {

StateSpaceModel scalar_linear(double a, double b, double q, double r) {
  StateSpaceModel model;
  model.n = 1;
  model.m = 1;
  model.transition = [a](const Vec& x, int) { return Vec(a * x); };
  model.observation = [b](const Vec& x) { return Vec(b * x); };
  model.Q = Mat::Constant(1, 1, q);
  model.R = Mat::Constant(1, 1, r);
  return model;
}

AbnormalityConfig small_config(int m) {
  AbnormalityConfig cfg = AbnormalityConfig::uniform_defaults(m);
  cfg.outlier_var = Vec::Constant(m, 100.0);
  cfg.bias_jitter_var = Vec::Constant(m, 0.01);
  cfg.drift_var = Vec::Constant(m, 0.25);
  cfg.fresh_lo = Vec::Constant(m, -10.0);
  cfg.fresh_hi = Vec::Constant(m, 10.0);
  return cfg;
}

}  // namespace

TEST_CASE("bias persists exactly when the drift variance is zero") {
  StateSpaceModel model = scalar_linear(1.0, 1.0, 1.0, 1.0);
  AbnormalityConfig cfg = small_config(1);
  cfg.drift_var.setZero();

  AugmentedParticle p;
  p.x = Vec::Zero(1);
  p.theta = Vec::Constant(1, 3.5);
  p.regimes = Eigen::VectorXi::Constant(1, 2);
  p.weight = 1.0;

  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const AugmentedParticle next = rbe::propagate_particle(p, model, cfg, rng);
    CHECK(next.theta[0] == doctest::Approx(3.5));
  }
}

TEST_CASE("fresh bias draws have the uniform moments") {
  StateSpaceModel model = scalar_linear(1.0, 1.0, 1.0, 1.0);
  AbnormalityConfig cfg = small_config(1);
  const double d = cfg.fresh_hi[0];

  AugmentedParticle p;
  p.x = Vec::Zero(1);
  p.theta = Vec::Zero(1);
  p.regimes = Eigen::VectorXi::Zero(1);
  p.weight = 1.0;

  Rng rng(6);
  const int n = 100000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += rbe::propagate_particle(p, model, cfg, rng).theta[0];
  }
  const double bound = 4.0 * d / std::sqrt(3.0 * n);
  CHECK(std::abs(acc / n) < bound);
}

TEST_CASE("uniform transitions give a uniform regime marginal") {
  StateSpaceModel model = scalar_linear(1.0, 1.0, 1.0, 1.0);
  const AbnormalityConfig cfg = small_config(1);

  AugmentedParticle p;
  p.x = Vec::Zero(1);
  p.theta = Vec::Zero(1);
  p.regimes = Eigen::VectorXi::Zero(1);
  p.weight = 1.0;

  Rng rng(7);
  int counts[3] = {0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    ++counts[rbe::propagate_particle(p, model, cfg, rng).regimes[0]];
  }
  for (int c : counts) {
    CHECK(std::abs(c - n / 3) < 4 * std::sqrt(n * (1.0 / 3) * (2.0 / 3)));
  }
}

TEST_CASE("clean-regime likelihood equals the dense normal density") {
  std::mt19937 gen(8);
  const oracle::LinearModel lin = oracle::random_linear_model(2, 2, gen);
  StateSpaceModel model;
  model.n = 2;
  model.m = 2;
  const Mat H = lin.H;
  model.transition = [](const Vec& x, int) { return x; };
  model.observation = [H](const Vec& x) { return Vec(H * x); };
  model.Q = lin.Q;
  model.R = lin.R;

  AugmentedParticle p;
  p.x = oracle::random_vec(2, gen);
  p.theta = Vec::Zero(2);
  p.regimes = Eigen::VectorXi::Zero(2);
  const Vec y = oracle::random_vec(2, gen, 2.0);

  const double got = rbe::particle_log_likelihood(p, y, model, small_config(2));
  const double expected = oracle::log_normal_pdf(y, H * p.x, lin.R);
  CHECK(got == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("an outlier regime flattens its dimension's contribution") {
  StateSpaceModel model = scalar_linear(1.0, 1.0, 1.0, 1.0);
  AbnormalityConfig cfg = small_config(1);
  cfg.outlier_var = Vec::Constant(1, 500.0 * model.R(0, 0));

  AugmentedParticle p;
  p.x = Vec::Zero(1);
  p.theta = Vec::Zero(1);
  p.regimes = Eigen::VectorXi::Constant(1, 1);

  const double at_zero = rbe::particle_log_likelihood(p, Vec::Zero(1), model, cfg);
  // Change stays below 0.01 while the squared residual stays within 10 R...
  const double r_small = std::sqrt(10.0 * model.R(0, 0));
  const double near = rbe::particle_log_likelihood(p, Vec::Constant(1, r_small), model, cfg);
  CHECK(std::abs(near - at_zero) <= 0.01);
  // ...and below 0.1 out to ten standard deviations of the nominal noise.
  const double r_big = 10.0 * std::sqrt(model.R(0, 0));
  const double far = rbe::particle_log_likelihood(p, Vec::Constant(1, r_big), model, cfg);
  CHECK(std::abs(far - at_zero) <= 0.1);
  // The clean regime would have moved by dozens of nats over the same span.
  p.regimes[0] = 0;
  const double clean_far = rbe::particle_log_likelihood(p, Vec::Constant(1, r_big), model, cfg);
  const double clean_zero = rbe::particle_log_likelihood(p, Vec::Zero(1), model, cfg);
  CHECK(std::abs(clean_far - clean_zero) > 10.0);
}

TEST_CASE("bias regime shifts the mean and inflates the variance") {
  std::mt19937 gen(9);
  const oracle::LinearModel lin = oracle::random_linear_model(2, 2, gen);
  StateSpaceModel model;
  model.n = 2;
  model.m = 2;
  const Mat H = lin.H;
  model.transition = [](const Vec& x, int) { return x; };
  model.observation = [H](const Vec& x) { return Vec(H * x); };
  model.Q = lin.Q;
  model.R = lin.R;

  AbnormalityConfig cfg = small_config(2);
  AugmentedParticle p;
  p.x = oracle::random_vec(2, gen);
  p.theta = (Vec(2) << 2.0, -1.0).finished();
  p.regimes = (Eigen::VectorXi(2) << 2, 1).finished();
  const Vec y = oracle::random_vec(2, gen, 2.0);

  Vec mean = H * p.x;
  mean[0] += p.theta[0];
  Mat cov = lin.R;
  cov(0, 0) += cfg.bias_jitter_var[0];
  cov(1, 1) += cfg.outlier_var[1];
  const double expected = oracle::log_normal_pdf(y, mean, cov);
  CHECK(rbe::particle_log_likelihood(p, y, model, cfg) ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("bootstrap filter tracks the Kalman filter on a clean linear model") {
  const double a = 0.9, b = 1.0, q = 1.0, r = 1.0;
  StateSpaceModel model = scalar_linear(a, b, q, r);
  const int K = 100;
  const rbe::Trajectory traj = rbe::simulate(model, Vec::Zero(1), K, 1001);

  PfPriors priors;
  priors.sample_x0 = [](Rng& rng) { return Vec(Vec::Constant(1, rng.normal(0.0, 1.0))); };
  const auto pf = rbe::robust_pf_run(model, traj.measurements, priors,
                                     AbnormalityConfig::uniform_defaults(1), 10000, 4242,
                                     PfMode::kBootstrap);

  oracle::LinearModel lin{Mat::Constant(1, 1, a), Mat::Constant(1, 1, b),
                          Mat::Constant(1, 1, q), Mat::Constant(1, 1, r)};
  oracle::Belief belief{Vec::Zero(1), Mat::Identity(1, 1)};
  double kf_sq = 0.0;
  double pf_sq = 0.0;
  for (int k = 0; k < K; ++k) {
    belief = oracle::kf_update(oracle::kf_predict(belief, lin),
                               traj.measurements.row(k).transpose(), lin);
    kf_sq += std::pow(belief.mean[0] - traj.states(k, 0), 2);
    pf_sq += std::pow(pf.estimates(k, 0) - traj.states(k, 0), 2);
  }
  const double kf_rmse = std::sqrt(kf_sq / K);
  const double pf_rmse = std::sqrt(pf_sq / K);
  CHECK(pf_rmse <= 1.1 * kf_rmse);
  CHECK(pf.ess.minCoeff() >= 1.0);
  CHECK(pf.ess.maxCoeff() <= 10000.0);
}

TEST_CASE("robust mode with clean-pinned regimes reduces to the bootstrap filter") {
  StateSpaceModel model = scalar_linear(0.9, 1.0, 1.0, 1.0);
  const int K = 60;
  const rbe::Trajectory traj = rbe::simulate(model, Vec::Zero(1), K, 77);

  AbnormalityConfig cfg = AbnormalityConfig::uniform_defaults(1);
  cfg.outlier_var.setZero();
  cfg.bias_jitter_var.setZero();
  cfg.transition.setZero();
  cfg.transition.col(0).setOnes();  // every regime jumps to clean

  PfPriors priors;
  priors.sample_x0 = [](Rng& rng) { return Vec(Vec::Constant(1, rng.normal(0.0, 1.0))); };
  priors.sample_theta0 = [](Rng&) { return Vec(Vec::Zero(1)); };
  priors.sample_regimes0 = [](Rng&) { return Eigen::VectorXi(Eigen::VectorXi::Zero(1)); };

  std::vector<double> robust_rmse, bootstrap_rmse;
  for (int rep = 0; rep < 8; ++rep) {
    const auto robust = rbe::robust_pf_run(model, traj.measurements, priors, cfg, 4000,
                                           500 + rep, PfMode::kRobust);
    const auto boot = rbe::robust_pf_run(model, traj.measurements, priors, cfg, 4000,
                                         900 + rep, PfMode::kBootstrap);
    double sq_r = 0.0, sq_b = 0.0;
    for (int k = 0; k < K; ++k) {
      sq_r += std::pow(robust.estimates(k, 0) - traj.states(k, 0), 2);
      sq_b += std::pow(boot.estimates(k, 0) - traj.states(k, 0), 2);
    }
    robust_rmse.push_back(std::sqrt(sq_r / K));
    bootstrap_rmse.push_back(std::sqrt(sq_b / K));
  }
  const double mean_r =
      std::accumulate(robust_rmse.begin(), robust_rmse.end(), 0.0) / robust_rmse.size();
  const double mean_b = std::accumulate(bootstrap_rmse.begin(), bootstrap_rmse.end(), 0.0) /
                        bootstrap_rmse.size();
  CHECK(mean_r / mean_b >= 0.9);
  CHECK(mean_r / mean_b <= 1.1);
}

TEST_CASE("a deterministic model collapses every particle onto the truth") {
  StateSpaceModel model = scalar_linear(0.95, 1.0, 0.0, 0.0);
  const int K = 10;
  const rbe::Trajectory traj = rbe::simulate(model, Vec::Constant(1, 2.0), K, 1);

  PfPriors priors;
  priors.sample_x0 = [](Rng&) { return Vec(Vec::Constant(1, 2.0)); };
  const auto pf = rbe::robust_pf_run(model, traj.measurements, priors,
                                     AbnormalityConfig::uniform_defaults(1), 64, 3,
                                     PfMode::kBootstrap);
  for (int k = 0; k < K; ++k) {
    CHECK(pf.estimates(k, 0) == doctest::Approx(traj.states(k, 0)).epsilon(1e-12));
  }
}

TEST_CASE("seeding makes runs reproducible") {
  rbe::ScenarioSpec spec;
  spec.name = "growth-1d";
  spec.K = 30;
  const rbe::Scenario sc = rbe::build_scenario(spec);
  const rbe::Trajectory traj = rbe::simulate(sc.model, sc.x0, spec.K, 11);

  PfPriors priors;
  priors.sample_x0 = sc.sample_x0_prior;
  priors.sample_theta0 = [](Rng& rng) {
    return Vec(Vec::Constant(1, rng.normal(0.0, std::sqrt(0.001))));
  };
  priors.sample_regimes0 = [](Rng& rng) {
    return Eigen::VectorXi(Eigen::VectorXi::Constant(1, rng.uniform_int(3)));
  };
  const auto a = rbe::robust_pf_run(sc.model, traj.measurements, priors, sc.pf_abnormality,
                                    500, 999, PfMode::kRobust);
  const auto b = rbe::robust_pf_run(sc.model, traj.measurements, priors, sc.pf_abnormality,
                                    500, 999, PfMode::kRobust);
  CHECK((a.estimates - b.estimates).norm() == 0.0);
}
