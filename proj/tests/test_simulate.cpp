#include <doctest.h>

#include <cmath>

#include "rbe/scenario.hpp"
#include "rbe/simulate.hpp"

#include "oracles.hpp"

using rbe::Mat;
using rbe::StateSpaceModel;
using rbe::Trajectory;
using rbe::Vec;

namespace {

StateSpaceModel identity_model(int n, int m) {
  StateSpaceModel model;
  model.n = n;
  model.m = m;
  model.transition = [](const Vec& x, int) { return x; };
  model.observation = [m](const Vec& x) { return Vec(x.head(m)); };
  model.Q = Mat::Zero(n, n);
  model.R = Mat::Zero(m, m);
  return model;
}

}  // namespace

TEST_CASE("noise-free identity model is a fixed point") {
  StateSpaceModel model = identity_model(2, 2);
  const Vec x0 = (Vec(2) << 1.0, 2.0).finished();
  const Trajectory traj = rbe::simulate(model, x0, 5, 99);
  for (int k = 0; k < 5; ++k) {
    CHECK((traj.states.row(k).transpose() - x0).norm() == doctest::Approx(0.0));
    CHECK((traj.measurements.row(k).transpose() - x0).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("coordinated-turn step matches the closed-form matrix") {
  rbe::ScenarioSpec spec;
  spec.name = "turn-range-bearing";
  spec.m = 6;
  rbe::Scenario sc = rbe::build_scenario(spec);
  sc.model.Q.setZero();
  sc.model.R.setZero();

  const Vec x0 = (Vec(5) << -10000.0, 10.0, 5000.0, -5.0, -0.0524).finished();
  const Trajectory traj = rbe::simulate(sc.model, x0, 1, 1);

  // Turn matrix written out directly from its definition (zeta = 1).
  const double w = x0[4];
  const double s = std::sin(w);
  const double c = std::cos(w);
  Mat F = Mat::Zero(5, 5);
  F << 1, s / w, 0, (c - 1) / w, 0,
       0, c, 0, -s, 0,
       0, (1 - c) / w, 1, s / w, 0,
       0, s, 0, c, 0,
       0, 0, 0, 0, 1;
  const Vec expected = F * x0;
  CHECK((traj.states.row(0).transpose() - expected).norm() < 1e-9 * expected.norm());
}

TEST_CASE("process-noise sample mean vanishes at the Monte-Carlo rate") {
  StateSpaceModel model;
  model.n = 2;
  model.m = 1;
  model.transition = [](const Vec& x, int) { return Vec(0.0 * x); };
  model.observation = [](const Vec& x) { return Vec(x.head(1)); };
  model.Q = (Vec(2) << 2.0, 0.5).finished().asDiagonal();
  model.R = Mat::Identity(1, 1);

  const int K = 100000;
  const Trajectory traj = rbe::simulate(model, Vec::Zero(2), K, 2024);
  // With f = 0 every state row is exactly one process-noise draw.
  for (int i = 0; i < 2; ++i) {
    const double mean = traj.states.col(i).mean();
    const double bound = 4.0 * std::sqrt(model.Q(i, i)) / std::sqrt(double(K));
    CHECK(std::abs(mean) < bound);
  }
}

TEST_CASE("empirical measurement noise covariance converges to R") {
  StateSpaceModel model;
  model.n = 1;
  model.m = 2;
  model.transition = [](const Vec& x, int) { return x; };
  model.observation = [](const Vec&) { return Vec(Vec::Zero(2)); };
  model.Q = Mat::Zero(1, 1);
  Mat R(2, 2);
  R << 2.0, 0.6, 0.6, 1.0;
  model.R = R;

  const int K = 100000;
  const Trajectory traj = rbe::simulate(model, Vec::Zero(1), K, 31);
  Mat cov = Mat::Zero(2, 2);
  for (int k = 0; k < K; ++k) {
    cov += traj.measurements.row(k).transpose() * traj.measurements.row(k);
  }
  cov /= K;
  CHECK((cov - R).norm() <= 0.05 * R.norm());
}

TEST_CASE("simulate is a pure function of (model, x0, K, seed)") {
  rbe::ScenarioSpec spec;
  spec.name = "turn-range-bearing";
  const rbe::Scenario sc = rbe::build_scenario(spec);
  const Trajectory a = rbe::simulate(sc.model, sc.x0, 50, 77);
  const Trajectory b = rbe::simulate(sc.model, sc.x0, 50, 77);
  CHECK((a.states - b.states).norm() == 0.0);
  CHECK((a.measurements - b.measurements).norm() == 0.0);

  const Trajectory c = rbe::simulate(sc.model, sc.x0, 50, 78);
  CHECK((a.measurements - c.measurements).norm() > 0.0);
}

TEST_CASE("dimension mismatch and bad inputs are rejected") {
  StateSpaceModel model = identity_model(2, 2);
  CHECK_THROWS(rbe::simulate(model, Vec::Zero(3), 5, 1));
  CHECK_THROWS(rbe::simulate(model, Vec::Zero(2), 0, 1));
}
