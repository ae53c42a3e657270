#include <doctest.h>

#include <cmath>

#include "rbe/scenario.hpp"

using rbe::Mat;
using rbe::ScenarioSpec;
using rbe::Vec;

TEST_CASE("tdoa covariance carries the shared-reference structure") {
  ScenarioSpec spec;
  spec.name = "turn-tdoa";
  spec.m = 10;
  spec.sigma2_tdoa = 10.0;
  const rbe::Scenario sc = rbe::build_scenario(spec);

  CHECK(sc.model.m == 9);
  CHECK(sc.model.R.rows() == 9);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      CHECK(sc.model.R(i, j) == doctest::Approx(i == j ? 20.0 : 10.0));
    }
  }
}

TEST_CASE("noise-free growth recursion is the deterministic drive") {
  ScenarioSpec spec;
  spec.name = "growth-1d";
  rbe::Scenario sc = rbe::build_scenario(spec);
  sc.model.Q.setZero();
  sc.model.R.setZero();
  sc.model.process_noise_sampler = [](rbe::Rng&) { return Vec(Vec::Zero(1)); };

  const rbe::Trajectory traj = rbe::simulate(sc.model, sc.x0, 20, 1);
  double x = sc.x0[0];
  for (int k = 1; k <= 20; ++k) {
    x = 1.0 + std::sin(0.04 * M_PI * k) + 0.5 * x;
    CHECK(traj.states(k - 1, 0) == doctest::Approx(x).epsilon(1e-12));
    CHECK(traj.measurements(k - 1, 0) == doctest::Approx(0.2 * x * x).epsilon(1e-12));
  }
}

TEST_CASE("bearing geometry: target at (0,350) seen from the origin sensor") {
  ScenarioSpec spec;
  spec.name = "turn-range-bearing";
  spec.m = 2;  // one bearing sensor at (0, 350), one range sensor at (0, 0)
  const rbe::Scenario sc = rbe::build_scenario(spec);

  // Bearing sensor 1 sits at (0, 350); put the target at (0, 700) so the
  // offset is (0, 350) and atan2(350, 0) = pi/2.
  Vec x = Vec::Zero(5);
  x[0] = 0.0;
  x[2] = 700.0;
  const Vec y = sc.model.observation(x);
  CHECK(y[0] == doctest::Approx(M_PI / 2).epsilon(1e-12));
  // Range sensor 1 sits at the origin.
  CHECK(y[1] == doctest::Approx(700.0).epsilon(1e-12));
}

TEST_CASE("base parameters land in the built models") {
  ScenarioSpec ch4;
  ch4.name = "turn-range-bearing";
  const rbe::Scenario a = rbe::build_scenario(ch4);
  CHECK(a.x0[0] == doctest::Approx(-10000.0));
  CHECK(a.x0[4] == doctest::Approx(-0.0524));
  CHECK(a.model.Q(4, 4) == doctest::Approx(1.75e-4));
  CHECK(a.model.R(0, 0) == doctest::Approx(3.5e-3 * 3.5e-3));
  CHECK(a.model.R(3, 3) == doctest::Approx(100.0));
  CHECK((a.P0 - 100.0 * a.model.Q).norm() < 1e-12);

  ScenarioSpec ch6b;
  ch6b.name = "turn-range";
  const rbe::Scenario b = rbe::build_scenario(ch6b);
  CHECK(b.model.m == 4);
  CHECK(b.model.R(0, 0) == doctest::Approx(4.0));
  CHECK(b.init_at_truth);
  CHECK(b.x0[4] == doctest::Approx(3.0 * M_PI / 180.0));

  ScenarioSpec ch7b;
  ch7b.name = "cv-range-bearing";
  const rbe::Scenario c = rbe::build_scenario(ch7b);
  CHECK(c.model.n == 4);
  CHECK(c.model.R(0, 0) == doctest::Approx(8.0));
  CHECK(c.model.R(1, 1) == doctest::Approx(0.002));
  CHECK(c.pf_abnormality.fresh_hi[1] == doctest::Approx(M_PI));
}

TEST_CASE("make_scenario is reproducible per seed") {
  ScenarioSpec spec;
  spec.name = "turn-tdoa";
  spec.m = 5;
  spec.K = 20;
  const auto [sc_a, traj_a] = rbe::make_scenario(spec, 123);
  const auto [sc_b, traj_b] = rbe::make_scenario(spec, 123);
  CHECK((traj_a.measurements - traj_b.measurements).norm() == 0.0);
}

TEST_CASE("unknown scenario names are rejected") {
  ScenarioSpec spec;
  spec.name = "no-such-scenario";
  CHECK_THROWS(rbe::build_scenario(spec));
}
