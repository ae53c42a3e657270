#include "rbe/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace rbe {

namespace {

// Coordinated-turn transition over [a, adot, b, bdot, omega].
Vec turn_transition(const Vec& x, double zeta) {
  const double w = std::abs(x[4]) > 1e-12 ? x[4] : (x[4] >= 0.0 ? 1e-12 : -1e-12);
  const double s = std::sin(w * zeta);
  const double c = std::cos(w * zeta);
  Vec out(5);
  out[0] = x[0] + s / w * x[1] + (c - 1.0) / w * x[3];
  out[1] = c * x[1] - s * x[3];
  out[2] = (1.0 - c) / w * x[1] + x[2] + s / w * x[3];
  out[3] = s * x[1] + c * x[3];
  out[4] = x[4];
  return out;
}

Mat turn_jacobian(const Vec& x, double zeta) {
  const double w = std::abs(x[4]) > 1e-8 ? x[4] : (x[4] >= 0.0 ? 1e-8 : -1e-8);
  const double s = std::sin(w * zeta);
  const double c = std::cos(w * zeta);
  const double w2 = w * w;
  Mat F = Mat::Identity(5, 5);
  F(0, 1) = s / w;
  F(0, 3) = (c - 1.0) / w;
  F(0, 4) = x[1] * (zeta * c * w - s) / w2 + x[3] * (-zeta * s * w - (c - 1.0)) / w2;
  F(1, 1) = c;
  F(1, 3) = -s;
  F(1, 4) = -zeta * s * x[1] - zeta * c * x[3];
  F(2, 1) = (1.0 - c) / w;
  F(2, 3) = s / w;
  F(2, 4) = x[1] * (zeta * s * w - (1.0 - c)) / w2 + x[3] * (zeta * c * w - s) / w2;
  F(3, 1) = s;
  F(3, 3) = c;
  F(3, 4) = zeta * c * x[1] - zeta * s * x[3];
  return F;
}

Mat turn_process_cov(double zeta, double eta1, double eta2) {
  Mat M(2, 2);
  M << zeta * zeta * zeta / 3.0, zeta * zeta / 2.0, zeta * zeta / 2.0, zeta;
  Mat Q = Mat::Zero(5, 5);
  Q.block(0, 0, 2, 2) = eta1 * M;
  Q.block(2, 2, 2, 2) = eta1 * M;
  Q(4, 4) = eta2;
  return Q;
}

struct SensorLayout {
  std::vector<double> ax, ay;
};

SensorLayout bearing_sensors(int count) {
  SensorLayout s;
  for (int j = 1; j <= count; ++j) {
    s.ax.push_back(350.0 * (j - 1));
    s.ay.push_back(350.0 * (j % 2));
  }
  return s;
}

SensorLayout range_sensors(int count) {
  SensorLayout s;
  for (int j = 1; j <= count; ++j) {
    s.ax.push_back(350.0 * (j - 1));
    s.ay.push_back(350.0 * ((j - 1) % 2));
  }
  return s;
}

Scenario build_turn_range_bearing(const ScenarioSpec& spec) {
  if (spec.m < 2 || spec.m % 2 != 0) {
    throw std::invalid_argument("turn-range-bearing: m must be even and >= 2");
  }
  const int half = spec.m / 2;
  const SensorLayout bearings = bearing_sensors(half);
  const SensorLayout ranges = range_sensors(half);

  Scenario sc;
  sc.spec = spec;
  sc.model.n = 5;
  sc.model.m = spec.m;
  const double zeta = spec.zeta;
  sc.model.transition = [zeta](const Vec& x, int) { return turn_transition(x, zeta); };
  sc.model.transition_jacobian = [zeta](const Vec& x, int) { return turn_jacobian(x, zeta); };
  sc.model.observation = [bearings, ranges, half](const Vec& x) {
    Vec y(2 * half);
    for (int j = 0; j < half; ++j) {
      y[j] = std::atan2(x[2] - bearings.ay[j], x[0] - bearings.ax[j]);
    }
    for (int j = 0; j < half; ++j) {
      const double da = x[0] - ranges.ax[j];
      const double db = x[2] - ranges.ay[j];
      y[half + j] = std::sqrt(da * da + db * db);
    }
    return y;
  };
  sc.model.observation_jacobian = [bearings, ranges, half](const Vec& x) {
    Mat H = Mat::Zero(2 * half, 5);
    for (int j = 0; j < half; ++j) {
      const double da = x[0] - bearings.ax[j];
      const double db = x[2] - bearings.ay[j];
      const double r2 = da * da + db * db;
      H(j, 0) = -db / r2;
      H(j, 2) = da / r2;
    }
    for (int j = 0; j < half; ++j) {
      const double da = x[0] - ranges.ax[j];
      const double db = x[2] - ranges.ay[j];
      const double r = std::sqrt(da * da + db * db);
      H(half + j, 0) = da / r;
      H(half + j, 2) = db / r;
    }
    return H;
  };
  sc.model.Q = turn_process_cov(spec.zeta, spec.eta1, spec.eta2);
  sc.meas_var.resize(spec.m);
  sc.meas_var.head(half).setConstant(spec.sigma_theta * spec.sigma_theta);
  sc.meas_var.tail(half).setConstant(spec.sigma_rho * spec.sigma_rho);
  sc.model.R = sc.meas_var.asDiagonal();

  sc.x0 = spec.x0.size() ? spec.x0
                         : (Vec(5) << -10000.0, 10.0, 5000.0, -5.0, -0.0524).finished();
  sc.P0 = 100.0 * sc.model.Q;
  sc.position_dims = {0, 2};
  return sc;
}

Scenario build_turn_tdoa(const ScenarioSpec& spec) {
  if (spec.m < 2) {
    throw std::invalid_argument("turn-tdoa: need at least two sensors");
  }
  const SensorLayout sensors = range_sensors(spec.m);
  const int dims = spec.m - 1;

  Scenario sc;
  sc.spec = spec;
  sc.model.n = 5;
  sc.model.m = dims;
  const double zeta = spec.zeta;
  sc.model.transition = [zeta](const Vec& x, int) { return turn_transition(x, zeta); };
  sc.model.transition_jacobian = [zeta](const Vec& x, int) { return turn_jacobian(x, zeta); };
  sc.model.observation = [sensors, dims](const Vec& x) {
    const double da0 = x[0] - sensors.ax[0];
    const double db0 = x[2] - sensors.ay[0];
    const double r0 = std::sqrt(da0 * da0 + db0 * db0);
    Vec y(dims);
    for (int j = 0; j < dims; ++j) {
      const double da = x[0] - sensors.ax[j + 1];
      const double db = x[2] - sensors.ay[j + 1];
      y[j] = r0 - std::sqrt(da * da + db * db);
    }
    return y;
  };
  sc.model.observation_jacobian = [sensors, dims](const Vec& x) {
    const double da0 = x[0] - sensors.ax[0];
    const double db0 = x[2] - sensors.ay[0];
    const double r0 = std::sqrt(da0 * da0 + db0 * db0);
    Mat H = Mat::Zero(dims, 5);
    for (int j = 0; j < dims; ++j) {
      const double da = x[0] - sensors.ax[j + 1];
      const double db = x[2] - sensors.ay[j + 1];
      const double r = std::sqrt(da * da + db * db);
      H(j, 0) = da0 / r0 - da / r;
      H(j, 2) = db0 / r0 - db / r;
    }
    return H;
  };
  sc.model.Q = turn_process_cov(spec.zeta, spec.eta1, spec.eta2);
  sc.model.R = Mat::Constant(dims, dims, spec.sigma2_tdoa);
  sc.model.R.diagonal().array() += spec.sigma2_tdoa;
  sc.meas_var = sc.model.R.diagonal();
  sc.tdoa_sensor_count = spec.m;

  sc.x0 = spec.x0.size() ? spec.x0 : (Vec(5) << 0.0, 1.0, 0.0, -1.0, -0.0524).finished();
  sc.P0 = sc.model.Q;
  sc.position_dims = {0, 2};
  return sc;
}

Scenario build_turn_range(const ScenarioSpec& spec) {
  const SensorLayout sensors = range_sensors(spec.m);

  Scenario sc;
  sc.spec = spec;
  sc.model.n = 5;
  sc.model.m = spec.m;
  const double zeta = spec.zeta;
  sc.model.transition = [zeta](const Vec& x, int) { return turn_transition(x, zeta); };
  sc.model.transition_jacobian = [zeta](const Vec& x, int) { return turn_jacobian(x, zeta); };
  const int m = spec.m;
  sc.model.observation = [sensors, m](const Vec& x) {
    Vec y(m);
    for (int j = 0; j < m; ++j) {
      const double da = x[0] - sensors.ax[j];
      const double db = x[2] - sensors.ay[j];
      y[j] = std::sqrt(da * da + db * db);
    }
    return y;
  };
  sc.model.observation_jacobian = [sensors, m](const Vec& x) {
    Mat H = Mat::Zero(m, 5);
    for (int j = 0; j < m; ++j) {
      const double da = x[0] - sensors.ax[j];
      const double db = x[2] - sensors.ay[j];
      const double r = std::sqrt(da * da + db * db);
      H(j, 0) = da / r;
      H(j, 2) = db / r;
    }
    return H;
  };
  sc.model.Q = turn_process_cov(spec.zeta, spec.eta1, spec.eta2);
  sc.model.R = spec.r_range * Mat::Identity(spec.m, spec.m);
  sc.meas_var = sc.model.R.diagonal();

  sc.x0 = spec.x0.size() ? spec.x0
                         : (Vec(5) << 0.0, 10.0, 0.0, -5.0, 3.0 * M_PI / 180.0).finished();
  sc.P0 = sc.model.Q;
  sc.position_dims = {0, 2};
  sc.init_at_truth = true;
  return sc;
}

Scenario build_growth_1d(const ScenarioSpec& spec) {
  Scenario sc;
  sc.spec = spec;
  sc.model.n = 1;
  sc.model.m = 1;
  sc.model.transition = [](const Vec& x, int k) {
    Vec out(1);
    out[0] = 1.0 + std::sin(0.04 * M_PI * k) + 0.5 * x[0];
    return out;
  };
  sc.model.transition_jacobian = [](const Vec&, int) {
    Mat F(1, 1);
    F << 0.5;
    return F;
  };
  sc.model.observation = [](const Vec& x) {
    Vec y(1);
    y[0] = 0.2 * x[0] * x[0];
    return y;
  };
  sc.model.observation_jacobian = [](const Vec& x) {
    Mat H(1, 1);
    H << 0.4 * x[0];
    return H;
  };
  sc.model.Q = Mat::Constant(1, 1, 12.0);  // Gamma(3, 2) variance
  sc.model.R = Mat::Constant(1, 1, 5.0);
  sc.model.process_noise_sampler = [](Rng& rng) {
    Vec q(1);
    q[0] = rng.gamma(3.0, 2.0);
    return q;
  };
  sc.meas_var = sc.model.R.diagonal();

  sc.x0 = spec.x0.size() ? spec.x0 : Vec::Constant(1, 0.1);
  sc.P0 = Mat::Constant(1, 1, std::sqrt(2.0));
  sc.position_dims = {0};

  AbnormalityConfig ab;
  ab.outlier_var = Vec::Constant(1, 500.0 * 500.0 * 5.0);
  ab.bias_jitter_var = Vec::Constant(1, 0.01);
  ab.drift_var = Vec::Constant(1, 0.25);
  ab.fresh_lo = Vec::Constant(1, -1000.0);
  ab.fresh_hi = Vec::Constant(1, 1000.0);
  ab.transition.setConstant(1.0 / 3.0);
  sc.pf_abnormality = ab;
  const Vec mean = sc.x0;
  const double std0 = std::sqrt(std::sqrt(2.0));
  sc.sample_x0_prior = [mean, std0](Rng& rng) {
    Vec x(1);
    x[0] = rng.normal(mean[0], std0);
    return x;
  };
  return sc;
}

Scenario build_cv_range_bearing(const ScenarioSpec& spec) {
  const double dt = spec.zeta;

  Scenario sc;
  sc.spec = spec;
  sc.model.n = 4;
  sc.model.m = 2;
  Mat F(4, 4);
  F << 1, 0, dt, 0, 0, 1, 0, dt, 0, 0, 1, 0, 0, 0, 0, 1;
  sc.model.transition = [F](const Vec& x, int) { return Vec(F * x); };
  sc.model.transition_jacobian = [F](const Vec&, int) { return F; };
  sc.model.observation = [](const Vec& x) {
    Vec y(2);
    y[0] = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    y[1] = std::atan2(x[1], x[0]);
    return y;
  };
  sc.model.observation_jacobian = [](const Vec& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const double r = std::sqrt(r2);
    Mat H = Mat::Zero(2, 4);
    H(0, 0) = x[0] / r;
    H(0, 1) = x[1] / r;
    H(1, 0) = -x[1] / r2;
    H(1, 1) = x[0] / r2;
    return H;
  };
  Mat G(4, 2);
  G << dt * dt / 2.0, 0, 0, dt * dt / 2.0, dt, 0, 0, dt;
  sc.model.Q = G * G.transpose();
  sc.model.R = Vec((Vec(2) << 8.0, 0.002).finished()).asDiagonal();
  sc.meas_var = sc.model.R.diagonal();

  sc.x0 = spec.x0.size() ? spec.x0 : (Vec(4) << 80.0, 5.0, 0.0, 5.0).finished();
  sc.P0 = Vec((Vec(4) << 25.0, 25.0, 1.0, 1.0).finished()).asDiagonal();
  sc.position_dims = {0, 1};

  AbnormalityConfig ab;
  ab.outlier_var = 500.0 * sc.meas_var;
  ab.bias_jitter_var = (Vec(2) << 4.0, 0.001).finished();
  ab.drift_var = (Vec(2) << 0.01, 1e-8).finished();
  ab.fresh_hi = (Vec(2) << 1000.0, M_PI).finished();
  ab.fresh_lo = -ab.fresh_hi;
  ab.transition.setConstant(1.0 / 3.0);
  sc.pf_abnormality = ab;
  const Vec mean = sc.x0;
  const Vec p0_std = sc.P0.diagonal().cwiseSqrt();
  sc.sample_x0_prior = [mean, p0_std](Rng& rng) {
    Vec x(mean.size());
    for (int i = 0; i < x.size(); ++i) {
      x[i] = rng.normal(mean[i], p0_std[i]);
    }
    return x;
  };
  return sc;
}

}  // namespace

Scenario build_scenario(const ScenarioSpec& raw) {
  ScenarioSpec spec = raw;
  if (spec.m <= 0) {
    if (spec.name == "turn-range-bearing") spec.m = 6;
    else if (spec.name == "turn-tdoa") spec.m = 10;
    else if (spec.name == "turn-range") spec.m = 4;
    else spec.m = 1;
  }
  Scenario sc;
  if (spec.name == "turn-range-bearing") {
    sc = build_turn_range_bearing(spec);
  } else if (spec.name == "turn-tdoa") {
    sc = build_turn_tdoa(spec);
  } else if (spec.name == "turn-range") {
    sc = build_turn_range(spec);
  } else if (spec.name == "growth-1d") {
    sc = build_growth_1d(spec);
  } else if (spec.name == "cv-range-bearing") {
    sc = build_cv_range_bearing(spec);
  } else {
    throw std::invalid_argument("unknown scenario: " + spec.name);
  }
  if (!sc.sample_x0_prior) {
    const Vec mean = sc.x0;
    const Mat root = sc.P0.llt().matrixL();
    const int n = sc.model.n;
    sc.sample_x0_prior = [mean, root, n](Rng& rng) {
      Vec z(n);
      for (int i = 0; i < n; ++i) {
        z[i] = rng.normal();
      }
      return Vec(mean + root * z);
    };
  }
  if (sc.pf_abnormality.outlier_var.size() == 0) {
    sc.pf_abnormality = AbnormalityConfig::uniform_defaults(sc.model.m);
    sc.pf_abnormality.outlier_var = 500.0 * sc.meas_var;
    sc.pf_abnormality.bias_jitter_var = 0.01 * sc.meas_var;
    sc.pf_abnormality.drift_var = 0.25 * sc.meas_var;
    sc.pf_abnormality.fresh_hi = Vec::Constant(sc.model.m, 1000.0);
    sc.pf_abnormality.fresh_lo = -sc.pf_abnormality.fresh_hi;
  }
  return sc;
}

std::pair<Scenario, Trajectory> make_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  Scenario sc = build_scenario(spec);
  Trajectory traj = simulate(sc.model, sc.x0, spec.K, seed);
  return {std::move(sc), std::move(traj)};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace rbe
