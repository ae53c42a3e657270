#include "rbe/perception.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rbe {

namespace {

double stable_logistic(double t) {
  // 1 / (1 + exp(t)) without overflow.
  if (t > 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

HeuristicKind heuristic_from_name(const std::string& name) {
  if (name == "eror") return HeuristicKind::kEror;
  if (name == "esor") return HeuristicKind::kEsor;
  if (name == "asor") return HeuristicKind::kAsor;
  throw std::invalid_argument("unknown heuristic: " + name);
}

void HeuristicParams::validate() const {
  if (chi <= 0.0 || gamma <= 0.0) {
    throw std::invalid_argument("HeuristicParams: chi and gamma must be positive");
  }
  if (a <= 0.0) {
    throw std::invalid_argument("HeuristicParams: a must be positive");
  }
  if (A <= 1.0) {
    throw std::invalid_argument("HeuristicParams: A > 1 required");
  }
  if (B <= 0.0 || b_hat0 <= 0.0) {
    throw std::invalid_argument("HeuristicParams: B and the initial b must be positive");
  }
  if (theta <= 0.0 || theta >= 1.0) {
    throw std::invalid_argument("HeuristicParams: theta must lie in (0, 1)");
  }
}

HeuristicState HeuristicState::init(const HeuristicParams& params) {
  HeuristicState state;
  state.mu = params.chi;
  state.rho2 = params.gamma;
  state.b_hat = params.b_hat0;
  state.alpha = params.a + 0.5;
  state.zeta = (1.0 / params.theta - 1.0) *
               std::exp(std::lgamma(state.alpha) - std::lgamma(params.a));
  return state;
}

Vec weight_update(HeuristicKind kind, const Vec& residuals_sq, HeuristicState& state,
                  const HeuristicParams& params) {
  const int total = static_cast<int>(residuals_sq.size());
  if (total < 2) {
    throw std::invalid_argument("weight_update: need the regularizer plus one residual");
  }
  Vec weights(total);
  weights[0] = 1.0;

  switch (kind) {
    case HeuristicKind::kEror: {
      if (!params.fixed_scale) {
        // Scale between the residual extremes. The geometric mean is the
        // one that stays well below the largest and well above the smallest
        // squared residual once they separate; the arithmetic mean tracks
        // half the maximum and leaves every gross outlier a weight near
        // 1/3, which never prunes anything.
        const double r_max = residuals_sq.tail(total - 1).maxCoeff();
        const double r_min = residuals_sq.tail(total - 1).minCoeff();
        state.mu = std::max(std::sqrt(r_max * r_min), params.chi);
      }
      for (int i = 1; i < total; ++i) {
        weights[i] = 1.0 / (1.0 + residuals_sq[i] / state.mu);
      }
      break;
    }
    case HeuristicKind::kEsor: {
      // Effective centroid of the squared residuals under the incoming
      // weights, floored by gamma.
      double num = 0.0;
      double den = 0.0;
      for (int i = 1; i < total; ++i) {
        const double w = state.prev_weights.size() == total ? state.prev_weights[i] : 1.0;
        num += w * residuals_sq[i];
        den += w;
      }
      state.rho2 = std::max(den > 0.0 ? num / den : params.gamma, params.gamma);
      for (int i = 1; i < total; ++i) {
        weights[i] = stable_logistic(0.5 * (residuals_sq[i] - state.rho2));
      }
      break;
    }
    case HeuristicKind::kAsor: {
      Vec omega(total);
      Vec beta(total);
      double acc_a = 0.0;
      double acc_b = 0.0;
      for (int i = 1; i < total; ++i) {
        beta[i] = 0.5 * residuals_sq[i] + state.b_hat;
        const double t = std::log(state.zeta) + params.a * std::log(state.b_hat) -
                         state.alpha * std::log(beta[i]) + 0.5 * residuals_sq[i];
        omega[i] = stable_logistic(t);
        acc_a += params.a * (1.0 - omega[i]);
        acc_b += (1.0 - omega[i]) * state.alpha / beta[i];
      }
      state.b_hat = (params.A - 1.0 + acc_a) / (params.B + acc_b);
      if (state.b_hat <= 0.0) {
        throw std::runtime_error("weight_update: ASOR scale collapsed (needs A > 1, B > 0)");
      }
      for (int i = 1; i < total; ++i) {
        weights[i] = omega[i] + (1.0 - omega[i]) * state.alpha / beta[i];
      }
      break;
    }
  }
  state.prev_weights = weights;
  return weights;
}

RobustSolveResult robust_solve(const ResidualProblem& problem, const HeuristicParams& params) {
  params.validate();
  const int total = problem.m + 1;

  HeuristicState state = HeuristicState::init(params);
  RobustSolveResult result;
  result.weights = Vec::Ones(total);

  double prev_cost = -1.0;
  for (int iter = 1; iter <= params.max_iters; ++iter) {
    result.x = problem.solve(result.weights);
    const Vec resid = problem.residuals(result.x);
    const Vec resid_sq = resid.cwiseProduct(resid);
    result.weights = weight_update(params.kind, resid_sq, state, params);
    result.iterations = iter;

    const double cost = result.weights.dot(resid_sq);
    if (prev_cost >= 0.0 &&
        std::abs(cost - prev_cost) < params.conv_tol * std::max(cost, 1e-12)) {
      result.converged = true;
      break;
    }
    prev_cost = cost;

    // Everything rejected: stop rather than fit against nothing. The signal
    // is meaningful for the bounded weights; the Gamma-hierarchy weights are
    // scale-free, so only their relative collapse counts.
    const double mass = result.weights.tail(problem.m).sum();
    if (params.kind == HeuristicKind::kAsor) {
      if (mass < 1e-3 * problem.m * result.weights.tail(problem.m).maxCoeff()) {
        break;
      }
    } else if (mass < 1e-3 * problem.m) {
      break;
    }
  }
  return result;
}

RigidTransform horn_solve(const Eigen::Matrix3Xd& P, const Eigen::Matrix3Xd& Q,
                          const Vec& weights) {
  const int count = static_cast<int>(P.cols());
  if (count < 3 || Q.cols() != count || weights.size() != count) {
    throw std::invalid_argument("horn_solve: need >= 3 weighted correspondences");
  }
  const double mass = weights.sum();
  if (mass <= 0.0) {
    throw std::invalid_argument("horn_solve: effective weight mass must be positive");
  }

  const Eigen::Vector3d p_bar = (P * weights) / mass;
  const Eigen::Vector3d q_bar = (Q * weights) / mass;

  Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
  for (int i = 0; i < count; ++i) {
    S.noalias() += weights[i] * (P.col(i) - p_bar) * (Q.col(i) - q_bar).transpose();
  }

  // Degeneracy: rotations are only observable with spread in two directions.
  {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(S);
    const double top = svd.singularValues()(0);
    if (top <= 0.0 || svd.singularValues()(1) <= 1e-12 * top) {
      throw std::runtime_error("horn_solve: degenerate configuration (rank-deficient spread)");
    }
  }

  Eigen::Matrix4d N;
  const double sxx = S(0, 0), sxy = S(0, 1), sxz = S(0, 2);
  const double syx = S(1, 0), syy = S(1, 1), syz = S(1, 2);
  const double szx = S(2, 0), szy = S(2, 1), szz = S(2, 2);
  N << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(N);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);  // largest eigenvalue
  const double w = q[0], x = q[1], y = q[2], z = q[3];

  RigidTransform out;
  out.rotation << w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z;
  out.translation = q_bar - out.rotation * p_bar;
  return out;
}

double rotation_error_degrees(const Eigen::Matrix3d& estimate, const Eigen::Matrix3d& truth) {
  const double c = ((estimate * truth.transpose()).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
}

RegistrationReport register_point_clouds(const Eigen::Matrix3Xd& P,
                                         const Eigen::Matrix3Xd& Q,
                                         const HeuristicParams& params, double inlier_sigma,
                                         const RigidTransform* truth) {
  const int m = static_cast<int>(P.cols());
  if (inlier_sigma <= 0.0) {
    throw std::invalid_argument("register_point_clouds: inlier_sigma must be positive");
  }

  ResidualProblem problem;
  problem.m = m;
  problem.solve = [&](const Vec& weights) {
    const RigidTransform t = horn_solve(P, Q, weights.tail(m));
    Vec packed(12);
    packed.head(9) = Eigen::Map<const Vec>(t.rotation.data(), 9);
    packed.tail(3) = t.translation;
    return packed;
  };
  problem.residuals = [&](const Vec& packed) {
    const Eigen::Matrix3d R = Eigen::Map<const Eigen::Matrix3d>(packed.data());
    const Eigen::Vector3d t = packed.tail(3);
    Vec r(m + 1);
    r[0] = 0.0;  // no regularizing prior on the pose
    for (int i = 0; i < m; ++i) {
      r[i + 1] = (Q.col(i) - R * P.col(i) - t).norm() / inlier_sigma;
    }
    return r;
  };

  const RobustSolveResult solved = robust_solve(problem, params);

  RegistrationReport report;
  report.transform.rotation = Eigen::Map<const Eigen::Matrix3d>(solved.x.data());
  report.transform.translation = solved.x.tail(3);
  report.weights = solved.weights.tail(m);
  report.iterations = solved.iterations;
  report.converged = solved.converged;
  if (truth) {
    report.has_truth = true;
    report.rotation_error_deg =
        rotation_error_degrees(report.transform.rotation, truth->rotation);
    report.translation_error = (report.transform.translation - truth->translation).norm();
  }
  return report;
}

Correspondences load_correspondences(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open correspondence file: " + path);
  }
  std::vector<std::array<double, 6>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    std::istringstream ss(line);
    std::array<double, 6> row{};
    if (ss >> row[0] >> row[1] >> row[2] >> row[3] >> row[4] >> row[5]) {
      rows.push_back(row);
    }
  }
  Correspondences out;
  out.P.resize(3, rows.size());
  out.Q.resize(3, rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.P.col(i) << rows[i][0], rows[i][1], rows[i][2];
    out.Q.col(i) << rows[i][3], rows[i][4], rows[i][5];
  }
  return out;
}

void save_correspondences(const std::string& path, const Correspondences& pairs) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write correspondence file: " + path);
  }
  out << "# px py pz qx qy qz\n";
  for (int i = 0; i < pairs.P.cols(); ++i) {
    out << pairs.P(0, i) << ' ' << pairs.P(1, i) << ' ' << pairs.P(2, i) << ' '
        << pairs.Q(0, i) << ' ' << pairs.Q(1, i) << ' ' << pairs.Q(2, i) << '\n';
  }
}

}  // namespace rbe
