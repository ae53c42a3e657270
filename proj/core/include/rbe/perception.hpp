#pragma once

#include <functional>
#include <string>

#include "rbe/types.hpp"

namespace rbe {

enum class HeuristicKind { kEror, kEsor, kAsor };

HeuristicKind heuristic_from_name(const std::string& name);

struct HeuristicParams {
  HeuristicKind kind = HeuristicKind::kEsor;
  // Inlier-error floor (the expected maximum inlier squared residual).
  double chi = 1.0;    // EROR
  double gamma = 1.0;  // ESOR
  // Gamma-hierarchy block.
  double a = 0.5;
  double A = 10000.0;
  double B = 1000.0;
  double b_hat0 = 10000.0;
  double theta = 0.5;
  double conv_tol = 1e-5;
  int max_iters = 250;
  // Standard fixed-scale variant of the EROR path (no mu adaptation);
  // experimental, kept for comparison runs.
  bool fixed_scale = false;

  void validate() const;
};

// Mutable per-run state of a weight heuristic (scale estimates, Gamma-ratio
// constants precomputed once).
struct HeuristicState {
  double mu = 0.0;
  double rho2 = 0.0;
  double b_hat = 0.0;
  double alpha = 0.0;
  double zeta = 0.0;
  Vec prev_weights;  // weights used in the preceding variable update

  static HeuristicState init(const HeuristicParams& params);
};

// One reweighting pass. residuals_sq holds the m+1 squared residuals with the
// regularizer at index 0; index 0 never enters the parameter statistics and
// its weight stays pinned at 1.
Vec weight_update(HeuristicKind kind, const Vec& residuals_sq, HeuristicState& state,
                  const HeuristicParams& params);

// A weighted nonlinear least-squares problem exposed through its non-minimal
// solver and (whitened) residual map over m measurements plus the index-0
// regularizer.
struct ResidualProblem {
  std::function<Vec(const Vec& weights)> solve;
  std::function<Vec(const Vec& x)> residuals;
  int m = 0;
};

struct RobustSolveResult {
  Vec x;
  Vec weights;
  int iterations = 0;
  bool converged = false;
};

RobustSolveResult robust_solve(const ResidualProblem& problem, const HeuristicParams& params);

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

// Weighted closed-form absolute orientation (quaternion method): minimizes
// sum_i w_i ||q_i - R p_i - t||^2 over proper rotations.
RigidTransform horn_solve(const Eigen::Matrix3Xd& P, const Eigen::Matrix3Xd& Q,
                          const Vec& weights);

struct RegistrationReport {
  RigidTransform transform;
  Vec weights;  // per-correspondence, regularizer excluded
  int iterations = 0;
  bool converged = false;
  bool has_truth = false;
  double rotation_error_deg = 0.0;
  double translation_error = 0.0;
};

// Robust registration: horn_solve wrapped by the chosen heuristic, residuals
// whitened by the inlier noise scale.
RegistrationReport register_point_clouds(const Eigen::Matrix3Xd& P,
                                         const Eigen::Matrix3Xd& Q,
                                         const HeuristicParams& params,
                                         double inlier_sigma = 1.0,
                                         const RigidTransform* truth = nullptr);

double rotation_error_degrees(const Eigen::Matrix3d& estimate, const Eigen::Matrix3d& truth);

struct Correspondences {
  Eigen::Matrix3Xd P;
  Eigen::Matrix3Xd Q;
};

// Plain-text correspondence file: one "px py pz qx qy qz" line per pair,
// '#' starts a comment.
Correspondences load_correspondences(const std::string& path);
void save_correspondences(const std::string& path, const Correspondences& pairs);

}  // namespace rbe
