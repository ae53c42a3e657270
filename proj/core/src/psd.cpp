#include "rbe/psd.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace rbe {

namespace {
std::atomic<long> g_clamp_reports{0};
}

Mat symmetrize_psd(const Mat& M, PsdRepairStats* stats) {
  if (M.rows() != M.cols()) {
    throw std::invalid_argument("symmetrize_psd: matrix must be square");
  }
  const Mat sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("symmetrize_psd: eigendecomposition failed");
  }
  Vec vals = eig.eigenvalues();
  const double min_val = vals.minCoeff();
  if (min_val >= 0.0) {
    if (stats) {
      *stats = PsdRepairStats{};
    }
    return sym;
  }
  vals = vals.cwiseMax(0.0);
  if (stats) {
    stats->clamped = true;
    stats->clamp_magnitude = -min_val;
  }
  if (-min_val > 1e-8 * sym.norm()) {
    ++g_clamp_reports;
  }
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

long psd_clamp_report_count() { return g_clamp_reports.load(); }

bool is_symmetric(const Mat& M, double rel_tol) {
  if (M.rows() != M.cols()) {
    return false;
  }
  const double scale = std::max(1.0, M.norm());
  return (M - M.transpose()).norm() <= rel_tol * scale;
}

Mat psd_sqrt(const Mat& M) {
  if (!M.allFinite()) {
    throw std::runtime_error("psd_sqrt: non-finite covariance");
  }
  const Mat repaired = symmetrize_psd(M);
  Eigen::LLT<Mat> llt(repaired);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  // Semi-definite: eigen square root (B = V * sqrt(L) gives B B^T = M).
  Eigen::SelfAdjointEigenSolver<Mat> eig(repaired);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("psd_sqrt: factorization failed after PSD repair");
  }
  const Vec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

std::string to_string(AbnormalityType type) {
  switch (type) {
    case AbnormalityType::kOutlier:
      return "outlier";
    case AbnormalityType::kMissing:
      return "missing";
    case AbnormalityType::kBias:
      return "bias";
    case AbnormalityType::kDrift:
      return "drift";
  }
  return "unknown";
}

}  // namespace rbe
