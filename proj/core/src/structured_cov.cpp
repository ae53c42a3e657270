#include "rbe/structured_cov.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rbe {

namespace {

std::vector<int> inlier_indices(const IndicatorVector& indicator, int skip = -1) {
  std::vector<int> idx;
  idx.reserve(indicator.size());
  for (int j = 0; j < indicator.size(); ++j) {
    if (j != skip && indicator.inlier(j)) {
      idx.push_back(j);
    }
  }
  return idx;
}

Mat submatrix(const Mat& M, const std::vector<int>& rows, const std::vector<int>& cols) {
  Mat out(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      out(a, b) = M(rows[a], cols[b]);
    }
  }
  return out;
}

}  // namespace

IndicatorVector IndicatorVector::all_inliers(int m, double epsilon) {
  IndicatorVector out;
  out.values = Vec::Ones(m);
  out.epsilon = epsilon;
  return out;
}

void IndicatorVector::validate() const {
  for (int i = 0; i < size(); ++i) {
    if (values[i] != 1.0 && values[i] != epsilon) {
      throw std::invalid_argument("IndicatorVector: entries must equal epsilon or 1");
    }
  }
}

Mat r_structured(const Mat& R, const IndicatorVector& indicator) {
  const int m = static_cast<int>(R.rows());
  Mat out = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    out(i, i) = R(i, i) / indicator.values[i];
    for (int j = 0; j < m; ++j) {
      if (i != j && indicator.inlier(i) && indicator.inlier(j)) {
        out(i, j) = R(i, j);
      }
    }
  }
  return out;
}

Mat r_inv_structured(const Mat& R, const IndicatorVector& indicator) {
  const int m = static_cast<int>(R.rows());
  if (indicator.size() != m) {
    throw std::invalid_argument("r_inv_structured: indicator length mismatch");
  }
  Mat out = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    if (!indicator.inlier(i)) {
      out(i, i) = indicator.epsilon / R(i, i);
    }
  }
  const std::vector<int> inl = inlier_indices(indicator);
  if (!inl.empty()) {
    const Mat block = submatrix(R, inl, inl);
    Eigen::PartialPivLU<Mat> lu(block);
    const Mat inv = lu.solve(Mat::Identity(block.rows(), block.cols()));
    if (!inv.allFinite()) {
      throw std::runtime_error("r_inv_structured: singular inlier block");
    }
    for (std::size_t a = 0; a < inl.size(); ++a) {
      for (std::size_t b = 0; b < inl.size(); ++b) {
        out(inl[a], inl[b]) = inv(a, b);
      }
    }
  }
  return out;
}

Mat delta_r_inv(const Mat& R, const IndicatorVector& indicator, int i) {
  const int m = static_cast<int>(R.rows());
  if (i < 0 || i >= m) {
    throw std::invalid_argument("delta_r_inv: index out of range");
  }
  const std::vector<int> inl = inlier_indices(indicator, i);
  Mat out = Mat::Zero(m, m);

  if (inl.empty()) {
    out(i, i) = (1.0 - indicator.epsilon) / R(i, i);
    return out;
  }

  const Mat D = submatrix(R, inl, inl);
  Eigen::PartialPivLU<Mat> lu(D);
  const Mat b_col = submatrix(R, inl, {i});    // R(-i, i), inlier rows only
  const Mat d_inv_b = lu.solve(b_col);
  if (!d_inv_b.allFinite()) {
    throw std::runtime_error("delta_r_inv: singular inlier block");
  }
  const double schur = R(i, i) - (b_col.transpose() * d_inv_b)(0, 0);
  if (schur <= 0.0) {
    throw std::runtime_error("delta_r_inv: non-positive Schur complement");
  }

  out(i, i) = 1.0 / schur - indicator.epsilon / R(i, i);
  for (std::size_t a = 0; a < inl.size(); ++a) {
    out(i, inl[a]) = -d_inv_b(a, 0) / schur;
    out(inl[a], i) = out(i, inl[a]);
    for (std::size_t b = 0; b < inl.size(); ++b) {
      out(inl[a], inl[b]) = d_inv_b(a, 0) * d_inv_b(b, 0) / schur;
    }
  }
  return out;
}

TauResult tau_indicator(const Mat& W, const Mat& R, const IndicatorVector& indicator, int i,
                        double theta, double epsilon) {
  if (theta <= 0.0 || theta >= 1.0) {
    throw std::invalid_argument("tau_indicator: theta must lie strictly in (0, 1)");
  }
  const std::vector<int> inl = inlier_indices(indicator, i);

  const Mat delta = delta_r_inv(R, indicator, i);
  double tau = (W.cwiseProduct(delta)).sum();  // tr(W * delta), both symmetric

  // log |I - R(-i,i) R(i,-i) Rhat(-i,-i)^-1 / R(i,i)| reduces to
  // log(schur / R(i,i)) because the perturbation is rank one.
  if (!inl.empty()) {
    const Mat D = submatrix(R, inl, inl);
    const Mat b_col = submatrix(R, inl, {i});
    Eigen::PartialPivLU<Mat> lu(D);
    const double schur = R(i, i) - (b_col.transpose() * lu.solve(b_col))(0, 0);
    if (schur <= 0.0) {
      throw std::runtime_error("tau_indicator: non-positive Schur complement");
    }
    tau += std::log(schur / R(i, i));
  }

  tau += std::log(epsilon) + 2.0 * std::log(1.0 / theta - 1.0);
  return TauResult{tau, tau <= 0.0 ? 1.0 : epsilon};
}

}  // namespace rbe
