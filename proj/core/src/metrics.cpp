#include "rbe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbe {

namespace {

std::vector<int> all_dims(const Mat& truth) {
  std::vector<int> dims(truth.cols());
  for (int i = 0; i < truth.cols(); ++i) {
    dims[i] = i;
  }
  return dims;
}

double step_sq_error(const Mat& truth, const Mat& est, int k, const std::vector<int>& dims) {
  double sq = 0.0;
  for (const int d : dims) {
    const double e = truth(k, d) - est(k, d);
    sq += e * e;
  }
  return sq;
}

}  // namespace

double run_rmse(const Mat& truth, const Mat& estimate, const std::vector<int>& dims) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw std::invalid_argument("run_rmse: misaligned truth/estimate shapes");
  }
  const std::vector<int> use = dims.empty() ? all_dims(truth) : dims;
  double acc = 0.0;
  for (int k = 0; k < truth.rows(); ++k) {
    acc += step_sq_error(truth, estimate, k, use);
  }
  return std::sqrt(acc / truth.rows());
}

double trmse(const std::vector<Mat>& truths, const std::vector<Mat>& estimates,
             const std::vector<int>& dims) {
  if (truths.empty() || truths.size() != estimates.size()) {
    throw std::invalid_argument("trmse: misaligned run collections");
  }
  const int K = static_cast<int>(truths.front().rows());
  const std::vector<int> use = dims.empty() ? all_dims(truths.front()) : dims;
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    double over_runs = 0.0;
    for (std::size_t l = 0; l < truths.size(); ++l) {
      over_runs += step_sq_error(truths[l], estimates[l], k, use);
    }
    acc += std::sqrt(over_runs / truths.size());
  }
  return acc / K;
}

Vec rmse_vs_time(const std::vector<Mat>& truths, const std::vector<Mat>& estimates,
                 const std::vector<int>& dims) {
  if (truths.empty() || truths.size() != estimates.size()) {
    throw std::invalid_argument("rmse_vs_time: misaligned run collections");
  }
  const int K = static_cast<int>(truths.front().rows());
  const std::vector<int> use = dims.empty() ? all_dims(truths.front()) : dims;
  Vec out(K);
  for (int k = 0; k < K; ++k) {
    double over_runs = 0.0;
    for (std::size_t l = 0; l < truths.size(); ++l) {
      over_runs += step_sq_error(truths[l], estimates[l], k, use);
    }
    out[k] = std::sqrt(over_runs / truths.size());
  }
  return out;
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("quantile: empty sample");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

const EstimatorMetrics& MetricReport::by_name(const std::string& name) const {
  for (const auto& e : estimators) {
    if (e.name == name) {
      return e;
    }
  }
  throw std::out_of_range("MetricReport: no estimator named " + name);
}

}  // namespace rbe
