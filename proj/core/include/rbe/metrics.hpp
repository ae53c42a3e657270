#pragma once

#include <string>
#include <vector>

#include "rbe/types.hpp"

namespace rbe {

// Per-run scalar: sqrt of the mean squared error over steps, restricted to
// `dims` (all state dimensions when empty).
double run_rmse(const Mat& truth, const Mat& estimate, const std::vector<int>& dims = {});

// Time-averaged RMSE across runs: (1/K) sum_k sqrt((1/L) sum_l err^2).
double trmse(const std::vector<Mat>& truths, const std::vector<Mat>& estimates,
             const std::vector<int>& dims = {});

// Per-step RMSE over runs for the selected dimensions.
Vec rmse_vs_time(const std::vector<Mat>& truths, const std::vector<Mat>& estimates,
                 const std::vector<int>& dims = {});

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

struct EstimatorMetrics {
  std::string name;
  std::vector<double> run_rmse_state;
  std::vector<double> run_rmse_pos;
  double trmse_state = 0.0;
  double trmse_pos = 0.0;
  double median_rmse_state = 0.0;
  double median_rmse_pos = 0.0;
  double q25_rmse_pos = 0.0;
  double q75_rmse_pos = 0.0;
  double mean_wall_seconds = 0.0;
  int failed_runs = 0;
};

struct MetricReport {
  std::vector<EstimatorMetrics> estimators;
  std::uint64_t seed = 0;
  int runs = 0;
  std::string scenario;
  std::string corruption;

  const EstimatorMetrics& by_name(const std::string& name) const;
};

}  // namespace rbe
