#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rbe/config.hpp"
#include "rbe/corrupt.hpp"
#include "rbe/metrics.hpp"
#include "rbe/scenario.hpp"
#include "rbe/types.hpp"

namespace rbe {

// Everything an estimator sees for one replicate. All estimators in a
// replicate consume the same corrupted measurements; reference estimators may
// additionally read the ground-truth corruption log.
struct ReplicateData {
  const Scenario* scenario;
  Mat measurements;
  std::vector<CorruptionEvent> corruption_log;
  Vec x0_hat;  // filter initialization draw
  std::uint64_t seed;
};

// K x n state-estimate track for a named estimator. Throws on failure; the
// campaign isolates failures per run.
Mat run_estimator(const std::string& name, const ReplicateData& data,
                  const std::map<std::string, double>& opts);

bool estimator_known(const std::string& name);

struct CampaignOutput {
  MetricReport report;
  std::vector<std::uint64_t> measurement_hashes;  // per replicate
  std::string summary_path;  // empty when out_dir was not set
};

CampaignOutput run_campaign(const CampaignConfig& cfg);

std::uint64_t hash_matrix(const Mat& values);

}  // namespace rbe
