#pragma once

#include <map>
#include <string>
#include <vector>

#include "rbe/corrupt.hpp"
#include "rbe/scenario.hpp"

namespace rbe {

// Flat INI-style config: [section] headers, key = value lines, '#' or ';'
// comments. Keys are unique within a section.
class IniConfig {
 public:
  static IniConfig from_file(const std::string& path);
  static IniConfig from_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback = "") const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct EstimatorSpec {
  std::string name;
  std::map<std::string, double> opts;
};

struct CampaignConfig {
  ScenarioSpec scenario;
  CorruptionSpec corruption;
  std::vector<EstimatorSpec> estimators;
  int runs = 25;
  std::uint64_t seed = 1;
  std::string out_dir;
  bool quiet = false;
  bool write_long_csv = false;
  int threads = 0;  // 0 -> hardware concurrency
};

// Assemble a campaign from the [scenario] / [corruption] / [estimators] /
// [campaign] sections.
CampaignConfig campaign_from_ini(const IniConfig& ini);

}  // namespace rbe
