#include "rbe/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rbe {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

IniConfig IniConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

IniConfig IniConfig::from_string(const std::string& text) {
  IniConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) {
      line = line.substr(0, comment);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

bool IniConfig::has(const std::string& section, const std::string& key) const {
  const auto sec = sections_.find(section);
  return sec != sections_.end() && sec->second.count(key) > 0;
}

std::string IniConfig::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  const auto sec = sections_.find(section);
  if (sec == sections_.end()) {
    return fallback;
  }
  const auto it = sec->second.find(key);
  return it == sec->second.end() ? fallback : it->second;
}

double IniConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  const std::string raw = get(section, key);
  return raw.empty() ? fallback : std::stod(raw);
}

int IniConfig::get_int(const std::string& section, const std::string& key,
                       int fallback) const {
  const std::string raw = get(section, key);
  return raw.empty() ? fallback : std::stoi(raw);
}

std::vector<std::string> IniConfig::get_list(const std::string& section,
                                             const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream ss(get(section, key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

CampaignConfig campaign_from_ini(const IniConfig& ini) {
  CampaignConfig cfg;

  cfg.scenario.name = ini.get("scenario", "name", cfg.scenario.name);
  cfg.scenario.K = ini.get_int("scenario", "K", cfg.scenario.K);
  cfg.scenario.m = ini.get_int("scenario", "m", cfg.scenario.m);
  cfg.scenario.zeta = ini.get_double("scenario", "zeta", cfg.scenario.zeta);
  cfg.scenario.eta1 = ini.get_double("scenario", "eta1", cfg.scenario.eta1);
  cfg.scenario.eta2 = ini.get_double("scenario", "eta2", cfg.scenario.eta2);
  cfg.scenario.sigma_theta =
      ini.get_double("scenario", "sigma_theta", cfg.scenario.sigma_theta);
  cfg.scenario.sigma_rho = ini.get_double("scenario", "sigma_rho", cfg.scenario.sigma_rho);
  cfg.scenario.sigma2_tdoa =
      ini.get_double("scenario", "sigma2_tdoa", cfg.scenario.sigma2_tdoa);
  cfg.scenario.r_range = ini.get_double("scenario", "r_range", cfg.scenario.r_range);

  cfg.corruption.mode = ini.get("corruption", "mode", cfg.corruption.mode);
  cfg.corruption.lambda = ini.get_double("corruption", "lambda", cfg.corruption.lambda);
  cfg.corruption.gamma = ini.get_double("corruption", "gamma", cfg.corruption.gamma);
  cfg.corruption.gamma_lo = ini.get_double("corruption", "gamma_lo", cfg.corruption.gamma_lo);
  cfg.corruption.gamma_hi = ini.get_double("corruption", "gamma_hi", cfg.corruption.gamma_hi);
  cfg.corruption.xi = ini.get_double("corruption", "xi", cfg.corruption.xi);
  cfg.corruption.sigma_o = ini.get_double("corruption", "sigma_o", cfg.corruption.sigma_o);
  cfg.corruption.window_start =
      ini.get_int("corruption", "window_start", cfg.corruption.window_start);
  cfg.corruption.window_end =
      ini.get_int("corruption", "window_end", cfg.corruption.window_end);
  cfg.corruption.burst_prob = ini.get_double("corruption", "burst_prob", cfg.corruption.burst_prob);
  cfg.corruption.burst_var = ini.get_double("corruption", "burst_var", cfg.corruption.burst_var);

  for (const std::string& name : ini.get_list("estimators", "list")) {
    EstimatorSpec est;
    est.name = name;
    const auto sec = ini.sections().find("estimators");
    if (sec != ini.sections().end()) {
      const std::string prefix = name + ".";
      for (const auto& [key, value] : sec->second) {
        if (key.rfind(prefix, 0) == 0) {
          est.opts[key.substr(prefix.size())] = std::stod(value);
        }
      }
    }
    cfg.estimators.push_back(std::move(est));
  }

  cfg.runs = ini.get_int("campaign", "runs", cfg.runs);
  cfg.seed = static_cast<std::uint64_t>(
      std::stoull(ini.get("campaign", "seed", std::to_string(cfg.seed))));
  cfg.out_dir = ini.get("campaign", "out", cfg.out_dir);
  cfg.quiet = ini.get_int("campaign", "quiet", cfg.quiet ? 1 : 0) != 0;
  cfg.write_long_csv = ini.get_int("campaign", "long_csv", cfg.write_long_csv ? 1 : 0) != 0;
  cfg.threads = ini.get_int("campaign", "threads", cfg.threads);
  return cfg;
}

}  // namespace rbe
