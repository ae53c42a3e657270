#include "rbe/campaign.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "rbe/bdm.hpp"
#include "rbe/emorf.hpp"
#include "rbe/gaussian_filter.hpp"
#include "rbe/map_ekf.hpp"
#include "rbe/robust_pf.hpp"
#include "rbe/rng.hpp"
#include "rbe/sor.hpp"

namespace rbe {

namespace {

double opt_or(const std::map<std::string, double>& opts, const std::string& key,
              double fallback) {
  const auto it = opts.find(key);
  return it == opts.end() ? fallback : it->second;
}

Mat run_ukf(const ReplicateData& data) {
  const Scenario& sc = *data.scenario;
  const UtParams ut;
  const int K = static_cast<int>(data.measurements.rows());
  Mat estimates(K, sc.model.n);
  GaussianBelief belief{data.x0_hat, sc.P0};
  for (int k = 0; k < K; ++k) {
    belief = ggf_predict(belief, sc.model, ut, k + 1);
    belief = ggf_update(belief, data.measurements.row(k).transpose(), sc.model, ut);
    estimates.row(k) = belief.mean.transpose();
  }
  return estimates;
}

// Hypothetical rejector with oracle knowledge of the corruption instants:
// corrupted dimensions are dropped from the update entirely.
Mat run_ideal_ukf(const ReplicateData& data) {
  const Scenario& sc = *data.scenario;
  const UtParams ut;
  const int K = static_cast<int>(data.measurements.rows());
  const auto keep =
      rejection_schedule_from_log(data.corruption_log, K, sc.model.m);
  Mat estimates(K, sc.model.n);
  GaussianBelief belief{data.x0_hat, sc.P0};
  for (int k = 0; k < K; ++k) {
    belief = ggf_predict(belief, sc.model, ut, k + 1);
    std::vector<int> dims;
    for (int i = 0; i < sc.model.m; ++i) {
      if (keep[k][i]) {
        dims.push_back(i);
      }
    }
    if (!dims.empty()) {
      const ObservationMoments full = observation_moments(belief, sc.model, ut);
      const int kept = static_cast<int>(dims.size());
      ObservationMoments obs;
      obs.mean.resize(kept);
      obs.spread.resize(kept, kept);
      obs.crosscov.resize(sc.model.n, kept);
      Mat r_sub(kept, kept);
      Vec y_sub(kept);
      for (int a = 0; a < kept; ++a) {
        obs.mean[a] = full.mean[dims[a]];
        y_sub[a] = data.measurements(k, dims[a]);
        obs.crosscov.col(a) = full.crosscov.col(dims[a]);
        for (int b = 0; b < kept; ++b) {
          obs.spread(a, b) = full.spread(dims[a], dims[b]);
          r_sub(a, b) = sc.model.R(dims[a], dims[b]);
        }
      }
      belief = gaussian_update(belief, obs, y_sub, r_sub, Vec::Zero(kept));
    }
    estimates.row(k) = belief.mean.transpose();
  }
  return estimates;
}

Mat run_sor(const ReplicateData& data, const std::map<std::string, double>& opts) {
  const Scenario& sc = *data.scenario;
  const UtParams ut;
  SorConfig cfg;
  cfg.epsilon = opt_or(opts, "epsilon", cfg.epsilon);
  cfg.conv_tol = opt_or(opts, "conv_tol", cfg.conv_tol);
  cfg.max_iters = static_cast<int>(opt_or(opts, "max_iters", cfg.max_iters));
  cfg.theta = Vec::Constant(sc.model.m, opt_or(opts, "theta", 0.5));
  const int K = static_cast<int>(data.measurements.rows());
  Mat estimates(K, sc.model.n);
  GaussianBelief belief{data.x0_hat, sc.P0};
  for (int k = 0; k < K; ++k) {
    belief = ggf_predict(belief, sc.model, ut, k + 1);
    belief = sor_step(belief, data.measurements.row(k).transpose(), sc.model, cfg, ut).first;
    estimates.row(k) = belief.mean.transpose();
  }
  return estimates;
}

Mat run_emorf(const ReplicateData& data, const std::map<std::string, double>& opts) {
  const Scenario& sc = *data.scenario;
  const UtParams ut;
  EmorfConfig cfg;
  cfg.epsilon = opt_or(opts, "epsilon", cfg.epsilon);
  cfg.conv_tol = opt_or(opts, "conv_tol", cfg.conv_tol);
  cfg.max_iters = static_cast<int>(opt_or(opts, "max_iters", cfg.max_iters));
  cfg.theta = Vec::Constant(sc.model.m, opt_or(opts, "theta", 0.5));
  const int K = static_cast<int>(data.measurements.rows());
  Mat estimates(K, sc.model.n);
  GaussianBelief belief{data.x0_hat, sc.P0};
  for (int k = 0; k < K; ++k) {
    belief = ggf_predict(belief, sc.model, ut, k + 1);
    belief = emorf_step(belief, data.measurements.row(k).transpose(), sc.model, cfg, ut).belief;
    estimates.row(k) = belief.mean.transpose();
  }
  return estimates;
}

Mat run_emors(const ReplicateData& data, const std::map<std::string, double>& opts) {
  const Scenario& sc = *data.scenario;
  const UtParams ut;
  EmorfConfig cfg;
  cfg.epsilon = opt_or(opts, "epsilon", cfg.epsilon);
  cfg.conv_tol = opt_or(opts, "conv_tol", cfg.conv_tol);
  cfg.max_iters = static_cast<int>(opt_or(opts, "max_iters", 25));
  cfg.theta = Vec::Constant(sc.model.m, opt_or(opts, "theta", 0.5));
  const GaussianBelief prior{data.x0_hat, sc.P0};
  const EmorsResult result = emors_run(sc.model, data.measurements, prior, cfg, ut);
  Mat estimates(data.measurements.rows(), sc.model.n);
  for (std::size_t k = 0; k < result.smoothed.size(); ++k) {
    estimates.row(static_cast<int>(k)) = result.smoothed[k].mean.transpose();
  }
  return estimates;
}

Mat run_bdm(const ReplicateData& data, const std::map<std::string, double>& opts) {
  const Scenario& sc = *data.scenario;
  const UtParams ut;
  BdmConfig cfg = BdmConfig::defaults_for(sc.model.R);
  cfg.sigma_tilde = opt_or(opts, "sigma_tilde_scale", 1000.0) * sc.model.R;
  cfg.sigma_breve = opt_or(opts, "sigma_breve_scale", 0.1) * sc.model.R;
  cfg.conv_tol = opt_or(opts, "conv_tol", cfg.conv_tol);
  cfg.max_iters = static_cast<int>(opt_or(opts, "max_iters", cfg.max_iters));
  cfg.theta_prior = Vec::Constant(sc.model.m, opt_or(opts, "theta", 0.5));
  BiasBelief bias0;
  bias0.theta_hat = Vec::Zero(sc.model.m);
  bias0.sigma = opt_or(opts, "sigma0", 0.001) * Mat::Identity(sc.model.m, sc.model.m);
  const GaussianBelief prior{data.x0_hat, sc.P0};
  const BdmRunResult run = bdm_run(sc.model, data.measurements, prior, bias0, cfg, ut);
  Mat estimates(data.measurements.rows(), sc.model.n);
  for (std::size_t k = 0; k < run.states.size(); ++k) {
    estimates.row(static_cast<int>(k)) = run.states[k].mean.transpose();
  }
  return estimates;
}

Mat run_map_ekf(const ReplicateData& data, const std::map<std::string, double>& opts) {
  const Scenario& sc = *data.scenario;
  const int m = sc.model.m;
  OutlierHypothesisPrior prior;
  const double pi0 = opt_or(opts, "pi0", 0.6);
  prior.pi.resize(m + 1);
  prior.pi[0] = pi0;
  prior.pi.tail(m).setConstant((1.0 - pi0) / m);
  prior.outlier_var = opt_or(opts, "outlier_var_scale", 1e8) * sc.meas_var;

  const int K = static_cast<int>(data.measurements.rows());
  Mat estimates(K, sc.model.n);
  GaussianBelief belief{data.x0_hat, sc.P0};
  for (int k = 0; k < K; ++k) {
    belief = ekf_predict(belief, sc.model, k + 1);
    belief =
        map_ekf_step(belief, data.measurements.row(k).transpose(), sc.model, prior).belief;
    estimates.row(k) = belief.mean.transpose();
  }
  return estimates;
}

Mat run_pf(const ReplicateData& data, const std::map<std::string, double>& opts,
           PfMode mode) {
  const Scenario& sc = *data.scenario;
  const int N = static_cast<int>(opt_or(opts, "particles", 2000));
  const int m = sc.model.m;

  AbnormalityConfig ab = sc.pf_abnormality;
  if (opts.count("outlier_var")) {
    ab.outlier_var = Vec::Constant(m, opts.at("outlier_var"));
  }
  if (opts.count("force_clean_regime") && opts.at("force_clean_regime") > 0.0) {
    ab.transition.setZero();
    ab.transition.col(0).setOnes();
    ab.outlier_var.setZero();
    ab.bias_jitter_var.setZero();
  }

  PfPriors priors;
  priors.sample_x0 = sc.sample_x0_prior;
  priors.sample_theta0 = [m](Rng& rng) {
    Vec theta(m);
    for (int i = 0; i < m; ++i) {
      theta[i] = rng.normal(0.0, std::sqrt(0.001));
    }
    return theta;
  };
  priors.sample_regimes0 = [m](Rng& rng) {
    Eigen::VectorXi regimes(m);
    for (int i = 0; i < m; ++i) {
      regimes[i] = rng.uniform_int(3);
    }
    return regimes;
  };

  IdealSchedule schedule;
  const IdealSchedule* schedule_ptr = nullptr;
  if (mode == PfMode::kIdeal) {
    const int K = static_cast<int>(data.measurements.rows());
    const TruthSchedules truth = truth_schedules_from_log(data.corruption_log, K, m);
    schedule.bias_shift = truth.bias_shift;
    schedule.extra_noise_var = truth.extra_noise_var;
    schedule_ptr = &schedule;
  }

  const PfResult result = robust_pf_run(sc.model, data.measurements, priors, ab, N,
                                        mix_seed(data.seed, 0x9f), mode, schedule_ptr);
  return result.estimates;
}

}  // namespace

bool estimator_known(const std::string& name) {
  static const char* names[] = {"ukf",  "ideal-ukf", "sor",         "emorf",
                                "emors", "bdm",       "map-ekf",     "pf-robust",
                                "pf-bootstrap", "pf-ideal"};
  for (const char* candidate : names) {
    if (name == candidate) {
      return true;
    }
  }
  return false;
}

Mat run_estimator(const std::string& name, const ReplicateData& data,
                  const std::map<std::string, double>& opts) {
  if (name == "ukf") return run_ukf(data);
  if (name == "ideal-ukf") return run_ideal_ukf(data);
  if (name == "sor") return run_sor(data, opts);
  if (name == "emorf") return run_emorf(data, opts);
  if (name == "emors") return run_emors(data, opts);
  if (name == "bdm") return run_bdm(data, opts);
  if (name == "map-ekf") return run_map_ekf(data, opts);
  if (name == "pf-robust") return run_pf(data, opts, PfMode::kRobust);
  if (name == "pf-bootstrap") return run_pf(data, opts, PfMode::kBootstrap);
  if (name == "pf-ideal") return run_pf(data, opts, PfMode::kIdeal);
  throw std::invalid_argument("unknown estimator: " + name);
}

std::uint64_t hash_matrix(const Mat& values) {
  // FNV-1a over the raw bytes; used to assert the paired design.
  std::uint64_t h = 1469598103934665603ull;
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  const std::size_t count = sizeof(double) * values.size();
  for (std::size_t i = 0; i < count; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

CampaignOutput run_campaign(const CampaignConfig& cfg) {
  const Scenario scenario = build_scenario(cfg.scenario);
  const int K = cfg.scenario.K;
  const int runs = cfg.runs;
  const int n_est = static_cast<int>(cfg.estimators.size());
  if (n_est == 0) {
    throw std::invalid_argument("run_campaign: no estimators configured");
  }

  struct RunSlot {
    Mat truth;
    std::vector<Mat> estimates;       // per estimator
    std::vector<double> wall_seconds; // per estimator
    std::vector<char> failed;
    std::uint64_t meas_hash = 0;
  };
  std::vector<RunSlot> slots(runs);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= runs) {
        return;
      }
      RunSlot& slot = slots[rep];
      slot.estimates.resize(n_est);
      slot.wall_seconds.assign(n_est, 0.0);
      slot.failed.assign(n_est, 0);

      const std::uint64_t rep_seed = mix_seed(cfg.seed, rep);
      const Trajectory clean = simulate(scenario.model, scenario.x0, K, rep_seed);
      slot.truth = clean.states;

      CorruptionSpec cspec = cfg.corruption;
      if (scenario.tdoa_sensor_count > 0 && cspec.mode == "tdoa-outlier") {
        cspec.tdoa_sensors = scenario.tdoa_sensor_count;
      }
      const CorruptionResult corrupted =
          corrupt(clean.measurements, cspec, scenario.meas_var, mix_seed(rep_seed, 0xabba));
      slot.meas_hash = hash_matrix(corrupted.measurements);

      ReplicateData data;
      data.scenario = &scenario;
      data.measurements = corrupted.measurements;
      data.corruption_log = corrupted.log;
      data.seed = rep_seed;
      if (scenario.init_at_truth) {
        data.x0_hat = scenario.x0;
      } else {
        Rng init_rng(mix_seed(rep_seed, 0x1717));
        const Mat root = Mat(scenario.P0.llt().matrixL());
        Vec z(scenario.model.n);
        for (int i = 0; i < z.size(); ++i) {
          z[i] = init_rng.normal();
        }
        data.x0_hat = scenario.x0 + root * z;
      }

      for (int e = 0; e < n_est; ++e) {
        const auto start = std::chrono::steady_clock::now();
        try {
          slot.estimates[e] = run_estimator(cfg.estimators[e].name, data,
                                            cfg.estimators[e].opts);
        } catch (const std::exception& err) {
          slot.failed[e] = 1;
          if (!cfg.quiet) {
            static std::mutex log_mutex;
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << "replicate " << rep << ": " << cfg.estimators[e].name
                      << " failed: " << err.what() << "\n";
          }
        }
        slot.wall_seconds[e] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    }
  };

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, runs));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) {
    t.join();
  }

  CampaignOutput out;
  out.report.seed = cfg.seed;
  out.report.runs = runs;
  out.report.scenario = cfg.scenario.name;
  out.report.corruption = cfg.corruption.mode;
  for (const auto& slot : slots) {
    out.measurement_hashes.push_back(slot.meas_hash);
  }

  for (int e = 0; e < n_est; ++e) {
    EstimatorMetrics metrics;
    metrics.name = cfg.estimators[e].name;
    std::vector<Mat> truths;
    std::vector<Mat> ests;
    double wall = 0.0;
    for (const auto& slot : slots) {
      wall += slot.wall_seconds[e];
      if (slot.failed[e]) {
        ++metrics.failed_runs;
        continue;
      }
      truths.push_back(slot.truth);
      ests.push_back(slot.estimates[e]);
      metrics.run_rmse_state.push_back(run_rmse(slot.truth, slot.estimates[e]));
      metrics.run_rmse_pos.push_back(
          run_rmse(slot.truth, slot.estimates[e], scenario.position_dims));
    }
    if (!truths.empty()) {
      metrics.trmse_state = trmse(truths, ests);
      metrics.trmse_pos = trmse(truths, ests, scenario.position_dims);
      metrics.median_rmse_state = median(metrics.run_rmse_state);
      metrics.median_rmse_pos = median(metrics.run_rmse_pos);
      metrics.q25_rmse_pos = quantile(metrics.run_rmse_pos, 0.25);
      metrics.q75_rmse_pos = quantile(metrics.run_rmse_pos, 0.75);
    }
    metrics.mean_wall_seconds = wall / runs;
    out.report.estimators.push_back(std::move(metrics));
  }

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    // Per-step CSV for the first replicate: plot-ready tracks plus flags.
    {
      std::ofstream csv(fs::path(cfg.out_dir) / "tracks.csv");
      csv << "k";
      for (int i = 0; i < scenario.model.n; ++i) {
        csv << ",truth_" << i + 1;
      }
      for (int e = 0; e < n_est; ++e) {
        for (int i = 0; i < scenario.model.n; ++i) {
          csv << ",est_" << cfg.estimators[e].name << "_" << i + 1;
        }
      }
      for (int i = 0; i < scenario.model.m; ++i) {
        csv << ",flag_" << i + 1;
      }
      csv << "\n";

      const std::uint64_t rep_seed = mix_seed(cfg.seed, 0);
      const Trajectory clean = simulate(scenario.model, scenario.x0, K, rep_seed);
      CorruptionSpec cspec = cfg.corruption;
      if (scenario.tdoa_sensor_count > 0 && cspec.mode == "tdoa-outlier") {
        cspec.tdoa_sensors = scenario.tdoa_sensor_count;
      }
      const CorruptionResult corrupted =
          corrupt(clean.measurements, cspec, scenario.meas_var, mix_seed(rep_seed, 0xabba));
      Mat flags = Mat::Zero(K, scenario.model.m);
      for (const auto& event : corrupted.log) {
        flags(event.step - 1, event.dim) =
            event.type == AbnormalityType::kOutlier   ? 1
            : event.type == AbnormalityType::kMissing ? 2
                                                      : 3;
      }
      for (int k = 0; k < K; ++k) {
        csv << k + 1;
        for (int i = 0; i < scenario.model.n; ++i) {
          csv << ',' << slots[0].truth(k, i);
        }
        for (int e = 0; e < n_est; ++e) {
          for (int i = 0; i < scenario.model.n; ++i) {
            csv << ',' << (slots[0].failed[e] ? 0.0 : slots[0].estimates[e](k, i));
          }
        }
        for (int i = 0; i < scenario.model.m; ++i) {
          csv << ',' << flags(k, i);
        }
        csv << "\n";
      }
    }

    if (cfg.write_long_csv) {
      std::ofstream csv(fs::path(cfg.out_dir) / "rmse_long.csv");
      csv << "method,replicate,k,rmse\n";
      for (int e = 0; e < n_est; ++e) {
        for (int rep = 0; rep < runs; ++rep) {
          if (slots[rep].failed[e]) {
            continue;
          }
          for (int k = 0; k < K; ++k) {
            double sq = 0.0;
            for (int i = 0; i < scenario.model.n; ++i) {
              const double d = slots[rep].truth(k, i) - slots[rep].estimates[e](k, i);
              sq += d * d;
            }
            csv << cfg.estimators[e].name << ',' << rep << ',' << k + 1 << ','
                << std::sqrt(sq) << "\n";
          }
        }
      }
    }

    nlohmann::json summary;
    summary["scenario"] = cfg.scenario.name;
    summary["corruption"] = cfg.corruption.mode;
    summary["runs"] = runs;
    summary["seed"] = cfg.seed;
    summary["K"] = K;
    summary["version"] = "0.1.0";
    summary["measurement_hashes"] = out.measurement_hashes;
    for (const auto& est : out.report.estimators) {
      nlohmann::json j;
      j["trmse_state"] = est.trmse_state;
      j["trmse_pos"] = est.trmse_pos;
      j["median_rmse_state"] = est.median_rmse_state;
      j["median_rmse_pos"] = est.median_rmse_pos;
      j["q25_rmse_pos"] = est.q25_rmse_pos;
      j["q75_rmse_pos"] = est.q75_rmse_pos;
      j["run_rmse_state"] = est.run_rmse_state;
      j["run_rmse_pos"] = est.run_rmse_pos;
      j["mean_wall_seconds"] = est.mean_wall_seconds;
      j["failed_runs"] = est.failed_runs;
      summary["estimators"][est.name] = std::move(j);
    }
    const auto path = fs::path(cfg.out_dir) / "summary.json";
    std::ofstream json_out(path);
    json_out << summary.dump(2) << "\n";
    out.summary_path = path.string();
  }
  return out;
}

}  // namespace rbe
