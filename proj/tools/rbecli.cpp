// Command-line front end: scenario simulation, single-estimator runs,
// Monte-Carlo benchmarks, estimation bounds, and point-cloud registration.
#include <CLI11.hpp>

#include <Eigen/Geometry>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <nlohmann/json.hpp>

#include "rbe/bcrb.hpp"
#include "rbe/campaign.hpp"
#include "rbe/config.hpp"
#include "rbe/metrics.hpp"
#include "rbe/perception.hpp"
#include "rbe/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
  std::string config;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out;
  int runs = 0;
  bool quiet = false;
};

rbe::CampaignConfig load_campaign(const GlobalOpts& opts) {
  rbe::CampaignConfig cfg;
  if (!opts.config.empty()) {
    cfg = rbe::campaign_from_ini(rbe::IniConfig::from_file(opts.config));
  }
  if (opts.seed_set) {
    cfg.seed = opts.seed;
  }
  if (!opts.out.empty()) {
    cfg.out_dir = opts.out;
  }
  if (opts.runs > 0) {
    cfg.runs = opts.runs;
  }
  cfg.quiet = cfg.quiet || opts.quiet;
  return cfg;
}

void write_simulation(const rbe::CampaignConfig& cfg) {
  const rbe::Scenario sc = rbe::build_scenario(cfg.scenario);
  const rbe::Trajectory traj =
      rbe::simulate(sc.model, sc.x0, cfg.scenario.K, cfg.seed);
  rbe::CorruptionSpec cspec = cfg.corruption;
  if (sc.tdoa_sensor_count > 0 && cspec.mode == "tdoa-outlier") {
    cspec.tdoa_sensors = sc.tdoa_sensor_count;
  }
  const rbe::CorruptionResult corrupted =
      rbe::corrupt(traj.measurements, cspec, sc.meas_var, rbe::mix_seed(cfg.seed, 0xabba));

  const fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  fs::create_directories(dir);

  std::ofstream csv(dir / "simulation.csv");
  csv << "k";
  for (int i = 0; i < sc.model.n; ++i) {
    csv << ",truth_" << i + 1;
  }
  for (int i = 0; i < sc.model.m; ++i) {
    csv << ",y_" << i + 1;
  }
  for (int i = 0; i < sc.model.m; ++i) {
    csv << ",flag_" << i + 1;
  }
  csv << "\n";
  Eigen::MatrixXd flags = Eigen::MatrixXd::Zero(cfg.scenario.K, sc.model.m);
  for (const auto& event : corrupted.log) {
    flags(event.step - 1, event.dim) =
        event.type == rbe::AbnormalityType::kOutlier   ? 1
        : event.type == rbe::AbnormalityType::kMissing ? 2
                                                       : 3;
  }
  for (int k = 0; k < cfg.scenario.K; ++k) {
    csv << k + 1;
    for (int i = 0; i < sc.model.n; ++i) {
      csv << ',' << traj.states(k, i);
    }
    for (int i = 0; i < sc.model.m; ++i) {
      csv << ',' << corrupted.measurements(k, i);
    }
    for (int i = 0; i < sc.model.m; ++i) {
      csv << ',' << flags(k, i);
    }
    csv << "\n";
  }

  std::ofstream log(dir / "corruption_log.csv");
  log << "step,dim,type,value,param\n";
  for (const auto& event : corrupted.log) {
    log << event.step << ',' << event.dim + 1 << ',' << rbe::to_string(event.type) << ','
        << event.value << ',' << event.param << "\n";
  }
  if (!cfg.quiet) {
    std::cout << "wrote " << (dir / "simulation.csv").string() << " ("
              << corrupted.log.size() << " injected events, seed " << cfg.seed << ")\n";
  }
}

int run_single(const rbe::CampaignConfig& base, bool smoother) {
  rbe::CampaignConfig cfg = base;
  if (cfg.estimators.empty()) {
    cfg.estimators.push_back({smoother ? "emors" : "ukf", {}});
  }
  if (smoother) {
    bool has_smoother = false;
    for (const auto& est : cfg.estimators) {
      has_smoother |= est.name == "emors";
    }
    if (!has_smoother) {
      cfg.estimators.insert(cfg.estimators.begin(), {"emors", {}});
    }
  }
  cfg.runs = std::max(1, cfg.runs == 25 ? 1 : cfg.runs);
  const auto out = rbe::run_campaign(cfg);
  for (const auto& est : out.report.estimators) {
    std::cout << est.name << ": median RMSE " << est.median_rmse_state << " (pos "
              << est.median_rmse_pos << "), mean wall " << est.mean_wall_seconds << " s\n";
  }
  if (!out.summary_path.empty() && !cfg.quiet) {
    std::cout << "summary: " << out.summary_path << "\n";
  }
  return 0;
}

int run_bounds(const rbe::CampaignConfig& cfg) {
  const rbe::Scenario sc = rbe::build_scenario(cfg.scenario);
  if (!sc.model.transition_jacobian || !sc.model.observation_jacobian) {
    std::cerr << "scenario has no Jacobians; bounds unavailable\n";
    return 1;
  }
  const int K = cfg.scenario.K;
  const int samples = 100;

  // State samples from the clean model.
  rbe::Rng rng(rbe::mix_seed(cfg.seed, 0xb0));
  std::vector<Eigen::MatrixXd> states(K + 1, Eigen::MatrixXd(sc.model.n, samples));
  const Eigen::MatrixXd sqrt_q = Eigen::MatrixXd(sc.model.Q.llt().matrixL());
  for (int s = 0; s < samples; ++s) {
    states[0].col(s) = sc.x0;
  }
  for (int k = 1; k <= K; ++k) {
    for (int s = 0; s < samples; ++s) {
      Eigen::VectorXd z(sc.model.n);
      for (int i = 0; i < z.size(); ++i) {
        z[i] = rng.normal();
      }
      states[k].col(s) = sc.model.transition(states[k - 1].col(s), k) + sqrt_q * z;
    }
  }

  // Rejection schedule from a representative corruption draw.
  std::vector<Eigen::VectorXi> keep(K, Eigen::VectorXi::Ones(sc.model.m));
  std::vector<Eigen::MatrixXd> d22_override;
  const std::vector<Eigen::MatrixXd>* override_ptr = nullptr;
  if (cfg.corruption.mode == "bias-random") {
    rbe::BiasMcConfig bias_cfg;
    bias_cfg.lambda = cfg.corruption.lambda;
    bias_cfg.xi = cfg.corruption.xi;
    bias_cfg.sigma_o = cfg.corruption.sigma_o;
    bias_cfg.onset_step = std::max(1, cfg.corruption.window_start);
    bias_cfg.end_step =
        cfg.corruption.window_end > 0 ? cfg.corruption.window_end : K;
    bias_cfg.n_mc = samples;
    const auto mc = rbe::mc_fisher_bias_terms(sc.model, bias_cfg, K, sc.x0,
                                              rbe::mix_seed(cfg.seed, 0xb1));
    d22_override = mc.d22_2;
    override_ptr = &d22_override;
  } else if (cfg.corruption.mode != "none") {
    const rbe::Trajectory traj = rbe::simulate(sc.model, sc.x0, K, cfg.seed);
    rbe::CorruptionSpec cspec = cfg.corruption;
    if (sc.tdoa_sensor_count > 0 && cspec.mode == "tdoa-outlier") {
      cspec.tdoa_sensors = sc.tdoa_sensor_count;
    }
    const auto corrupted =
        rbe::corrupt(traj.measurements, cspec, sc.meas_var, rbe::mix_seed(cfg.seed, 0xabba));
    keep = rbe::rejection_schedule_from_log(corrupted.log, K, sc.model.m);
  }

  const auto filt = rbe::bcrb_filter(sc.model, keep, states,
                                     Eigen::MatrixXd(sc.P0.inverse()), override_ptr);
  const auto smooth = rbe::bcrb_smoother(filt);

  const fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  fs::create_directories(dir);
  std::ofstream csv(dir / "bounds.csv");
  csv << "k,trace_filter_bound,trace_smoother_bound\n";
  for (int k = 0; k < K; ++k) {
    csv << k + 1 << ',' << filt.bound[k].trace() << ',' << smooth.bound[k].trace() << "\n";
  }
  if (!cfg.quiet) {
    std::cout << "wrote " << (dir / "bounds.csv").string() << "\n";
  }
  return 0;
}

int run_register(const std::string& input, const std::string& heuristic, double sigma,
                 const GlobalOpts& opts) {
  rbe::Correspondences pairs;
  rbe::RigidTransform truth;
  bool has_truth = false;

  if (!input.empty()) {
    pairs = rbe::load_correspondences(input);
  } else {
    // Synthetic benchmark cloud mirroring the registration experiments.
    std::mt19937 gen(static_cast<unsigned>(opts.seed_set ? opts.seed : 1));
    std::uniform_real_distribution<double> box(-0.5, 0.5);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, sigma);
    Eigen::Vector4d q(normal(gen), normal(gen), normal(gen), normal(gen));
    q.normalize();
    truth.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).toRotationMatrix();
    truth.translation = Eigen::Vector3d(normal(gen), normal(gen), normal(gen));
    has_truth = true;

    const int m = 100;
    pairs.P.resize(3, m);
    pairs.Q.resize(3, m);
    for (int i = 0; i < m; ++i) {
      pairs.P.col(i) << box(gen), box(gen), box(gen);
      pairs.Q.col(i) = truth.rotation * pairs.P.col(i) + truth.translation +
                       Eigen::Vector3d(noise(gen), noise(gen), noise(gen));
    }
  }

  rbe::HeuristicParams params;
  params.kind = rbe::heuristic_from_name(heuristic);
  params.chi = params.gamma = 11.34;
  const auto report = rbe::register_point_clouds(pairs.P, pairs.Q, params, sigma,
                                                 has_truth ? &truth : nullptr);

  nlohmann::json out;
  out["heuristic"] = heuristic;
  out["iterations"] = report.iterations;
  out["converged"] = report.converged;
  std::vector<double> rotation(report.transform.rotation.data(),
                               report.transform.rotation.data() + 9);
  out["rotation_column_major"] = rotation;
  out["translation"] = {report.transform.translation[0], report.transform.translation[1],
                        report.transform.translation[2]};
  int kept = 0;
  for (int i = 0; i < report.weights.size(); ++i) {
    kept += report.weights[i] > 0.5;
  }
  out["inliers"] = kept;
  if (report.has_truth) {
    out["rotation_error_deg"] = report.rotation_error_deg;
    out["translation_error"] = report.translation_error;
  }
  if (!opts.out.empty()) {
    fs::create_directories(opts.out);
    std::ofstream file(fs::path(opts.out) / "registration.json");
    file << out.dump(2) << "\n";
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust Bayesian state estimation workbench"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts opts;
  app.add_option("--config", opts.config, "campaign/scenario config file (INI)");
  app.add_option("--seed", opts.seed, "master seed")->each([&](const std::string&) {
    opts.seed_set = true;
  });
  app.add_option("--out", opts.out, "output directory");
  app.add_option("--runs", opts.runs, "Monte-Carlo replicates");
  app.add_flag("--quiet", opts.quiet, "suppress progress chatter");

  auto* simulate_cmd =
      app.add_subcommand("simulate", "generate a corrupted scenario trajectory");
  auto* filter_cmd = app.add_subcommand("filter", "run configured filters on one replicate");
  auto* smooth_cmd = app.add_subcommand("smooth", "run the batch smoother on one replicate");
  auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo estimator comparison");
  auto* bounds_cmd = app.add_subcommand("bounds", "estimation lower bounds for a scenario");
  auto* register_cmd = app.add_subcommand("register", "robust point-cloud registration");

  std::string reg_input;
  std::string reg_heuristic = "esor";
  double reg_sigma = 0.001;
  register_cmd->add_option("--input", reg_input,
                           "correspondence file (px py pz qx qy qz per line)");
  register_cmd->add_option("--heuristic", reg_heuristic, "eror | esor | asor");
  register_cmd->add_option("--inlier-sigma", reg_sigma, "inlier noise scale");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate_cmd->parsed()) {
      write_simulation(load_campaign(opts));
      return 0;
    }
    if (filter_cmd->parsed()) {
      return run_single(load_campaign(opts), false);
    }
    if (smooth_cmd->parsed()) {
      return run_single(load_campaign(opts), true);
    }
    if (bench_cmd->parsed()) {
      rbe::CampaignConfig cfg = load_campaign(opts);
      if (cfg.estimators.empty()) {
        cfg.estimators.push_back({"ukf", {}});
      }
      const auto out = rbe::run_campaign(cfg);
      for (const auto& est : out.report.estimators) {
        std::cout << est.name << ": median RMSE " << est.median_rmse_state << " (pos "
                  << est.median_rmse_pos << "), TRMSE " << est.trmse_state << ", mean wall "
                  << est.mean_wall_seconds << " s, failed " << est.failed_runs << "\n";
      }
      if (!out.summary_path.empty()) {
        std::cout << "summary: " << out.summary_path << "\n";
      }
      return 0;
    }
    if (bounds_cmd->parsed()) {
      return run_bounds(load_campaign(opts));
    }
    if (register_cmd->parsed()) {
      return run_register(reg_input, reg_heuristic, reg_sigma, opts);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
