#include <benchmark/benchmark.h>

#include "rbe/emorf.hpp"
#include "rbe/gaussian_filter.hpp"
#include "rbe/robust_pf.hpp"
#include "rbe/scenario.hpp"
#include "rbe/simulate.hpp"
#include "rbe/sor.hpp"

namespace {

rbe::Scenario bearing_scenario(int m) {
  rbe::ScenarioSpec spec;
  spec.name = "turn-range-bearing";
  spec.m = m;
  return rbe::build_scenario(spec);
}

void BM_UnscentedTransform(benchmark::State& state) {
  const rbe::Scenario sc = bearing_scenario(static_cast<int>(state.range(0)));
  const rbe::GaussianBelief belief{sc.x0, sc.P0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rbe::observation_moments(belief, sc.model, rbe::UtParams{}));
  }
}
BENCHMARK(BM_UnscentedTransform)->Arg(6)->Arg(20);

void BM_GgfStep(benchmark::State& state) {
  const rbe::Scenario sc = bearing_scenario(6);
  const rbe::Trajectory traj = rbe::simulate(sc.model, sc.x0, 1, 1);
  rbe::GaussianBelief belief{sc.x0, sc.P0};
  for (auto _ : state) {
    const auto prior = rbe::ggf_predict(belief, sc.model, rbe::UtParams{}, 1);
    benchmark::DoNotOptimize(rbe::ggf_update(prior, traj.measurements.row(0).transpose(),
                                             sc.model, rbe::UtParams{}));
  }
}
BENCHMARK(BM_GgfStep);

void BM_SorStep(benchmark::State& state) {
  const rbe::Scenario sc = bearing_scenario(static_cast<int>(state.range(0)));
  const rbe::Trajectory traj = rbe::simulate(sc.model, sc.x0, 1, 1);
  rbe::GaussianBelief prior{sc.x0, sc.P0};
  prior = rbe::ggf_predict(prior, sc.model, rbe::UtParams{}, 1);
  rbe::Vec y = traj.measurements.row(0).transpose();
  y[1] += 100.0 * std::sqrt(sc.model.R(1, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rbe::sor_step(prior, y, sc.model, rbe::SorConfig{}, rbe::UtParams{}));
  }
}
BENCHMARK(BM_SorStep)->Arg(6)->Arg(20);

void BM_EmorfStep(benchmark::State& state) {
  rbe::ScenarioSpec spec;
  spec.name = "turn-tdoa";
  spec.m = static_cast<int>(state.range(0));
  const rbe::Scenario sc = rbe::build_scenario(spec);
  const rbe::Trajectory traj = rbe::simulate(sc.model, sc.x0, 1, 1);
  rbe::GaussianBelief prior{sc.x0, sc.P0};
  prior = rbe::ggf_predict(prior, sc.model, rbe::UtParams{}, 1);
  rbe::Vec y = traj.measurements.row(0).transpose();
  y[2] += 200.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rbe::emorf_step(prior, y, sc.model, rbe::EmorfConfig{}, rbe::UtParams{}));
  }
}
BENCHMARK(BM_EmorfStep)->Arg(6)->Arg(10);

void BM_ParticleStep(benchmark::State& state) {
  rbe::ScenarioSpec spec;
  spec.name = "growth-1d";
  spec.K = 10;
  const rbe::Scenario sc = rbe::build_scenario(spec);
  const rbe::Trajectory traj = rbe::simulate(sc.model, sc.x0, spec.K, 1);
  rbe::PfPriors priors;
  priors.sample_x0 = sc.sample_x0_prior;
  const int particles = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rbe::robust_pf_run(sc.model, traj.measurements, priors,
                                                sc.pf_abnormality, particles, 7,
                                                rbe::PfMode::kRobust));
  }
  state.SetItemsProcessed(state.iterations() * particles * spec.K);
}
BENCHMARK(BM_ParticleStep)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
