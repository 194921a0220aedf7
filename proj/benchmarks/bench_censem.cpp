#include <benchmark/benchmark.h>

#include "censem/censored_terms.hpp"
#include "censem/em.hpp"
#include "censem/model_select.hpp"
#include "censem/special_fn.hpp"

using namespace censem;

namespace {

const MixtureModel kTruth{{0.2, 0.8},
                          {ComponentSpec::exponential(17), ComponentSpec::weibull(2500, 0.57)}};

void BM_GammaUpper(benchmark::State& state) {
  const double s = 0.57, x = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(special::gamma_upper(s, x));
}
BENCHMARK(BM_GammaUpper)->Arg(1)->Arg(10)->Arg(100);

void BM_DSeries(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(special::d_series(1.57, 3.0));
}
BENCHMARK(BM_DSeries);

void BM_CensoredTerm(benchmark::State& state) {
  const auto prev = ComponentSpec::weibull(2400, 0.6);
  const auto cand = ComponentSpec::weibull(2500, 0.57);
  const CensoringInterval iv{0.0, 0.5, 0};
  for (auto _ : state) benchmark::DoNotOptimize(censored_log_density_term(cand, prev, iv));
}
BENCHMARK(BM_CensoredTerm);

void BM_EStep(benchmark::State& state) {
  const auto s = build_sample(generate_synthetic(kTruth, state.range(0), 1));
  for (auto _ : state) benchmark::DoNotOptimize(e_step(kTruth, s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EStep)->Arg(200)->Arg(100000);

void BM_Fit(benchmark::State& state) {
  const auto s = build_sample(generate_synthetic(kTruth, state.range(0), 2));
  EmConfig cfg;
  if (state.range(1)) cfg.m_step_variant = MStepVariant::DirectObjective;
  for (auto _ : state) benchmark::DoNotOptimize(fit(s, {1, 1}, cfg));
}
BENCHMARK(BM_Fit)->Args({200, 0})->Args({200, 1})->Args({10000, 0})->Unit(benchmark::kMillisecond);

void BM_Selection(benchmark::State& state) {
  const auto d = generate_synthetic(kTruth, 5000, 3);
  SelectionConfig cfg;
  cfg.n_boot = 20;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_selection(d, cfg));
}
BENCHMARK(BM_Selection)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
