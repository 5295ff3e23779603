#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include <cmath>

#include "dcomp/frequency_sweep.hpp"
#include "dcomp/transfer_operator.hpp"

using namespace dcomp;

namespace {

const LinearDelayModel& mg() {
  static const LinearDelayModel m = build_mackey_glass(0.1, 0.2, 10.0, 1.0).model;
  return m;
}

WedgeSum smooth_pair(int N) {
  Grid g{1.0, N};
  auto f1 = embed_continuous([](double t) { return std::cos(t); }, g);
  auto f2 = embed_continuous([](double t) { return 0.5 * std::cos(2.0 * t) + 0.4 * std::sin(t + 0.3); }, g);
  return {{1.0, {f1, f2}}};
}

SweepConfig sweep_config() {
  SweepConfig c;
  c.grid_n = 60;
  c.T = 80.0;
  c.s_bound = -0.2;
  c.n_u = c.n_m = 6;
  c.d_omega = 0.05;
  c.omega_max = 10.0;
  return c;
}

const TransferCache& cache() {
  static const TransferCache c = make_sweep_cache(mg(), sweep_config());
  return c;
}

void BM_laplace_parallel(benchmark::State& st) {
  auto phi = smooth_pair(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(resolvent_laplace(mg(), phi, cplx(-0.05, 1.0), 60.0, -0.2));
}

void BM_laplace_serial(benchmark::State& st) {
  auto phi = smooth_pair(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(resolvent_laplace_serial(mg(), phi, cplx(-0.05, 1.0), 60.0, -0.2));
}

void BM_sweep_parallel(benchmark::State& st) {
  const auto& c = cache();
  auto cfg = sweep_config();
  for (auto _ : st) benchmark::DoNotOptimize(sweep(c, cfg));
}

void BM_sweep_serial(benchmark::State& st) {
  const auto& c = cache();
  auto cfg = sweep_config();
  for (auto _ : st) benchmark::DoNotOptimize(sweep_serial(c, cfg));
}

}  // namespace

BENCHMARK(BM_laplace_parallel)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_laplace_serial)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
