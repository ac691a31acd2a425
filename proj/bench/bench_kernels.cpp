// Serial against OpenMP pair kernels, plus one full flow step.

#include "rodflow/experiments.hpp"
#include "rodflow/flow.hpp"
#include "rodflow/kernels.hpp"
#include "rodflow/selfavoid.hpp"

#include <benchmark/benchmark.h>

using namespace rodflow;

namespace {

RodState bench_state(int n) {
  return perturb_out_of_plane(make_circle_rod(2.0 * kPi, n, 5.0), 0.05, 3.0);
}

void BM_TpGradient(benchmark::State& st, Exec exec) {
  const RodState s = bench_state(static_cast<int>(st.range(0)));
  const QuadCloud cloud = sample_quadrature(s.curve, *s.mesh);
  const double cutoff = 2.0 * s.mesh->h_max();
  for (auto _ : st) benchmark::DoNotOptimize(tp_gradient_kernel(cloud, 4.0, cutoff, exec).energy);
}

void BM_TpEnergy(benchmark::State& st, Exec exec) {
  const RodState s = bench_state(static_cast<int>(st.range(0)));
  const QuadCloud cloud = sample_quadrature(s.curve, *s.mesh);
  const double cutoff = 2.0 * s.mesh->h_max();
  for (auto _ : st) benchmark::DoNotOptimize(tp_energy_kernel(cloud, 4.0, cutoff, exec));
}

void BM_Writhe(benchmark::State& st, Exec exec) {
  const RodState s = bench_state(static_cast<int>(st.range(0)));
  const QuadCloud cloud = sample_quadrature(s.curve, *s.mesh);
  for (auto _ : st) benchmark::DoNotOptimize(writhe_kernel(cloud, 2.0 * s.mesh->h_max(), exec));
}

void BM_StrandDistance(benchmark::State& st, Exec exec) {
  const RodState s = bench_state(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(min_strand_distance(s.curve, *s.mesh, 0.0, 4, exec));
}

void BM_FlowStep(benchmark::State& st) {
  Scenario sc = build_scenario("overtwist", {.N = static_cast<int>(st.range(0))});
  RodFlow flow(sc.initial.mesh, sc.config, sc.bc);
  RodState s = sc.initial;
  for (auto _ : st) s = flow.step(s).state;
}

}  // namespace

BENCHMARK_CAPTURE(BM_TpEnergy, serial, Exec::serial)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TpEnergy, parallel, Exec::parallel)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TpGradient, serial, Exec::serial)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TpGradient, parallel, Exec::parallel)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Writhe, serial, Exec::serial)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Writhe, parallel, Exec::parallel)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_StrandDistance, serial, Exec::serial)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_StrandDistance, parallel, Exec::parallel)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FlowStep)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
