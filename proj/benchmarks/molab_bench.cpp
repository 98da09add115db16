#include <benchmark/benchmark.h>

#include "molab/density.hpp"

using namespace molab;

namespace {

PiecewiseFunction chi(double a, double b) { return PiecewiseFunction::indicator(BoxSet::interval(a, b, true)); }

void BM_ModularPhi1(benchmark::State& state) {
  MOFunction phi = make_phi1();
  PiecewiseFunction f = chi(1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(modular(phi, f).value);
}
BENCHMARK(BM_ModularPhi1);

void BM_ModularSmoothBump(benchmark::State& state) {
  MOFunction phi = make_variable_exponent(Descriptor::sine(2.0, 1.0, 1.0, 0.0), BoxSet::interval(0, 3.14, false));
  PiecewiseFunction f = PiecewiseFunction::smooth(1, {SmoothTerm{1.0, {Bump{Box::interval(1, 2), point1(0.3)}}}});
  for (auto _ : state) benchmark::DoNotOptimize(modular(phi, f).value);
}
BENCHMARK(BM_ModularSmoothBump);

void BM_NormPhi1(benchmark::State& state) {
  MOFunction phi = make_phi1();
  PiecewiseFunction f = chi(1, 2);
  NormOptions opt;
  opt.probe_membership = false;
  for (auto _ : state) benchmark::DoNotOptimize(luxemburg_norm(phi, f, opt).value);
}
BENCHMARK(BM_NormPhi1);

void BM_SingularSet(benchmark::State& state) {
  MOFunction phi = state.range(0) == 1 ? make_phi1() : make_phi2(8);
  const BoxSet window = BoxSet::interval(-2, 2, false);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_singular_set(phi, window, 1e-2).measure_upper);
}
BENCHMARK(BM_SingularSet)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Phi1Trace(benchmark::State& state) {
  MOFunction phi = make_phi1();
  const BoxSet omega = BoxSet::interval(-10, 10, false);
  SingularSetEstimate sing = estimate_singular_set(phi, omega, 1e-2);
  ApproximationOptions opt;
  opt.n_max = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(approximate_indicator(phi, BoxSet::interval(1, 2, true), omega, sing, opt).steps.size());
}
BENCHMARK(BM_Phi1Trace)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
