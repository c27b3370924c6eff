#include "yamabe/bubble.hpp"
#include "yamabe/gamma_solver.hpp"
#include "yamabe/pohozaev.hpp"
#include "yamabe/special_integrals.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace yamabe;

namespace {

Mat diag_pi(int n) {
  Mat h = Mat::Zero(n - 1, n - 1);
  h(0, 0) = 1.0;
  h(1, 1) = -1.0;
  return h;
}

const GammaProfile& profile150() {
  static const GammaProfile p = solve_profile(7, GridSpec::parse("150x150"));
  return p;
}

}  // namespace

static void BM_IntegralI(benchmark::State& st) {
  for (auto _ : st)
    for (int m = 6; m <= 12; ++m) benchmark::DoNotOptimize(integral_I(m, m));
}
BENCHMARK(BM_IntegralI);

static void BM_BubbleJet(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const BubbleField U(n, 0.5);
  Vec y = Vec::Constant(n, 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(U.evaluate(y, 2));
}
BENCHMARK(BM_BubbleJet)->Arg(7)->Arg(12);

static void BM_SolveProfile(benchmark::State& st) {
  const GridSpec g = GridSpec::parse(std::to_string(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(solve_profile(7, g));
}
BENCHMARK(BM_SolveProfile)->Arg(75)->Arg(150)->Unit(benchmark::kMillisecond);

static void BM_ReconstructGamma(benchmark::State& st) {
  const auto& p = profile150();
  const Mat h = diag_pi(7);
  Vec y = Vec::Constant(7, 0.4);
  const int order = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(reconstruct_gamma(p, h, y, order));
}
BENCHMARK(BM_ReconstructGamma)->Arg(0)->Arg(2);

static void BM_ComputeP(benchmark::State& st) {
  const BubbleField U(7, 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(compute_P(U, 1.0));
}
BENCHMARK(BM_ComputeP)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
