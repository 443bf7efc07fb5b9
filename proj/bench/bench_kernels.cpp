// Serial reference vs OpenMP for the three parallel kernels. The second
// argument is the worker count; jobs = 1 takes the serial path.
//
//   ./build/bench/bench_kernels --benchmark_filter=Moment

#include <benchmark/benchmark.h>

#include <vector>

#include "subgeo/convergence.hpp"
#include "subgeo/drift.hpp"
#include "subgeo/hitting.hpp"
#include "subgeo/numerics.hpp"
#include "subgeo/parallel.hpp"
#include "subgeo/registry.hpp"

using namespace subgeo;

namespace {

const RateProfile& profile() {
  static const RateProfile p(RateFunction::polynomial(0.5));
  return p;
}

void BM_HittingMoment(benchmark::State& st) {
  HittingSampler s(bd_polynomial(3.0, 200), TargetSet::states(201, std::vector<std::size_t>{0}),
                   3.0, 1);
  s.jobs = static_cast<int>(st.range(1));
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(estimate_hitting_moment(s, 2.0, profile(), n).mean);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_HittingMoment)->ArgsProduct({{10000}, {1, 2, 4}})->Unit(benchmark::kMillisecond);

void BM_MapPathsSerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) {
    auto v = map_paths_serial(n, [](std::size_t i) {
      Stream r(1, 2, i);
      double a = 0.0;
      for (int k = 0; k < 64; ++k) a += r.exponential();
      return a;
    });
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_MapPathsSerial)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_MapPathsOmp(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const int jobs = static_cast<int>(st.range(1));
  for (auto _ : st) {
    auto v = map_paths_omp(n, jobs, [](std::size_t i) {
      Stream r(1, 2, i);
      double a = 0.0;
      for (int k = 0; k < 64; ++k) a += r.exponential();
      return a;
    });
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_MapPathsOmp)->ArgsProduct({{100000}, {2, 4}})->Unit(benchmark::kMillisecond);

void BM_TvCurveSerial(benchmark::State& st) {
  const auto m = bd_polynomial(3.0, 200);
  const auto ts = numerics::logspace(1.0, 1e4, 20);
  for (auto _ : st) benchmark::DoNotOptimize(tv_curve_serial(m, 0, profile(), ts).tv.back());
}
BENCHMARK(BM_TvCurveSerial)->Unit(benchmark::kMillisecond);

void BM_TvCurve(benchmark::State& st) {
  const auto m = bd_polynomial(3.0, 200);
  const auto ts = numerics::logspace(1.0, 1e4, 20);
  TvOptions o;
  o.jobs = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(tv_curve(m, 0, profile(), ts, o).tv.back());
}
BENCHMARK(BM_TvCurve)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Condition2(benchmark::State& st) {
  const auto m = bd_polynomial(3.0, 200);
  std::vector<double> vals(201);
  for (std::size_t n = 0; n < vals.size(); ++n) vals[n] = std::pow(static_cast<double>(n + 1), 3.5);
  const auto v = LyapunovCandidate::on_states(vals);
  const RateProfile p(RateFunction::polynomial(0.4));
  const auto cert = check_subgeometric_drift(m, v, p);
  const auto psi = build_psi_from_v(v, p, cert);
  const auto grid = numerics::linspace(0.0, 20.0, 201);
  Condition2Options o;
  o.jobs = static_cast<int>(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(check_condition2(m, psi, p, cert.target, grid, 0.025, o).passed());
}
BENCHMARK(BM_Condition2)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
