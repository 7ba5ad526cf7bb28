// Serial reference vs OpenMP for the three hot kernels. Run with
// FINSLER_NUM_THREADS unset to use every core.

#include <benchmark/benchmark.h>

#include <numbers>

#include "finsler/analysis.hpp"
#include "finsler/curvature.hpp"
#include "finsler/geodesics.hpp"
#include "finsler/measure.hpp"
#include "finsler/metric.hpp"

namespace {

using namespace finsler;

void ricci_scan(benchmark::State& state, bool parallel) {
  const MetricInstance m = zoo::funk(2);
  const MeasureSpec mu = MeasureSpec::busemann_hausdorff();
  ScanGrid grid;
  grid.points = box_grid(m, Vec::Zero(2), 0.6, static_cast<int>(state.range(0)));
  grid.directions = 16;
  for (auto _ : state) {
    const RicciBound b = parallel ? ricci_bound_scan(m, mu, {}, grid) : ricci_bound_scan_serial(m, mu, {}, grid);
    benchmark::DoNotOptimize(b.inf_ric);
  }
  state.counters["states"] = static_cast<double>(grid.points.size() * grid.directions);
}

void profile(benchmark::State& state, bool parallel) {
  const MetricInstance m = zoo::round_sphere(2);
  const MeasureSpec mu = MeasureSpec::riemannian_volume();
  VolumeOptions vo;
  vo.directions = static_cast<int>(state.range(0));
  vo.step = 0.01;
  vo.parallel = parallel;
  Vec p(2);
  p << 0.5, 0.0;
  for (auto _ : state) {
    const SphereProfile prof = sphere_profile(m, mu, p, 2.0, vo);
    benchmark::DoNotOptimize(prof.cumulative.back());
  }
}

void heat(benchmark::State& state, bool parallel) {
  zoo::Asym1DParams ap;
  ap.a1 = 0.3;
  ap.b0 = 2.0;
  ap.b1 = 0.4;
  ap.length = 2.0 * std::numbers::pi;
  const MetricInstance m = zoo::asym1d(ap);
  const MeasureSpec mu = MeasureSpec::busemann_hausdorff();
  const Grid1D G = make_grid(m, mu, static_cast<int>(state.range(0)), GridSpec{0.0, ap.length, true, FaceWeights::Midpoint});
  const std::vector<double> f0 = random_smooth(G, 1);
  HeatOptions ho;
  ho.T = 0.005;
  ho.parallel = parallel;
  for (auto _ : state) {
    const HeatTrajectory tr = heat_flow(G, f0, ho);
    benchmark::DoNotOptimize(tr.phi.back());
  }
}

}  // namespace

BENCHMARK_CAPTURE(ricci_scan, serial, false)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(ricci_scan, openmp, true)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(profile, serial, false)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(profile, openmp, true)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(heat, serial, false)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(heat, openmp, true)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
