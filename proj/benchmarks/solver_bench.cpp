#include <benchmark/benchmark.h>

#include <numbers>

#include "hjreach/geometry.hpp"
#include "hjreach/solver.hpp"

using namespace hjreach;

namespace {

GridSpec car_grid(std::size_t n) {
  return GridSpec({{-30, 30, n, false},
                   {-12, 12, n, false},
                   {-std::numbers::pi, std::numbers::pi, 16, true},
                   {0, 15, 9, false},
                   {0, 15, 9, false}});
}

void BM_LaxFriedrichsStep(benchmark::State& state) {
  const GridSpec g = car_grid(static_cast<std::size_t>(state.range(0)));
  const CarParams c;
  const RelativeCarDynamics dyn(c, c, {{c.accel, c.steer}, {c.accel, c.steer}}, GameConfig{});
  const ScalarField ell = build_ell_field(g, BodyDims{}, BodyDims{});
  const double dt = max_stable_dt(g, dyn, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(lf_step(ell, dyn, dt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_LaxFriedrichsStep)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_SignedDistance(benchmark::State& state) {
  const BodyDims a, b;
  double theta = 0.0;
  for (auto _ : state) {
    theta += 0.001;
    benchmark::DoNotOptimize(signed_distance_rect({6.0, 1.5, theta}, a, b));
  }
}
BENCHMARK(BM_SignedDistance);

void BM_EllField(benchmark::State& state) {
  const GridSpec g = car_grid(41);
  for (auto _ : state) benchmark::DoNotOptimize(build_ell_field(g, BodyDims{}, BodyDims{}));
}
BENCHMARK(BM_EllField)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
