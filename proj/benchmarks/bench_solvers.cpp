#include <benchmark/benchmark.h>

#include <covalign/assignment.hpp>
#include <covalign/gw_solver.hpp>
#include <covalign/instances.hpp>
#include <covalign/qmle_solver.hpp>
#include <covalign/spectral.hpp>

using namespace covalign;

namespace {

AlignmentInstance wishart_instance(std::size_t d) {
  InstanceSpec spec;
  spec.kind = InstanceKind::wishart;
  spec.normalize = Normalization::opnorm;
  spec.d = d;
  spec.m = SampleSize::of(static_cast<std::int64_t>(4 * d * d));
  spec.n = spec.m;
  spec.seed = 1;
  return make_instance(spec);
}

}  // namespace

static void BM_LapMax(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  Rng rng(7);
  std::normal_distribution<double> z;
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
  for (auto _ : state) benchmark::DoNotOptimize(lap_max(m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LapMax)->RangeMultiplier(2)->Range(8, 256)->Complexity();

// One GW inner step on a realistic kernel.
static void BM_SinkhornProject(benchmark::State& state) {
  const AlignmentInstance inst = wishart_instance(static_cast<std::size_t>(state.range(0)));
  const double eps = GwOptions{}.resolved_epsilon(inst.dim());
  const Matrix p = Coupling::uniform(inst.dim()).entries();
  Matrix kernel = (2.0 / eps) * (inst.sigma_hat_y.matrix() * p * inst.sigma_hat_x.matrix());
  kernel.array() -= kernel.maxCoeff();
  for (auto _ : state) benchmark::DoNotOptimize(sinkhorn_project(kernel));
}
BENCHMARK(BM_SinkhornProject)->Arg(16)->Arg(32)->Arg(64);

static void BM_EntropicGw(benchmark::State& state) {
  const AlignmentInstance inst = wishart_instance(static_cast<std::size_t>(state.range(0)));
  GwOptions opts;
  opts.anneal = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(gw_estimate(inst.sigma_hat_x, inst.sigma_hat_y, opts));
}
BENCHMARK(BM_EntropicGw)->ArgsProduct({{16, 32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_LocalSearch(benchmark::State& state) {
  const AlignmentInstance inst = wishart_instance(static_cast<std::size_t>(state.range(0)));
  SearchOptions opts;
  opts.restarts = 4;
  for (auto _ : state) benchmark::DoNotOptimize(qmle_estimate(inst.sigma_hat_x, inst.sigma_hat_y, opts));
}
BENCHMARK(BM_LocalSearch)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Spectral(benchmark::State& state) {
  const AlignmentInstance inst = wishart_instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_estimate(inst.sigma_hat_x, inst.sigma_hat_y));
}
BENCHMARK(BM_Spectral)->Arg(16)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
