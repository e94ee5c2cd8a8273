// Microbenchmarks for the hot paths: flights and steps, derivative blocks,
// windowed flow minima, subspace angles and vertex enumeration.

#include <benchmark/benchmark.h>

#include "polyb/cocycle.hpp"
#include "polyb/hyperbolicity.hpp"
#include "polyb/sampling.hpp"

using namespace polyb;

namespace {

Polytope simplex(int d) { return simplex_family(d, 0.9); }

void BM_step(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Polytope p = simplex(d);
  ReflectionLaw law = ReflectionLaw::linear(0.5);
  PhaseState x = sample_state(p, 1, 0);
  for (auto _ : state) {
    StepResult r = step(p, law, x);
    if (r.status == StepStatus::ok)
      x = r.state;
    else
      x = sample_state(p, 1, 0);
    benchmark::DoNotOptimize(x.point.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_step)->Arg(2)->Arg(3)->Arg(5);

void BM_iterate1000(benchmark::State& state) {
  Polytope p = simplex(3);
  ReflectionLaw law = ReflectionLaw::linear(0.5);
  PhaseState x = sample_state(p, 1, 0);
  for (auto _ : state) {
    OrbitRecord rec = iterate(p, law, x, 1000);
    benchmark::DoNotOptimize(rec.states.size());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_iterate1000);

void BM_dstep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Polytope p = simplex(d);
  ReflectionLaw law = ReflectionLaw::linear(0.5);
  PhaseState x = sample_state(p, 2, 0);
  for (auto _ : state) {
    CocycleStep s = dstep(p, law, x);
    benchmark::DoNotOptimize(s.A.data());
  }
}
BENCHMARK(BM_dstep)->Arg(3)->Arg(5);

void BM_window_min_expansion(benchmark::State& state) {
  Polytope p = simplex(3);
  ReflectionLaw law = ReflectionLaw::linear(0.62);
  OrbitRecord rec = iterate(p, law, sample_state(p, 3, 0), 400);
  auto steps = cocycle_steps(p, law, rec);
  const int w = static_cast<int>(state.range(0));
  for (auto _ : state) {
    double sigma = 1e300;
    for (int a = 0; a + w <= static_cast<int>(steps.size()); ++a) {
      Eigen::JacobiSVD<Mat> svd(velocity_flow(steps, a, a + w));
      sigma = std::min(sigma, svd.singularValues().minCoeff());
    }
    benchmark::DoNotOptimize(sigma);
  }
}
BENCHMARK(BM_window_min_expansion)->Arg(8)->Arg(24);

void BM_grassmann_angle(benchmark::State& state) {
  const int d = 6, k = 3;
  std::vector<Vec> a, b;
  std::uint64_t key = 9;
  for (int i = 0; i < k; ++i) {
    Vec u(d), v(d);
    for (int j = 0; j < d; ++j) {
      u(j) = uniform01(key = splitmix64(key)) - 0.5;
      v(j) = uniform01(key = splitmix64(key)) - 0.5;
    }
    a.push_back(u);
    b.push_back(v);
  }
  Frame e = orthonormalize(a, d), f = orthonormalize(b, d);
  for (auto _ : state) benchmark::DoNotOptimize(grassmann_angle(e, f));
}
BENCHMARK(BM_grassmann_angle);

void BM_vertex_enumeration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<Vec> gen;
  std::uint64_t key = 17;
  while (static_cast<int>(gen.size()) < n) {
    Vec g(3);
    for (int j = 0; j < 3; ++j) g(j) = uniform01(key = splitmix64(key)) - 0.5;
    if (g.norm() > 0.1) gen.push_back(g.normalized());
  }
  for (auto _ : state) {
    try {
      Polytope p = Polytope::from_generators(gen);
      benchmark::DoNotOptimize(p.num_vertices());
    } catch (const Error&) {
    }
  }
}
BENCHMARK(BM_vertex_enumeration)->Arg(8)->Arg(14);

void BM_escaping_time(benchmark::State& state) {
  Polytope p = simplex(3);
  ReflectionLaw law = ReflectionLaw::linear(0.62);
  PhaseState x = sample_state(p, 5, 0);
  for (auto _ : state) {
    EscapingTime t = escaping_time(p, law, x, 400);
    benchmark::DoNotOptimize(t.k);
  }
}
BENCHMARK(BM_escaping_time);

}  // namespace

BENCHMARK_MAIN();
