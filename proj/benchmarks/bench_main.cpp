// Microbenchmarks for the hot paths: the reflected-walk step kernel (the
// cost driver of every Monte Carlo experiment), nearest-boundary queries,
// the exact transport solver, and one Crank-Nicolson sweep.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "nfl/geometry.hpp"
#include "nfl/heat_pde.hpp"
#include "nfl/rbm.hpp"
#include "nfl/rng.hpp"
#include "nfl/transport.hpp"

using namespace nfl;

namespace {

void bm_step_half_line(benchmark::State& state) {
  const Domain dom = Domain::half_line();
  PathRng rng(1, 0);
  Vec2 pos{0.05, 0.0};
  const double dt = 1e-4;
  double local_time = 0.0;
  for (auto _ : state) {
    const StepResult s = step(dom, pos, dt, {rng.normal(), rng.normal()});
    pos = s.position;
    local_time += s.pushback;
    if (pos.x > 2.0) pos.x = 0.05;  // keep the walk near the boundary
  }
  benchmark::DoNotOptimize(local_time);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_step_half_line);

void bm_step_disk_exterior(benchmark::State& state) {
  const Domain dom = Domain::disk_exterior(1.0);
  PathRng rng(1, 0);
  Vec2 pos{1.05, 0.0};
  const double dt = 1e-4;
  double local_time = 0.0;
  for (auto _ : state) {
    const StepResult s = step(dom, pos, dt, {rng.normal(), rng.normal()});
    pos = s.position;
    local_time += s.pushback;
    if (norm(pos) > 3.0) pos = {1.05, 0.0};
  }
  benchmark::DoNotOptimize(local_time);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_step_disk_exterior);

void bm_simulate_path(benchmark::State& state) {
  const Domain dom = Domain::disk_exterior(1.0);
  const int n_steps = static_cast<int>(state.range(0));
  SimConfig cfg;
  cfg.dt = 1e-5;
  cfg.seed = 7;
  uint64_t path = 0;
  double acc = 0.0;
  for (auto _ : state) {
    acc += simulate_path(dom, {1.05, 0.0}, n_steps * cfg.dt, cfg, path++)
               .final_local_time();
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations() * n_steps);
}
BENCHMARK(bm_simulate_path)->Arg(1000)->Arg(10000);

void bm_cap_nearest_boundary(benchmark::State& state) {
  const Domain dom = Domain::parabolic_cap(1.0);
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Vec2> pts(1024);
  for (Vec2& p : pts) {
    p = {u(g), u(g)};
    while (dom.signed_distance(p) < 1e-3) p = {u(g), std::abs(u(g)) + 0.5};
  }
  size_t k = 0;
  double acc = 0.0;
  for (auto _ : state) {
    acc += dom.nearest_boundary(pts[k++ & 1023]).second;
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_cap_nearest_boundary);

void bm_wasserstein_64(benchmark::State& state) {
  const Domain dom = Domain::disk_interior(1.0);
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  DiscreteMeasure mu, nu;
  for (int i = 0; i < 64; ++i) {
    mu.atoms.push_back({u(g), u(g)});
    nu.atoms.push_back({u(g), u(g)});
    mu.weights.push_back(1.0 / 64);
    nu.weights.push_back(1.0 / 64);
  }
  double acc = 0.0;
  for (auto _ : state) acc += wasserstein(mu, nu, 1.0, dom);
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(bm_wasserstein_64);

void bm_neumann_step_disk(benchmark::State& state) {
  const Domain dom = Domain::disk_interior(1.0);
  const double h = 1.0 / 64.0;
  const ScalarField f0 = make_field(dom, -1.05, 1.05, -1.05, 1.05, h,
                                    [](Vec2 p) { return p.x; });
  SolveOptions opts;
  double acc = 0.0;
  for (auto _ : state) {
    acc += solve_neumann(dom, f0, 1e-3, 1, opts).total_mass();
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(bm_neumann_step_disk);

}  // namespace

BENCHMARK_MAIN();
