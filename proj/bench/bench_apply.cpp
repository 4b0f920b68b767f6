// Microbenchmark of the half-step operator application: the OpenMP
// production kernel (StepSystem::apply) against the serial plain-loop
// reference (ref::apply_step_operator) over a range of grid sizes.
//
//   cmake --build build --target bench_apply && ./build/bench_apply

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "binmix/grid.hpp"
#include "binmix/scheme.hpp"

using namespace binmix;

namespace {

void fill_random(std::vector<double>& v, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& x : v) x = dist(rng);
}

template <class F>
void fill_field(F& f, std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& x : f.raw()) x = dist(rng);
}

FrozenCoeffs make_coeffs(const GridSpec& g, std::mt19937& rng) {
  FrozenCoeffs c(g);
  fill_field(c.rho1b, rng, 0.2, 1.2);
  fill_field(c.rho2b, rng, 0.2, 1.2);
  fill_field(c.rbar, rng, 0.5, 1.5);
  fill_field(c.p1b, rng);
  fill_field(c.p2b, rng);
  fill_field(c.inv_re_s, rng, 0.01, 1.0);
  fill_field(c.inv_re_v, rng, 0.01, 1.0);
  fill_field(c.ub, rng);
  fill_field(c.vb, rng);
  apply_scalar_bc(c.rho1b);
  apply_scalar_bc(c.rho2b);
  apply_scalar_bc(c.rbar);
  apply_scalar_bc(c.p1b);
  apply_scalar_bc(c.p2b);
  apply_scalar_bc(c.inv_re_s);
  apply_scalar_bc(c.inv_re_v);
  apply_no_slip(c.ub);
  apply_no_slip(c.vb);
  c.refresh_derived();
  return c;
}

void bm_apply_omp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g{n, n, 1.0, 1.0};
  std::mt19937 rng(17);
  const FrozenCoeffs c = make_coeffs(g, rng);
  StepSystem sys(g, ModelParams{}, 1e-3);
  sys.set_coeffs(&c);
  std::vector<double> x(sys.layout().total()), y;
  fill_random(x, rng);
  for (auto _ : state) {
    sys.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * sys.layout().total());
}

void bm_apply_reference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g{n, n, 1.0, 1.0};
  std::mt19937 rng(17);
  const FrozenCoeffs c = make_coeffs(g, rng);
  const ModelParams mp;
  DofLayout lay{n, n};
  std::vector<double> x(lay.total()), y;
  fill_random(x, rng);
  for (auto _ : state) {
    ref::apply_step_operator(g, mp, 1e-3, c, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * lay.total());
}

}  // namespace

BENCHMARK(bm_apply_omp)->Arg(32)->Arg(64)->Arg(128)->Arg(256)
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_apply_reference)->Arg(32)->Arg(64)->Arg(128)->Arg(256)
    ->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
