#include <benchmark/benchmark.h>

#include <cmath>

#include "roughavg/gaussian_paths.hpp"
#include "roughavg/presets.hpp"
#include "roughavg/rde_solver.hpp"
#include "roughavg/rough_integrate.hpp"
#include "roughavg/rough_lift.hpp"

namespace {

using namespace roughavg;

const LiftOptions opts{BmScheme::stratonovich, 1};

void bm_sample_fbm(benchmark::State& state) {
    const Grid g(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_fbm(0.4, g, ++seed));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_sample_fbm)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

void bm_lift_mixed(benchmark::State& state) {
    const std::size_t coarse_n = static_cast<std::size_t>(state.range(0));
    const Grid coarse(0.0, 1.0, coarse_n);
    const Grid fine = coarse.refine(32);
    const GaussianPath b = sample_fbm(0.4, fine, 1);
    const GaussianPath w = sample_bm(1, fine, 2);
    for (auto _ : state) benchmark::DoNotOptimize(lift_mixed(b, w, coarse, 32, opts));
}
BENCHMARK(bm_lift_mixed)->RangeMultiplier(4)->Range(64, 1024);

void bm_fast_slow(benchmark::State& state) {
    const Preset p = make_preset("averaging");
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const double eps = 0.01;
    const std::size_t sub = required_substep_factor(eps, 1.0 / static_cast<double>(n));
    const Grid coarse(0.0, 1.0, n);
    const Grid fine = coarse.refine(sub);
    const GaussianPath b = sample_fbm(0.4, fine, 3, p.coeffs.d);
    const GaussianPath w = sample_bm(p.coeffs.dp, fine, 4);
    const RoughLift lift = lift_mixed(b, w, coarse, sub, opts);
    for (auto _ : state) benchmark::DoNotOptimize(solve_fast_slow(p.coeffs, eps, lift, w, p.x0, p.y0, sub));
}
BENCHMARK(bm_fast_slow)->Arg(64)->Arg(256);

void bm_frac_integral(benchmark::State& state) {
    const Grid g(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
    const GaussianPath path = sample_fbm(0.45, g, 5);
    const RoughLift lift = lift_geometric(path.path, g, 1, g.n_steps());
    const TripletView tv = triplet_from_lift(lift, 0.4);
    MatrixField sigma;
    sigma.value = [](const Vec& u) { return Mat::Constant(1, 1, std::sin(u(0))); };
    sigma.jacobian = [](const Vec& u) { return MatJacobian{Mat::Constant(1, 1, std::cos(u(0)))}; };
    for (auto _ : state) benchmark::DoNotOptimize(frac_integral(tv, sigma, 0.0, 1.0));
}
BENCHMARK(bm_frac_integral)->Arg(256)->Arg(1024);

} // namespace

BENCHMARK_MAIN();
