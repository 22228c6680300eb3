#include <benchmark/benchmark.h>

#include <isoframe/ansatz.hpp>
#include <isoframe/iso_bundle.hpp>
#include <isoframe/odes.hpp>

#include <cmath>

using namespace isoframe;

namespace {

AnsatzFrame curved_spherical() {
    ProfileSet ps;
    ps.domain = {0.6, 4.0};
    ps.add(expression_profile("P", "1 + 0.2*sin(u)"));
    ps.add(expression_profile("Q", "1/(1 + 0.1*u^2)"));
    ps.add(expression_profile("p", "u + 0.3*cos(u)"));
    ps.add(expression_profile("q", "u"));
    return build_spherical(ps, 1.0);
}

void BM_solve_connection(benchmark::State& state) {
    AnsatzFrame af = curved_spherical();
    const Point x{0.2, 1.7, 0.9, 0.4};
    for (auto _ : state) benchmark::DoNotOptimize(solve_connection(af.frame, x));
}
BENCHMARK(BM_solve_connection);

void BM_hodge_star_evaluate(benchmark::State& state) {
    AnsatzFrame af = curved_spherical();
    IsoTripletForm star = hodge_star(af.frame.pi);
    const Point x{0.2, 1.7, 0.9, 0.4};
    for (auto _ : state)
        for (int a = 0; a < 3; ++a) benchmark::DoNotOptimize(star[a].evaluate(x));
}
BENCHMARK(BM_hodge_star_evaluate);

void BM_curvature_evaluate(benchmark::State& state) {
    AnsatzFrame af = curved_spherical();
    IsoTripletForm K = curvature(connection_field(af.frame));
    const Point x{0.2, 1.7, 0.9, 0.4};
    for (auto _ : state)
        for (int a = 0; a < 3; ++a) benchmark::DoNotOptimize(K[a].evaluate(x));
}
BENCHMARK(BM_curvature_evaluate);

void BM_integrate_plane_wave(benchmark::State& state) {
    ODESystem sys = plane_wave_system(1.0);
    const double span = static_cast<double>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(integrate(sys, {0.3, 0.9, 0.4, 0.1}, 0.0, span));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_integrate_plane_wave)->Arg(10)->Arg(40)->Arg(160)->Complexity(benchmark::oN);

void BM_shoot_point_charge(benchmark::State& state) {
    ShootingConfig cfg;
    cfg.c1 = 1.0;
    cfg.c2 = -1.0;
    for (auto _ : state) benchmark::DoNotOptimize(shoot_point_charge(cfg));
}
BENCHMARK(BM_shoot_point_charge)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
