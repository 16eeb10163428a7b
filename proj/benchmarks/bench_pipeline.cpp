#include "pneutop/config.hpp"
#include "pneutop/design_fields.hpp"
#include "pneutop/mma.hpp"
#include "pneutop/robust_driver.hpp"
#include "pneutop/sensitivity.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace pneutop;

const OptConfig& desk()
{
    static const OptConfig c = parse_config(PNEUTOP_CONFIG_DIR "/desk.cfg");
    return c;
}

Vector noise(Eigen::Index n, double lo, double hi)
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (auto& x : v) x = u(gen);
    return v;
}

void BM_FilterBuild(benchmark::State& state)
{
    const DomainModel d = build_domain(desk().domain);
    for (auto _ : state) benchmark::DoNotOptimize(DensityFilter::build(d, desk().optimization.r_min));
}
BENCHMARK(BM_FilterBuild)->Unit(benchmark::kMillisecond);

void BM_FilterApplyBackward(benchmark::State& state)
{
    const DomainModel d = build_domain(desk().domain);
    const DensityFilter f = DensityFilter::build(d, desk().optimization.r_min);
    const Vector rho = noise(d.num_elements(), 0.0, 1.0);
    for (auto _ : state) {
        Vector t = f.apply(rho);
        benchmark::DoNotOptimize(f.backward(t));
    }
}
BENCHMARK(BM_FilterApplyBackward)->Unit(benchmark::kMicrosecond);

// Pressure and displacement solves for one realization.
void BM_StateSolve(benchmark::State& state)
{
    const DomainModel d = build_domain(desk().domain);
    StateModel model(d, desk().physics());
    const Vector rho = noise(d.num_elements(), 0.05, 0.95);
    for (auto _ : state) benchmark::DoNotOptimize(model.solve(rho).u_out);
}
BENCHMARK(BM_StateSolve)->Unit(benchmark::kMillisecond);

void BM_AdjointObjective(benchmark::State& state)
{
    const DomainModel d = build_domain(desk().domain);
    StateModel model(d, desk().physics());
    model.solve(noise(d.num_elements(), 0.05, 0.95));
    const Vector l = model.elastic_solver().selector();
    for (auto _ : state) benchmark::DoNotOptimize(adjoint_objective(model, l));
}
BENCHMARK(BM_AdjointObjective)->Unit(benchmark::kMillisecond);

// One optimizer iteration minus the MMA update.
void BM_RobustEvaluate(benchmark::State& state)
{
    RobustProblem p(desk());
    const Vector x = noise(p.num_variables(), 0.1, 0.9);
    const double se_star = p.evaluate(x, 4.0).se_star;
    for (auto _ : state) benchmark::DoNotOptimize(p.evaluate(x, 4.0, se_star).f_b);
}
BENCHMARK(BM_RobustEvaluate)->Unit(benchmark::kMillisecond);

void BM_MinMaxMmaUpdate(benchmark::State& state)
{
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const Vector x = noise(n, 0.2, 0.8);
    const Vector df0 = noise(n, -1.0, 0.0), df1 = noise(n, 0.0, 1.0);
    const Vector dg0 = Vector::Constant(n, 1.0 / static_cast<double>(n)), dg1 = noise(n, -1.0, 1.0);
    for (auto _ : state) {
        state.PauseTiming();
        MinMaxMma mma(static_cast<int>(n), 2, 2, Vector::Zero(n), Vector::Ones(n), MmaParams{});
        state.ResumeTiming();
        benchmark::DoNotOptimize(mma.update(x, {-0.5, -0.6}, {df0, df1}, {0.01, -0.02}, {dg0, dg1}));
    }
}
BENCHMARK(BM_MinMaxMmaUpdate)->Arg(1000)->Arg(6000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
