#include <benchmark/benchmark.h>

#include "hestopt/policy.hpp"
#include "hestopt/specfun.hpp"
#include "hestopt/verify_mc.hpp"
#include "hestopt/verify_pde.hpp"

using namespace hestopt;

namespace {

const HestonParams kBase{0.2, 1.0, 0.16, 0.4, 0.5};
const Utility kExp = ExponentialUtility{1.0};

void BM_LogGamma(benchmark::State& state) {
    double x = 0.3;
    for (auto _ : state) {
        x += 1e-9;
        benchmark::DoNotOptimize(specfun::log_gamma(x));
    }
}
BENCHMARK(BM_LogGamma);

void BM_KummerSeries(benchmark::State& state) {
    const double z = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(specfun::log_kummer_m({1.75, 2.0, z}));
    }
    state.SetLabel("z=" + std::to_string(state.range(0)));
}
BENCHMARK(BM_KummerSeries)->Arg(2)->Arg(50)->Arg(400)->Arg(5000);

void BM_KummerRatio(benchmark::State& state) {
    const double z = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(specfun::kummer_ratio_shifted(1.75, 2.0, z));
    }
}
BENCHMARK(BM_KummerRatio)->Arg(2)->Arg(50)->Arg(400);

void BM_ValueFactor(benchmark::State& state) {
    const auto c = derive_constants(kBase, kExp);
    double v = 0.16;
    for (auto _ : state) {
        v += 1e-12;
        benchmark::DoNotOptimize(value_factor(c, kBase, v, 0.5));
    }
}
BENCHMARK(BM_ValueFactor);

void BM_OptimalControl(benchmark::State& state) {
    const auto c = derive_constants(kBase, kExp);
    const EvaluationPoint point{1.0, 1.0, 0.16, 0.0, 0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimal_control(point, kExp, c, kBase));
    }
}
BENCHMARK(BM_OptimalControl);

void BM_CnSolve(benchmark::State& state) {
    const auto c = derive_constants(kBase, kExp);
    const int n = static_cast<int>(state.range(0));
    const GridSpec grid = default_grid(kBase, 1.0, n, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cn_solve(kBase, c, grid));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_CnSolve)->Arg(64)->Arg(128)->Arg(256);

void BM_CirPaths(benchmark::State& state) {
    McConfig cfg;
    cfg.n_paths = 1000;
    cfg.n_steps = 256;
    cfg.seed = 1;
    cfg.scheme = state.range(0) == 0 ? CirScheme::FullTruncationEuler : CirScheme::ExactCir;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_cir(kBase, 0.16, 0.5, cfg));
    }
    state.SetLabel(state.range(0) == 0 ? "euler" : "exact");
}
BENCHMARK(BM_CirPaths)->Arg(0)->Arg(1);

} // namespace

BENCHMARK_MAIN();
