#include <benchmark/benchmark.h>

#include "kmsorder/geometry.hpp"
#include "kmsorder/oracle.hpp"
#include "kmsorder/perturbative.hpp"
#include "kmsorder/spectral.hpp"

using namespace kmsorder;

namespace {

Protocol xy(double lambda = 0.1) {
    return {{Observable::x(), SwitchingFunction::cosine_bump(-1.5, 1.0)},
            {Observable::y(), SwitchingFunction::cosine_bump(1.5, 1.0)},
            lambda};
}

const DensityMatrix kRho = DensityMatrix::from_bloch({0.3, 0.2, 0.4});

void BM_SwitchingFourier(benchmark::State& state) {
    const auto chi = SwitchingFunction::smooth_bump(0.0, 1.0);
    double w = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(chi.fourier(w));
        w += 1e-3;
    }
}
BENCHMARK(BM_SwitchingFourier);

void BM_RelativeEntropy(benchmark::State& state) {
    const auto a = pauli_gibbs({0, 1, 0}, 2.0), b = pauli_gibbs({1, 0, 0}, 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(relative_entropy(a, b));
}
BENCHMARK(BM_RelativeEntropy);

void BM_AsymmetryFrequency(benchmark::State& state) {
    const auto m = SpectralModel::flat_ohmic(1.0, 5.0);
    for (auto _ : state) benchmark::DoNotOptimize(delta_rho_frequency(xy(), m, kRho));
}
BENCHMARK(BM_AsymmetryFrequency)->Unit(benchmark::kMillisecond);

void BM_AsymmetryTime(benchmark::State& state) {
    const auto m = SpectralModel::flat_ohmic(1.0, 5.0);
    for (auto _ : state) benchmark::DoNotOptimize(delta_rho_commutator_time(xy(), m, kRho));
}
BENCHMARK(BM_AsymmetryTime)->Unit(benchmark::kMillisecond);

void BM_AsymmetryDyson(benchmark::State& state) {
    const auto m = SpectralModel::flat_ohmic(1.0, 5.0);
    for (auto _ : state) benchmark::DoNotOptimize(delta_rho_dyson(xy(), m, kRho));
}
BENCHMARK(BM_AsymmetryDyson)->Unit(benchmark::kMillisecond);

void BM_OracleAsymmetry(benchmark::State& state) {
    const DiscreteModeSet modes{{{2.0, 0.3}, {3.5, 0.25}}, 1.0};
    const TruncatedField field(modes, static_cast<int>(state.range(0)));
    EvolutionSpec spec;
    spec.check_step = false;
    for (auto _ : state) benchmark::DoNotOptimize(ordering_asymmetry_exact(field, xy(0.1), kRho, spec));
}
BENCHMARK(BM_OracleAsymmetry)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
