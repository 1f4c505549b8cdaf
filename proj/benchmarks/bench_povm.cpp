#include <benchmark/benchmark.h>

#include "qgt/povm.hpp"
#include "qgt/sim.hpp"

namespace {

void BM_PovmDistribution(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const qgt::PovmSet p = qgt::make_povm(qgt::PovmKind::Pauli4);
    qgt::NoiseModel noise;
    noise.depolarizing_p = 0.05;
    const qgt::DensityMatrix rho = qgt::densify(qgt::random_state(n, 6, 3), noise);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgt::povm_distribution(rho, p));
    }
}
BENCHMARK(BM_PovmDistribution)->Arg(3)->Arg(5)->Arg(7);

void BM_LinearInversion(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const qgt::PovmSet p = qgt::make_povm(qgt::PovmKind::Pauli4);
    qgt::NoiseModel noise;
    noise.depolarizing_p = 0.05;
    const qgt::DensityMatrix rho = qgt::densify(qgt::random_state(n, 6, 5), noise);
    const qgt::ProbDist dist = qgt::povm_distribution(rho, p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgt::reconstruct_linear_inversion(dist, p));
    }
}
BENCHMARK(BM_LinearInversion)->Arg(2)->Arg(4);

void BM_SampleDataset(benchmark::State& state) {
    const qgt::PovmSet p = qgt::make_povm(qgt::PovmKind::Pauli4);
    qgt::NoiseModel noise;
    noise.depolarizing_p = 0.05;
    const qgt::DensityMatrix rho = qgt::densify(qgt::build_ghz(4, false), noise);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            qgt::sample_dataset(rho, p, static_cast<std::size_t>(state.range(0)), noise, 7));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleDataset)->Arg(10000);

}  // namespace
