#include <benchmark/benchmark.h>

#include <random>

#include "qgt/povm.hpp"
#include "qgt/rng.hpp"
#include "qgt/rnn.hpp"
#include "qgt/sim.hpp"

namespace {

qgt::OutcomeDataset bell_dataset(std::size_t shots) {
    const qgt::PovmSet p = qgt::make_povm(qgt::PovmKind::Pauli4);
    const qgt::DensityMatrix rho =
        qgt::densify(qgt::build_ghz(2, false), qgt::NoiseModel::ideal());
    return qgt::sample_dataset(rho, p, shots, qgt::NoiseModel::ideal(), 1);
}

void BM_GradientBatch(benchmark::State& state) {
    const int hidden = static_cast<int>(state.range(0));
    const qgt::OutcomeDataset data = bell_dataset(64);
    qgt::TrainingConfig cfg;
    cfg.hidden_size = hidden;
    cfg.max_epochs = 1;
    qgt::RnnParams params = qgt::RnnParams::zeros(hidden, 4);
    std::mt19937_64 rng(3);
    for (double& w : params.theta) w = 0.1 * (2.0 * qgt::uniform_double(rng) - 1.0);

    std::vector<std::span<const std::uint8_t>> batch;
    for (std::size_t i = 0; i < data.n_shots(); ++i) batch.push_back(data.shot(i));
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgt::gradient(params, batch));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_GradientBatch)->Arg(16)->Arg(32)->Arg(64);

void BM_TrainEpoch(benchmark::State& state) {
    const qgt::OutcomeDataset data = bell_dataset(static_cast<std::size_t>(state.range(0)));
    qgt::TrainingConfig cfg;
    cfg.hidden_size = 16;
    cfg.max_epochs = 1;
    cfg.seed = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgt::train(data, cfg));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(1000)->Arg(8000);

void BM_ExactDistribution(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    qgt::RnnParams params = qgt::RnnParams::zeros(32, 4);
    std::mt19937_64 rng(7);
    for (double& w : params.theta) w = 0.2 * (2.0 * qgt::uniform_double(rng) - 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgt::exact_distribution(params, n));
    }
}
BENCHMARK(BM_ExactDistribution)->Arg(3)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
