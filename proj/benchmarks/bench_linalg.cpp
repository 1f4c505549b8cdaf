#include <benchmark/benchmark.h>

#include <random>

#include "qgt/linalg.hpp"
#include "qgt/rng.hpp"

namespace {

qgt::CMatrix random_hermitian(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    qgt::CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m.at(i, i) = qgt::normal_double(rng);
        for (std::size_t j = i + 1; j < n; ++j) {
            const qgt::cplx v(qgt::normal_double(rng), qgt::normal_double(rng));
            m.at(i, j) = v;
            m.at(j, i) = std::conj(v);
        }
    }
    return m;
}

void BM_HermitianEig(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const qgt::CMatrix m = random_hermitian(n, 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgt::hermitian_eig(m));
    }
}
BENCHMARK(BM_HermitianEig)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_PsdSqrt(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    qgt::CMatrix g = random_hermitian(n, 13);
    const qgt::CMatrix psd = g * g.adjoint();
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgt::psd_sqrt(psd));
    }
}
BENCHMARK(BM_PsdSqrt)->Arg(16)->Arg(32);

}  // namespace
