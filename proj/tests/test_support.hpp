#pragma once

// Shared generators and independent oracles for the test suites. Everything
// here recomputes expectations from first principles (amplitude contractions,
// elimination-based determinants, finite differences) so the checks do not
// lean on the code paths under test.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qgt/linalg.hpp"
#include "qgt/povm.hpp"
#include "qgt/rng.hpp"
#include "qgt/sim.hpp"

namespace testsupport {

using qgt::cplx;
using qgt::CMatrix;

inline CMatrix random_hermitian(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m.at(i, i) = qgt::normal_double(rng);
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx v(qgt::normal_double(rng), qgt::normal_double(rng));
            m.at(i, j) = v;
            m.at(j, i) = std::conj(v);
        }
    }
    return m;
}

inline CMatrix random_psd(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    CMatrix g(n, n);
    for (auto& e : g.entries) e = cplx(qgt::normal_double(rng), qgt::normal_double(rng));
    return g * g.adjoint();
}

// Random density matrix: normalized PSD.
inline CMatrix random_density(std::size_t n, std::uint64_t seed) {
    CMatrix m = random_psd(n, seed);
    return m * cplx(1.0 / m.trace().real());
}

// Determinant by Gaussian elimination with partial pivoting; independent of
// the library's eigensolver.
inline cplx determinant(CMatrix m) {
    cplx det = 1.0;
    const std::size_t n = m.rows;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m.at(r, col)) > std::abs(m.at(pivot, col))) pivot = r;
        if (std::abs(m.at(pivot, col)) == 0.0) return 0.0;
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m.at(pivot, j), m.at(col, j));
            det = -det;
        }
        det *= m.at(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const cplx f = m.at(r, col) / m.at(col, col);
            for (std::size_t j = col; j < n; ++j) m.at(r, j) -= f * m.at(col, j);
        }
    }
    return det;
}

// Reduced density matrix of the first `keep` qubits, contracted directly from
// amplitudes (qubit 0 most significant).
inline CMatrix reduced_density(const qgt::StateVector& s, int keep) {
    const int n = s.n_qubits;
    const int rest = n - keep;
    const std::size_t dim_keep = std::size_t(1) << keep;
    const std::size_t dim_rest = std::size_t(1) << rest;
    CMatrix rho(dim_keep, dim_keep);
    for (std::size_t i = 0; i < dim_keep; ++i)
        for (std::size_t j = 0; j < dim_keep; ++j) {
            cplx acc = 0.0;
            for (std::size_t r = 0; r < dim_rest; ++r)
                acc += s.amplitudes[(i << rest) | r] * std::conj(s.amplitudes[(j << rest) | r]);
            rho.at(i, j) = acc;
        }
    return rho;
}

// Half-chain von Neumann entropy in bits.
inline double half_chain_entropy_bits(const qgt::StateVector& s) {
    const CMatrix rho = reduced_density(s, s.n_qubits / 2);
    const auto eig = qgt::hermitian_eig(rho);
    double ent = 0.0;
    for (double lambda : eig.eigenvalues)
        if (lambda > 1e-12) ent -= lambda * std::log2(lambda);
    return ent;
}

inline double frobenius_distance(const CMatrix& a, const CMatrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.entries.size(); ++i) s += std::norm(a.entries[i] - b.entries[i]);
    return std::sqrt(s);
}

// Normalized but unrealizable "distribution": Born image of
// (1+delta)|psi><psi| - delta|phi><phi| with <psi|phi> = 0; linear inversion
// maps it to a unit-trace Hermitian matrix with eigenvalue exactly -delta.
// Seeds where the vector would go negative are skipped deterministically.
inline qgt::ProbDist perturbed_distribution(const qgt::PovmSet& p, int n, double delta,
                                            std::uint64_t seed) {
    for (int attempt = 0; attempt < 32; ++attempt, seed += 7) {
        const qgt::StateVector psi = qgt::random_state(n, 6, seed);
        qgt::StateVector phi = qgt::random_state(n, 6, seed + 1000);
        cplx overlap = 0.0;
        for (std::size_t i = 0; i < psi.amplitudes.size(); ++i)
            overlap += std::conj(psi.amplitudes[i]) * phi.amplitudes[i];
        double norm = 0.0;
        for (std::size_t i = 0; i < phi.amplitudes.size(); ++i) {
            phi.amplitudes[i] -= overlap * psi.amplitudes[i];
            norm += std::norm(phi.amplitudes[i]);
        }
        for (auto& a : phi.amplitudes) a /= std::sqrt(norm);

        const qgt::ProbDist p_psi =
            qgt::povm_distribution(qgt::densify(psi, qgt::NoiseModel::ideal()), p);
        const qgt::ProbDist p_phi =
            qgt::povm_distribution(qgt::densify(phi, qgt::NoiseModel::ideal()), p);
        qgt::ProbDist out(n, p.alphabet());
        bool ok = true;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            out.values[i] = (1.0 + delta) * p_psi.values[i] - delta * p_phi.values[i];
            ok = ok && out.values[i] >= 0.0;
        }
        if (ok) return out;
    }
    throw std::runtime_error("perturbed_distribution: no nonnegative construction found");
}

}  // namespace testsupport
