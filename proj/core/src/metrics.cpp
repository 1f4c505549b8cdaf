#include "qgt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgt {

namespace {

CMatrix pauli_matrix(Basis axis) {
    CMatrix m(2, 2);
    switch (axis) {
        case Basis::X:
            m.at(0, 1) = 1.0;
            m.at(1, 0) = 1.0;
            break;
        case Basis::Y:
            m.at(0, 1) = cplx(0.0, -1.0);
            m.at(1, 0) = cplx(0.0, 1.0);
            break;
        case Basis::Z:
            m.at(0, 0) = 1.0;
            m.at(1, 1) = -1.0;
            break;
    }
    return m;
}

// m <- (op at qubit q) * m
void left_apply_single(CMatrix& m, int n_qubits, int q, const CMatrix& op) {
    const std::size_t stride = std::size_t(1) << (n_qubits - 1 - q);
    const std::size_t dim = m.rows;
    const cplx u00 = op.at(0, 0), u01 = op.at(0, 1), u10 = op.at(1, 0), u11 = op.at(1, 1);
    for (std::size_t base = 0; base < dim; base += 2 * stride)
        for (std::size_t i = base; i < base + stride; ++i)
            for (std::size_t jcol = 0; jcol < dim; ++jcol) {
                const cplx r0 = m.at(i, jcol), r1 = m.at(i + stride, jcol);
                m.at(i, jcol) = u00 * r0 + u01 * r1;
                m.at(i + stride, jcol) = u10 * r0 + u11 * r1;
            }
}

void require_psd(const DensityMatrix& rho, const char* who) {
    if (rho.psd_checked) return;
    EigDecomposition eig = hermitian_eig(rho.matrix);
    if (eig.eigenvalues.front() < -1e-6)
        throw std::invalid_argument(std::string(who) + ": input state is not PSD (eigenvalue " +
                                    std::to_string(eig.eigenvalues.front()) + ")");
}

}  // namespace

double classical_fidelity(const ProbDist& p, const ProbDist& q) {
    if (p.n_qubits != q.n_qubits || p.alphabet != q.alphabet ||
        p.values.size() != q.values.size())
        throw std::invalid_argument("classical_fidelity: shape mismatch");
    double f = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i)
        f += std::sqrt(std::max(p.values[i], 0.0) * std::max(q.values[i], 0.0));
    return std::min(f, 1.0);
}

double quantum_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.n_qubits != b.n_qubits) throw std::invalid_argument("quantum_fidelity: dim mismatch");
    require_psd(a, "quantum_fidelity");
    require_psd(b, "quantum_fidelity");
    const CMatrix s = psd_sqrt(a.matrix);
    const CMatrix inner = s * b.matrix * s;
    EigDecomposition eig = hermitian_eig(inner);
    double f = 0.0;
    for (double lambda : eig.eigenvalues) f += std::sqrt(std::max(lambda, 0.0));
    return std::clamp(f, 0.0, 1.0);
}

double pauli_correlation(const DensityMatrix& rho, int j, int k, Basis axis) {
    const int n = rho.n_qubits;
    if (j == k) throw std::invalid_argument("pauli_correlation: qubits must differ");
    if (j < 0 || j >= n || k < 0 || k >= n)
        throw std::invalid_argument("pauli_correlation: qubit index out of range");
    CMatrix m = rho.matrix;
    const CMatrix sigma = pauli_matrix(axis);
    left_apply_single(m, n, j, sigma);
    left_apply_single(m, n, k, sigma);
    return m.trace().real();
}

double pauli_correlation_from_dist(const ProbDist& dist, const PovmSet& p, int j, int k,
                                   Basis axis) {
    const int n = dist.n_qubits;
    if (j == k) throw std::invalid_argument("pauli_correlation_from_dist: qubits must differ");
    if (j < 0 || j >= n || k < 0 || k >= n)
        throw std::invalid_argument("pauli_correlation_from_dist: qubit index out of range");
    const int kk = dist.alphabet;

    // Marginal over the ordered pair (j, k); POVM elements resolve the
    // identity, so summing out the other qubits is exact.
    ProbDist marginal(2, kk);
    std::vector<std::uint8_t> sym(n);
    for (std::size_t idx = 0; idx < dist.values.size(); ++idx) {
        if (dist.values[idx] == 0.0) continue;
        index_to_outcome(idx, kk, sym);
        marginal.values[static_cast<std::size_t>(sym[j]) * kk + sym[k]] += dist.values[idx];
    }

    DensityMatrix pair_rho = reconstruct_linear_inversion(marginal, p);
    return pauli_correlation(pair_rho, 0, 1, axis);
}

}  // namespace qgt
