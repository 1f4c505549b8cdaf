#include "qgt/sim.hpp"

#include <cmath>
#include <stdexcept>

#include "qgt/rng.hpp"

namespace qgt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

std::size_t dim_of(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 8)
        throw std::invalid_argument("qubit count must be between 1 and 8");
    return std::size_t(1) << n_qubits;
}

// Bit position of qubit q in a basis index (qubit 0 most significant).
int bit_pos(int n_qubits, int q) { return n_qubits - 1 - q; }

void apply_single_qubit(std::vector<cplx>& amps, int n_qubits, int q, const cplx u00,
                        const cplx u01, const cplx u10, const cplx u11) {
    const std::size_t stride = std::size_t(1) << bit_pos(n_qubits, q);
    const std::size_t dim = amps.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const cplx a0 = amps[i];
            const cplx a1 = amps[i + stride];
            amps[i] = u00 * a0 + u01 * a1;
            amps[i + stride] = u10 * a0 + u11 * a1;
        }
    }
}

void check_target(int n_qubits, int q) {
    if (q < 0 || q >= n_qubits) throw std::invalid_argument("gate target out of range");
}

}  // namespace

StateVector StateVector::zero_state(int n) {
    StateVector s;
    s.n_qubits = n;
    s.amplitudes.assign(dim_of(n), cplx(0.0));
    s.amplitudes[0] = 1.0;
    return s;
}

double StateVector::norm_sq() const {
    double s = 0.0;
    for (const cplx& a : amplitudes) s += std::norm(a);
    return s;
}

DensityMatrix DensityMatrix::pure(const StateVector& s) {
    const std::size_t dim = s.amplitudes.size();
    CMatrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            m.at(i, j) = s.amplitudes[i] * std::conj(s.amplitudes[j]);
    DensityMatrix rho;
    rho.n_qubits = s.n_qubits;
    rho.matrix = std::move(m);
    rho.psd_checked = true;
    return rho;
}

DensityMatrix DensityMatrix::from_matrix(int n_qubits, CMatrix m, bool check_psd) {
    const std::size_t dim = dim_of(n_qubits);
    if (m.rows != dim || m.cols != dim)
        throw std::invalid_argument("DensityMatrix: matrix dimension does not match qubit count");
    double herm_defect = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            herm_defect += std::norm(m.at(i, j) - std::conj(m.at(j, i)));
    if (std::sqrt(herm_defect) > 1e-10 * std::max(1.0, m.frobenius_norm()))
        throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
    if (std::abs(m.trace() - cplx(1.0)) > 1e-10)
        throw std::invalid_argument("DensityMatrix: trace differs from one");
    DensityMatrix rho;
    rho.n_qubits = n_qubits;
    rho.matrix = std::move(m);
    if (check_psd) {
        EigDecomposition eig = hermitian_eig(rho.matrix);
        if (eig.eigenvalues.front() < -1e-9)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                        std::to_string(eig.eigenvalues.front()));
        rho.psd_checked = true;
    }
    return rho;
}

CMatrix NoiseModel::confusion_from_fidelities(double f_ground, double f_excited) {
    CMatrix c(2, 2);
    c.at(0, 0) = f_ground;
    c.at(1, 0) = 1.0 - f_ground;
    c.at(0, 1) = 1.0 - f_excited;
    c.at(1, 1) = f_excited;
    return c;
}

bool NoiseModel::has_readout_noise() const {
    for (const CMatrix& c : confusion) {
        if (std::abs(c.at(0, 0) - cplx(1.0)) > 0 || std::abs(c.at(1, 1) - cplx(1.0)) > 0)
            return true;
    }
    return false;
}

void NoiseModel::validate(int n_qubits) const {
    if (depolarizing_p < 0.0 || depolarizing_p > 1.0)
        throw std::invalid_argument("NoiseModel: depolarizing_p outside [0,1]");
    if (!confusion.empty() && confusion.size() != static_cast<std::size_t>(n_qubits))
        throw std::invalid_argument("NoiseModel: confusion matrix count mismatch");
    for (const CMatrix& c : confusion) {
        if (c.rows != 2 || c.cols != 2)
            throw std::invalid_argument("NoiseModel: confusion matrices must be 2x2");
        for (std::size_t col = 0; col < 2; ++col) {
            double sum = c.at(0, col).real() + c.at(1, col).real();
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("NoiseModel: confusion columns must sum to 1");
        }
    }
}

StateVector apply_circuit(const Circuit& c, const StateVector& s) {
    if (c.n_qubits != s.n_qubits)
        throw std::invalid_argument("apply_circuit: qubit count mismatch");
    if (std::abs(s.norm_sq() - 1.0) > 1e-10)
        throw std::invalid_argument("apply_circuit: state is not normalized");
    StateVector out = s;
    const int n = c.n_qubits;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (const Gate& g : c.gates) {
        check_target(n, g.q0);
        switch (g.kind) {
            case GateKind::X:
                apply_single_qubit(out.amplitudes, n, g.q0, 0.0, 1.0, 1.0, 0.0);
                break;
            case GateKind::H:
                apply_single_qubit(out.amplitudes, n, g.q0, inv_sqrt2, inv_sqrt2, inv_sqrt2,
                                   -inv_sqrt2);
                break;
            case GateKind::Rx: {
                const double half = 0.5 * g.angle;
                const cplx d(std::cos(half), 0.0), o(0.0, -std::sin(half));
                apply_single_qubit(out.amplitudes, n, g.q0, d, o, o, d);
                break;
            }
            case GateKind::Ry: {
                const double half = 0.5 * g.angle;
                const double co = std::cos(half), si = std::sin(half);
                apply_single_qubit(out.amplitudes, n, g.q0, co, -si, si, co);
                break;
            }
            case GateKind::Rz: {
                const double half = 0.5 * g.angle;
                apply_single_qubit(out.amplitudes, n, g.q0, std::polar(1.0, -half), 0.0, 0.0,
                                   std::polar(1.0, half));
                break;
            }
            case GateKind::CZ: {
                check_target(n, g.q1);
                if (g.q0 == g.q1) throw std::invalid_argument("CZ targets must differ");
                const std::size_t m0 = std::size_t(1) << bit_pos(n, g.q0);
                const std::size_t m1 = std::size_t(1) << bit_pos(n, g.q1);
                for (std::size_t i = 0; i < out.amplitudes.size(); ++i)
                    if ((i & m0) && (i & m1)) out.amplitudes[i] = -out.amplitudes[i];
                break;
            }
        }
    }
    return out;
}

Circuit ghz_circuit(int n, bool experimental_variant) {
    if (n < 2 || n > 8) throw std::invalid_argument("build_ghz: n must be in [2, 8]");
    Circuit c;
    c.n_qubits = n;
    c.gates.push_back(Gate::h(0));
    for (int q = 1; q < n; ++q) {
        c.gates.push_back(Gate::h(q));
        c.gates.push_back(Gate::cz(q - 1, q));
        c.gates.push_back(Gate::h(q));
    }
    if (experimental_variant) {
        for (int q = 1; q < n; q += 2) c.gates.push_back(Gate::x(q));
    }
    return c;
}

StateVector build_ghz(int n, bool experimental_variant) {
    return apply_circuit(ghz_circuit(n, experimental_variant), StateVector::zero_state(n));
}

Circuit random_circuit(int n, int depth, std::uint64_t seed) {
    dim_of(n);
    if (depth < 1) throw std::invalid_argument("random_circuit: depth must be >= 1");
    std::mt19937_64 rng(seed);
    Circuit c;
    c.n_qubits = n;
    for (int layer = 0; layer < depth; ++layer) {
        for (int q = 0; q < n; ++q) {
            c.gates.push_back(Gate::ry(q, kTwoPi * uniform_double(rng)));
            c.gates.push_back(Gate::rz(q, kTwoPi * uniform_double(rng)));
        }
        for (int q = layer % 2; q + 1 < n; q += 2) c.gates.push_back(Gate::cz(q, q + 1));
    }
    return c;
}

StateVector random_state(int n, int depth, std::uint64_t seed) {
    return apply_circuit(random_circuit(n, depth, seed), StateVector::zero_state(n));
}

CMatrix partial_trace_qubit(const CMatrix& m, int n_qubits, int qubit) {
    check_target(n_qubits, qubit);
    const std::size_t dim = std::size_t(1) << n_qubits;
    if (m.rows != dim || m.cols != dim)
        throw std::invalid_argument("partial_trace_qubit: dimension mismatch");
    const int b = bit_pos(n_qubits, qubit);
    const std::size_t low_mask = (std::size_t(1) << b) - 1;
    const std::size_t half = dim >> 1;
    CMatrix out(half, half);
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t ifull = ((i & ~low_mask) << 1) | (i & low_mask);
        for (std::size_t j = 0; j < half; ++j) {
            const std::size_t jfull = ((j & ~low_mask) << 1) | (j & low_mask);
            out.at(i, j) = m.at(ifull, jfull) +
                           m.at(ifull | (std::size_t(1) << b), jfull | (std::size_t(1) << b));
        }
    }
    return out;
}

namespace {

// Embed I/2 (x) reduced at the given qubit position.
CMatrix embed_mixed_qubit(const CMatrix& reduced, int n_qubits, int qubit) {
    const std::size_t dim = std::size_t(1) << n_qubits;
    const int b = bit_pos(n_qubits, qubit);
    const std::size_t low_mask = (std::size_t(1) << b) - 1;
    const std::size_t half = dim >> 1;
    CMatrix out(dim, dim);
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t ifull = ((i & ~low_mask) << 1) | (i & low_mask);
        for (std::size_t j = 0; j < half; ++j) {
            const std::size_t jfull = ((j & ~low_mask) << 1) | (j & low_mask);
            const cplx v = 0.5 * reduced.at(i, j);
            out.at(ifull, jfull) = v;
            out.at(ifull | (std::size_t(1) << b), jfull | (std::size_t(1) << b)) = v;
        }
    }
    return out;
}

}  // namespace

DensityMatrix densify(const StateVector& s, const NoiseModel& noise) {
    noise.validate(s.n_qubits);
    if (std::abs(s.norm_sq() - 1.0) > 1e-10)
        throw std::invalid_argument("densify: state is not normalized");
    DensityMatrix rho = DensityMatrix::pure(s);
    const double p = noise.depolarizing_p;
    if (p > 0.0) {
        for (int q = 0; q < s.n_qubits; ++q) {
            CMatrix mixed = embed_mixed_qubit(partial_trace_qubit(rho.matrix, s.n_qubits, q),
                                              s.n_qubits, q);
            rho.matrix *= cplx(1.0 - p);
            rho.matrix += mixed * cplx(p);
        }
    }
    // Channel output stays Hermitian PSD trace-1 up to round-off.
    for (std::size_t i = 0; i < rho.matrix.rows; ++i) rho.matrix.at(i, i).imag(0.0);
    rho.psd_checked = true;
    return rho;
}

CMatrix basis_rotation(Basis b) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CMatrix u(2, 2);
    switch (b) {
        case Basis::Z:
            u = CMatrix::identity(2);
            break;
        case Basis::X:
            u.at(0, 0) = inv_sqrt2;
            u.at(0, 1) = inv_sqrt2;
            u.at(1, 0) = inv_sqrt2;
            u.at(1, 1) = -inv_sqrt2;
            break;
        case Basis::Y:
            // Rows are <y+| and <y-| with |y+> = (|0> + i|1>)/sqrt(2).
            u.at(0, 0) = inv_sqrt2;
            u.at(0, 1) = cplx(0.0, -inv_sqrt2);
            u.at(1, 0) = inv_sqrt2;
            u.at(1, 1) = cplx(0.0, inv_sqrt2);
            break;
    }
    return u;
}

ProbDist rotated_z_distribution(const DensityMatrix& rho, const std::vector<Basis>& bases) {
    const int n = rho.n_qubits;
    if (bases.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("rotated_z_distribution: bases length mismatch");
    CMatrix m = rho.matrix;
    const std::size_t dim = m.rows;
    for (int q = 0; q < n; ++q) {
        if (bases[q] == Basis::Z) continue;
        const CMatrix u = basis_rotation(bases[q]);
        const cplx u00 = u.at(0, 0), u01 = u.at(0, 1), u10 = u.at(1, 0), u11 = u.at(1, 1);
        const std::size_t stride = std::size_t(1) << bit_pos(n, q);
        // Rows: m <- (U (x) I) m.
        for (std::size_t base = 0; base < dim; base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                for (std::size_t j = 0; j < dim; ++j) {
                    const cplx r0 = m.at(i, j), r1 = m.at(i + stride, j);
                    m.at(i, j) = u00 * r0 + u01 * r1;
                    m.at(i + stride, j) = u10 * r0 + u11 * r1;
                }
            }
        }
        // Columns: m <- m (U (x) I)^dag.
        const cplx c00 = std::conj(u00), c01 = std::conj(u01), c10 = std::conj(u10),
                   c11 = std::conj(u11);
        for (std::size_t base = 0; base < dim; base += 2 * stride) {
            for (std::size_t j = base; j < base + stride; ++j) {
                for (std::size_t i = 0; i < dim; ++i) {
                    const cplx col0 = m.at(i, j), col1 = m.at(i, j + stride);
                    m.at(i, j) = col0 * c00 + col1 * c01;
                    m.at(i, j + stride) = col0 * c10 + col1 * c11;
                }
            }
        }
    }
    ProbDist dist(n, 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        double v = m.at(i, i).real();
        if (v < 0.0) {
            if (v < -1e-10) throw std::runtime_error("rotated_z_distribution: negative diagonal");
            v = 0.0;
        }
        dist.values[i] = v;
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::runtime_error("rotated_z_distribution: probabilities sum to " +
                                 std::to_string(sum));
    return dist;
}

}  // namespace qgt
