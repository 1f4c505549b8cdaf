#pragma once

#include <cstdint>
#include <vector>

#include "qgt/data.hpp"
#include "qgt/linalg.hpp"

namespace qgt {

// Measurement axis / Pauli label. Outcome bit 0 of a rotated-z measurement
// projects onto the +1 eigenstate of the chosen operator.
enum class Basis : std::uint8_t { Z = 0, X = 1, Y = 2 };

// Pure state on n qubits; basis index i carries qubit 0 in the most
// significant bit, so |00100> on five qubits is index 4.
struct StateVector {
    int n_qubits = 0;
    std::vector<cplx> amplitudes;

    static StateVector zero_state(int n);
    double norm_sq() const;
};

struct DensityMatrix {
    int n_qubits = 0;
    CMatrix matrix;
    // True once the PSD invariant has been verified; linear inversion hands
    // out matrices that may carry small negative eigenvalues.
    bool psd_checked = false;

    static DensityMatrix pure(const StateVector& s);
    // Validates Hermiticity (1e-10) and unit trace (1e-10); with check_psd
    // also verifies min eigenvalue >= -1e-9.
    static DensityMatrix from_matrix(int n_qubits, CMatrix m, bool check_psd = false);
};

enum class GateKind { X, H, Rx, Ry, Rz, CZ };

struct Gate {
    GateKind kind;
    int q0 = 0;
    int q1 = -1;       // CZ partner
    double angle = 0;  // Rx/Ry/Rz only

    static Gate x(int q) { return {GateKind::X, q}; }
    static Gate h(int q) { return {GateKind::H, q}; }
    static Gate rx(int q, double a) { return {GateKind::Rx, q, -1, a}; }
    static Gate ry(int q, double a) { return {GateKind::Ry, q, -1, a}; }
    static Gate rz(int q, double a) { return {GateKind::Rz, q, -1, a}; }
    static Gate cz(int a, int b) { return {GateKind::CZ, a, b}; }
};

struct Circuit {
    int n_qubits = 0;
    std::vector<Gate> gates;
};

// Per-qubit depolarizing strength plus readout confusion matrices.
// confusion[q] is column-stochastic 2x2: entry (observed, true).
struct NoiseModel {
    double depolarizing_p = 0.0;
    std::vector<CMatrix> confusion;  // empty means ideal readout

    static NoiseModel ideal() { return {}; }
    static CMatrix confusion_from_fidelities(double f_ground, double f_excited);
    bool has_readout_noise() const;
    void validate(int n_qubits) const;
};

StateVector apply_circuit(const Circuit& c, const StateVector& s);

// (|0...0> + |1...1>)/sqrt(2); the experimental variant adds an X layer on
// odd-indexed qubits, giving (|01>+|10>)/sqrt(2) at n=2.
StateVector build_ghz(int n, bool experimental_variant = false);
Circuit ghz_circuit(int n, bool experimental_variant = false);

// Layers of seeded Ry/Rz single-qubit rotations followed by a CZ chain with
// alternating offsets. Deterministic in (n, depth, seed).
Circuit random_circuit(int n, int depth, std::uint64_t seed);
StateVector random_state(int n, int depth, std::uint64_t seed);

// rho = |s><s| followed by the per-qubit depolarizing channel
// rho -> (1-p) rho + p (I/2 (x) Tr_q rho) on every qubit.
DensityMatrix densify(const StateVector& s, const NoiseModel& noise);

// diag(U rho U^dag) for the tensor product of per-qubit basis rotations;
// the returned ProbDist has alphabet 2 (bitstrings).
ProbDist rotated_z_distribution(const DensityMatrix& rho, const std::vector<Basis>& bases);

// Trace out one qubit (helper for densify and the correlation paths).
CMatrix partial_trace_qubit(const CMatrix& m, int n_qubits, int qubit);

// Basis-change unitary: Z -> I, X -> H, Y -> H S^dag.
CMatrix basis_rotation(Basis b);

}  // namespace qgt
