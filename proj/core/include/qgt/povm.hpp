#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "qgt/data.hpp"
#include "qgt/linalg.hpp"
#include "qgt/sim.hpp"

namespace qgt {

// Single-qubit informationally complete POVM plus its overlap matrix.
// Element order is fixed: 0 -> z+, 1 -> x+, 2 -> y+, 3 -> pooled minus
// outcomes (pauli4) or 3/4/5 -> z-/x-/y- (pauli6).
struct PovmSet {
    PovmKind kind = PovmKind::Pauli4;
    std::vector<CMatrix> elements;
    CMatrix overlap;
    std::optional<CMatrix> overlap_inverse;  // pauli4 only; pauli6 overlap is singular

    int alphabet() const { return static_cast<int>(elements.size()); }
};

PovmSet make_povm(PovmKind kind);

// P(a) = Tr(M^(a) rho), contracted one qubit at a time.
ProbDist povm_distribution(const DensityMatrix& rho, const PovmSet& p);

// sum_a weights[a] M^(a) over the joint alphabet (weights length K^N).
CMatrix povm_weighted_sum(const std::vector<double>& weights, const PovmSet& p, int n_qubits);

// rho = sum_{a,a'} P(a) (T^-1)_{a,a'} M^(a'), evaluated by applying the
// single-qubit T^-1 along each axis of P. The result is Hermitian with unit
// trace but not necessarily PSD; psd_checked stays false.
DensityMatrix reconstruct_linear_inversion(const ProbDist& dist, const PovmSet& p);

// Basis-resolved shot records: which Pauli axis each qubit was measured in
// and the observed bit, before pooling into POVM outcome symbols.
struct BasisRecords {
    int n_qubits = 0;
    std::vector<std::uint8_t> bases;  // shot-major, values are Basis
    std::vector<std::uint8_t> bits;   // shot-major, 0/1

    std::size_t n_shots() const {
        return n_qubits == 0 ? 0 : bases.size() / static_cast<std::size_t>(n_qubits);
    }
};

// Per shot: uniform random basis per qubit, joint bitstring from the rotated
// distribution, then per-qubit readout corruption. The corruption draws are
// consumed even for ideal readout so streams with and without a confusion
// table stay aligned for equal seeds.
BasisRecords sample_basis_records(const DensityMatrix& rho, std::size_t n_shots,
                                  const NoiseModel& noise, std::uint64_t seed);

OutcomeDataset outcomes_from_records(const BasisRecords& r, PovmKind kind,
                                     OutcomeDataset::Provenance provenance);

OutcomeDataset sample_dataset(const DensityMatrix& rho, const PovmSet& p, std::size_t n_shots,
                              const NoiseModel& noise, std::uint64_t seed);

ProbDist empirical_distribution(const OutcomeDataset& d);

ProbDist coarse_grain_p6_to_p4(const ProbDist& dist);
OutcomeDataset coarse_grain_p6_to_p4(const OutcomeDataset& d);

// Bitstring histograms keyed by the joint basis setting (base-3 code, qubit 0
// most significant).
struct BasisHistograms {
    int n_qubits = 0;
    std::map<std::uint32_t, std::vector<double>> hist;  // counts or probabilities, length 2^N
    std::map<std::uint32_t, std::size_t> shots;
    std::size_t total_shots = 0;
};

std::uint32_t encode_bases(std::span<const std::uint8_t> bases);
void decode_bases(std::uint32_t code, std::span<std::uint8_t> bases);

BasisHistograms basis_histograms(const BasisRecords& r);

// Applies the inverse tensor-product confusion matrix to every
// basis-conditioned histogram, clips negatives to zero and renormalizes.
// Throws if any per-qubit confusion matrix has |det| < 1e-9.
BasisHistograms bayes_correct(const BasisHistograms& h, const std::vector<CMatrix>& confusion);

// Pools basis-conditioned bit distributions into a POVM outcome distribution,
// weighting each basis setting by its shot share.
ProbDist povm_dist_from_histograms(const BasisHistograms& h, PovmKind kind);

// Draws shots[combo] bitstrings from each corrected histogram; used to turn
// corrected statistics back into a trainable dataset.
BasisRecords resample_records(const BasisHistograms& h, std::uint64_t seed);

}  // namespace qgt
