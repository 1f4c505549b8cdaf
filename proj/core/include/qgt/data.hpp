#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qgt {

enum class PovmKind { Pauli4, Pauli6 };

int povm_alphabet(PovmKind kind);
std::string povm_name(PovmKind kind);
PovmKind povm_from_name(const std::string& name);

// Joint outcome distribution over length-K^N base-K strings. Index of the
// outcome string (a_0, ..., a_{N-1}) is sum a_q * K^(N-1-q), qubit 0 most
// significant, matching the basis-state index convention.
struct ProbDist {
    int n_qubits = 0;
    int alphabet = 0;
    std::vector<double> values;

    ProbDist() = default;
    ProbDist(int n, int k);

    std::size_t size() const { return values.size(); }
    // Validates nonnegativity and normalization (1e-9).
    void validate() const;
};

std::size_t checked_pow(std::size_t base, int exp, std::size_t limit);
std::size_t outcome_index(std::span<const std::uint8_t> outcome, int alphabet);
void index_to_outcome(std::size_t index, int alphabet, std::span<std::uint8_t> out);

double total_variation(const ProbDist& p, const ProbDist& q);

// Ordered shot records; one length-N outcome string per shot.
struct OutcomeDataset {
    int n_qubits = 0;
    int alphabet = 0;
    std::vector<std::uint8_t> shots;  // shot-major, n_shots * n_qubits symbols

    struct Provenance {
        PovmKind kind = PovmKind::Pauli4;
        std::uint64_t seed = 0;
        bool depolarized = false;
        bool readout_noise = false;
    } provenance;

    std::size_t n_shots() const {
        return n_qubits == 0 ? 0 : shots.size() / static_cast<std::size_t>(n_qubits);
    }
    std::span<const std::uint8_t> shot(std::size_t i) const {
        return {shots.data() + i * static_cast<std::size_t>(n_qubits),
                static_cast<std::size_t>(n_qubits)};
    }
    void append(std::span<const std::uint8_t> outcome);
    // Symbol range and shot length checks.
    void validate() const;

    // Subset copy in the given order (indices into shots).
    OutcomeDataset subset(std::span<const std::size_t> indices) const;
};

std::uint64_t dataset_hash(const OutcomeDataset& d);

// Line-oriented text format:
//   #povm=pauli4 qubits=2 seed=1
//   0 3 1 2
// Round-trips exactly.
void save_dataset(const OutcomeDataset& d, const std::string& path);
OutcomeDataset load_dataset(const std::string& path);

}  // namespace qgt
