#include "qgt/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qgt {

int povm_alphabet(PovmKind kind) { return kind == PovmKind::Pauli4 ? 4 : 6; }

std::string povm_name(PovmKind kind) { return kind == PovmKind::Pauli4 ? "pauli4" : "pauli6"; }

PovmKind povm_from_name(const std::string& name) {
    if (name == "pauli4") return PovmKind::Pauli4;
    if (name == "pauli6") return PovmKind::Pauli6;
    throw std::invalid_argument("unknown POVM kind: " + name);
}

std::size_t checked_pow(std::size_t base, int exp, std::size_t limit) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > limit / base) throw std::invalid_argument("alphabet^n_qubits exceeds size guard");
        r *= base;
    }
    return r;
}

ProbDist::ProbDist(int n, int k) : n_qubits(n), alphabet(k) {
    values.assign(checked_pow(static_cast<std::size_t>(k), n, std::size_t(10'000'000)), 0.0);
}

void ProbDist::validate() const {
    double sum = 0.0;
    for (double v : values) {
        if (!(v >= 0.0)) throw std::invalid_argument("ProbDist: negative or NaN probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("ProbDist: probabilities sum to " + std::to_string(sum));
}

std::size_t outcome_index(std::span<const std::uint8_t> outcome, int alphabet) {
    std::size_t idx = 0;
    for (std::uint8_t s : outcome) {
        if (s >= alphabet) throw std::invalid_argument("outcome symbol out of alphabet range");
        idx = idx * static_cast<std::size_t>(alphabet) + s;
    }
    return idx;
}

void index_to_outcome(std::size_t index, int alphabet, std::span<std::uint8_t> out) {
    for (std::size_t q = out.size(); q-- > 0;) {
        out[q] = static_cast<std::uint8_t>(index % static_cast<std::size_t>(alphabet));
        index /= static_cast<std::size_t>(alphabet);
    }
}

double total_variation(const ProbDist& p, const ProbDist& q) {
    if (p.values.size() != q.values.size())
        throw std::invalid_argument("total_variation: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) s += std::abs(p.values[i] - q.values[i]);
    return 0.5 * s;
}

void OutcomeDataset::append(std::span<const std::uint8_t> outcome) {
    if (outcome.size() != static_cast<std::size_t>(n_qubits))
        throw std::invalid_argument("OutcomeDataset: shot length mismatch");
    shots.insert(shots.end(), outcome.begin(), outcome.end());
}

void OutcomeDataset::validate() const {
    if (n_qubits <= 0) throw std::invalid_argument("OutcomeDataset: n_qubits must be positive");
    if (shots.size() % static_cast<std::size_t>(n_qubits) != 0)
        throw std::invalid_argument("OutcomeDataset: ragged shot array");
    for (std::uint8_t s : shots)
        if (s >= alphabet) throw std::invalid_argument("OutcomeDataset: symbol out of range");
}

OutcomeDataset OutcomeDataset::subset(std::span<const std::size_t> indices) const {
    OutcomeDataset d;
    d.n_qubits = n_qubits;
    d.alphabet = alphabet;
    d.provenance = provenance;
    d.shots.reserve(indices.size() * static_cast<std::size_t>(n_qubits));
    for (std::size_t i : indices) {
        if (i >= n_shots()) throw std::out_of_range("OutcomeDataset::subset: index out of range");
        auto s = shot(i);
        d.shots.insert(d.shots.end(), s.begin(), s.end());
    }
    return d;
}

std::uint64_t dataset_hash(const OutcomeDataset& d) {
    // FNV-1a over the header fields and shot bytes.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(d.n_qubits));
    mix(static_cast<std::uint64_t>(d.alphabet));
    mix(d.provenance.seed);
    for (std::uint8_t b : d.shots) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void save_dataset(const OutcomeDataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "#povm=" << povm_name(d.provenance.kind) << " qubits=" << d.n_qubits
        << " seed=" << d.provenance.seed << "\n";
    const std::size_t n = d.n_shots();
    for (std::size_t i = 0; i < n; ++i) {
        auto s = d.shot(i);
        for (std::size_t q = 0; q < s.size(); ++q) {
            if (q) out << ' ';
            out << static_cast<int>(s[q]);
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

OutcomeDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty dataset file: " + path);

    OutcomeDataset d;
    {
        std::string povm;
        int qubits = 0;
        std::uint64_t seed = 0;
        std::istringstream hs(header);
        std::string tok;
        bool saw_povm = false, saw_qubits = false, saw_seed = false;
        while (hs >> tok) {
            if (tok.rfind("#povm=", 0) == 0) {
                povm = tok.substr(6);
                saw_povm = true;
            } else if (tok.rfind("qubits=", 0) == 0) {
                qubits = std::stoi(tok.substr(7));
                saw_qubits = true;
            } else if (tok.rfind("seed=", 0) == 0) {
                seed = std::stoull(tok.substr(5));
                saw_seed = true;
            }
        }
        if (!saw_povm || !saw_qubits || !saw_seed)
            throw std::runtime_error("malformed dataset header: " + header);
        d.provenance.kind = povm_from_name(povm);
        d.provenance.seed = seed;
        d.n_qubits = qubits;
        d.alphabet = povm_alphabet(d.provenance.kind);
    }

    std::string line;
    std::vector<std::uint8_t> row;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        row.clear();
        int sym;
        while (ls >> sym) {
            if (sym < 0 || sym >= d.alphabet)
                throw std::runtime_error("dataset symbol out of range in: " + line);
            row.push_back(static_cast<std::uint8_t>(sym));
        }
        if (row.size() != static_cast<std::size_t>(d.n_qubits))
            throw std::runtime_error("dataset shot has wrong length in: " + line);
        d.shots.insert(d.shots.end(), row.begin(), row.end());
    }
    return d;
}

}  // namespace qgt
