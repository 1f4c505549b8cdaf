#include "qgt/povm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "qgt/rng.hpp"

namespace qgt {

namespace {

CMatrix ket_bra(cplx a0, cplx a1) {
    CMatrix m(2, 2);
    m.at(0, 0) = a0 * std::conj(a0);
    m.at(0, 1) = a0 * std::conj(a1);
    m.at(1, 0) = a1 * std::conj(a0);
    m.at(1, 1) = a1 * std::conj(a1);
    return m;
}

// y[..., b, ...] = sum_m mat(b, m) x[..., m, ...] along the given axis of a
// row-major tensor. shape[axis] is replaced by mat.rows.
std::vector<cplx> mode_apply(const std::vector<cplx>& x, std::vector<std::size_t>& shape,
                             std::size_t axis, const CMatrix& mat) {
    const std::size_t in_dim = shape[axis];
    const std::size_t out_dim = mat.rows;
    if (mat.cols != in_dim) throw std::invalid_argument("mode_apply: dimension mismatch");
    std::size_t outer = 1, inner = 1;
    for (std::size_t k = 0; k < axis; ++k) outer *= shape[k];
    for (std::size_t k = axis + 1; k < shape.size(); ++k) inner *= shape[k];

    std::vector<cplx> y(outer * out_dim * inner, cplx(0.0));
    for (std::size_t o = 0; o < outer; ++o) {
        const cplx* xo = x.data() + o * in_dim * inner;
        cplx* yo = y.data() + o * out_dim * inner;
        for (std::size_t b = 0; b < out_dim; ++b) {
            cplx* yrow = yo + b * inner;
            for (std::size_t m = 0; m < in_dim; ++m) {
                const cplx w = mat.at(b, m);
                if (w == cplx(0.0)) continue;
                const cplx* xrow = xo + m * inner;
                for (std::size_t i = 0; i < inner; ++i) yrow[i] += w * xrow[i];
            }
        }
    }
    shape[axis] = out_dim;
    return y;
}

// spread[x]: bits of x moved to base-4 digit positions (bit p -> digit p).
std::vector<std::size_t> make_spread_table(int n_qubits) {
    const std::size_t dim = std::size_t(1) << n_qubits;
    std::vector<std::size_t> spread(dim);
    for (std::size_t x = 0; x < dim; ++x) {
        std::size_t s = 0;
        for (int p = 0; p < n_qubits; ++p)
            if (x & (std::size_t(1) << p)) s |= std::size_t(1) << (2 * p);
        spread[x] = s;
    }
    return spread;
}

std::uint8_t outcome_of(PovmKind kind, std::uint8_t basis, std::uint8_t bit) {
    if (bit == 0) return basis;  // z->0, x->1, y->2
    return kind == PovmKind::Pauli4 ? std::uint8_t(3) : std::uint8_t(3 + basis);
}

}  // namespace

PovmSet make_povm(PovmKind kind) {
    const double third = 1.0 / 3.0;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const CMatrix z_plus = ket_bra(1.0, 0.0);
    const CMatrix z_minus = ket_bra(0.0, 1.0);
    const CMatrix x_plus = ket_bra(inv_sqrt2, inv_sqrt2);
    const CMatrix x_minus = ket_bra(inv_sqrt2, -inv_sqrt2);
    const CMatrix y_plus = ket_bra(inv_sqrt2, cplx(0.0, inv_sqrt2));
    const CMatrix y_minus = ket_bra(inv_sqrt2, cplx(0.0, -inv_sqrt2));

    PovmSet p;
    p.kind = kind;
    if (kind == PovmKind::Pauli4) {
        p.elements = {z_plus * cplx(third), x_plus * cplx(third), y_plus * cplx(third),
                      (z_minus + x_minus + y_minus) * cplx(third)};
    } else {
        p.elements = {z_plus * cplx(third),  x_plus * cplx(third),  y_plus * cplx(third),
                      z_minus * cplx(third), x_minus * cplx(third), y_minus * cplx(third)};
    }

    const int k = p.alphabet();
    p.overlap = CMatrix(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            p.overlap.at(a, b) = (p.elements[a] * p.elements[b]).trace().real();
    if (kind == PovmKind::Pauli4) p.overlap_inverse = inverse(p.overlap);
    return p;
}

ProbDist povm_distribution(const DensityMatrix& rho, const PovmSet& p) {
    const int n = rho.n_qubits;
    const int k = p.alphabet();
    const std::size_t dim = std::size_t(1) << n;
    if (rho.matrix.rows != dim) throw std::invalid_argument("povm_distribution: dim mismatch");

    // E(a, 2i+j) = M^(a)[i][j]; contracting every axis of the pairs tensor
    // X[m_1..m_N] = rho[j][i] (m_q = 2 i_q + j_q) yields P(a) = Tr(M^(a) rho).
    CMatrix e(k, 4);
    for (int a = 0; a < k; ++a)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) e.at(a, 2 * i + j) = p.elements[a].at(i, j);

    const auto spread = make_spread_table(n);
    std::vector<cplx> tensor(checked_pow(4, n, std::size_t(10'000'000)));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            tensor[2 * spread[i] + spread[j]] = rho.matrix.at(j, i);

    std::vector<std::size_t> shape(n, 4);
    for (int q = 0; q < n; ++q) tensor = mode_apply(tensor, shape, q, e);

    ProbDist dist(n, k);
    for (std::size_t idx = 0; idx < tensor.size(); ++idx) {
        double v = tensor[idx].real();
        if (v < 0.0) {
            if (v < -1e-10) throw std::runtime_error("povm_distribution: negative probability");
            v = 0.0;
        }
        dist.values[idx] = v;
    }
    return dist;
}

CMatrix povm_weighted_sum(const std::vector<double>& weights, const PovmSet& p, int n_qubits) {
    const int k = p.alphabet();
    const std::size_t expected = checked_pow(k, n_qubits, std::size_t(10'000'000));
    if (weights.size() != expected)
        throw std::invalid_argument("povm_weighted_sum: weight vector length mismatch");

    // F(2i+j, a) = M^(a)[i][j]; applying F along every axis assembles
    // sum_a w(a) M^(a) into the pairs tensor Y[m_1..m_N] = out[i][j].
    CMatrix f(4, k);
    for (int a = 0; a < k; ++a)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) f.at(2 * i + j, a) = p.elements[a].at(i, j);

    std::vector<cplx> tensor(weights.begin(), weights.end());
    std::vector<std::size_t> shape(n_qubits, static_cast<std::size_t>(k));
    for (int q = 0; q < n_qubits; ++q) tensor = mode_apply(tensor, shape, q, f);

    const std::size_t dim = std::size_t(1) << n_qubits;
    const auto spread = make_spread_table(n_qubits);
    CMatrix out(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            out.at(i, j) = tensor[2 * spread[i] + spread[j]];
    return out;
}

DensityMatrix reconstruct_linear_inversion(const ProbDist& dist, const PovmSet& p) {
    if (p.kind != PovmKind::Pauli4 || !p.overlap_inverse)
        throw std::invalid_argument(
            "reconstruct_linear_inversion: pauli6 overlap is singular; apply "
            "coarse_grain_p6_to_p4 first");
    if (dist.alphabet != p.alphabet())
        throw std::invalid_argument("reconstruct_linear_inversion: alphabet mismatch");
    const int n = dist.n_qubits;

    std::vector<cplx> tensor(dist.values.begin(), dist.values.end());
    std::vector<std::size_t> shape(n, static_cast<std::size_t>(dist.alphabet));
    for (int q = 0; q < n; ++q) tensor = mode_apply(tensor, shape, q, *p.overlap_inverse);

    std::vector<double> weights(tensor.size());
    for (std::size_t i = 0; i < tensor.size(); ++i) weights[i] = tensor[i].real();
    CMatrix m = povm_weighted_sum(weights, p, n);

    // Hermitize and pin the trace; both drifts are pure round-off for a
    // normalized input distribution.
    CMatrix herm(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            herm.at(i, j) = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));
    const double tr = herm.trace().real();
    if (std::abs(tr - 1.0) > 1e-9)
        throw std::runtime_error("reconstruct_linear_inversion: trace " + std::to_string(tr));
    herm *= cplx(1.0 / tr);

    DensityMatrix rho;
    rho.n_qubits = n;
    rho.matrix = std::move(herm);
    rho.psd_checked = false;
    return rho;
}

std::uint32_t encode_bases(std::span<const std::uint8_t> bases) {
    std::uint32_t code = 0;
    for (std::uint8_t b : bases) code = code * 3 + b;
    return code;
}

void decode_bases(std::uint32_t code, std::span<std::uint8_t> bases) {
    for (std::size_t q = bases.size(); q-- > 0;) {
        bases[q] = static_cast<std::uint8_t>(code % 3);
        code /= 3;
    }
}

BasisRecords sample_basis_records(const DensityMatrix& rho, std::size_t n_shots,
                                  const NoiseModel& noise, std::uint64_t seed) {
    const int n = rho.n_qubits;
    if (n_shots < 1) throw std::invalid_argument("sample_basis_records: n_shots must be >= 1");
    noise.validate(n);
    const bool has_confusion = !noise.confusion.empty();

    std::mt19937_64 rng(seed);
    BasisRecords rec;
    rec.n_qubits = n;
    rec.bases.reserve(n_shots * n);
    rec.bits.reserve(n_shots * n);

    // Rotated joint distributions are cached per basis setting as CDFs.
    std::unordered_map<std::uint32_t, std::vector<double>> cdf_cache;
    std::vector<std::uint8_t> bases(n);
    std::vector<Basis> basis_enums(n);

    for (std::size_t shot = 0; shot < n_shots; ++shot) {
        for (int q = 0; q < n; ++q) bases[q] = static_cast<std::uint8_t>(uniform_index(rng, 3));
        const std::uint32_t code = encode_bases(bases);
        auto it = cdf_cache.find(code);
        if (it == cdf_cache.end()) {
            for (int q = 0; q < n; ++q) basis_enums[q] = static_cast<Basis>(bases[q]);
            ProbDist d = rotated_z_distribution(rho, basis_enums);
            std::vector<double> cdf(d.values.size());
            double acc = 0.0;
            for (std::size_t i = 0; i < d.values.size(); ++i) {
                acc += d.values[i];
                cdf[i] = acc;
            }
            cdf.back() = 1.0;
            it = cdf_cache.emplace(code, std::move(cdf)).first;
        }
        const std::vector<double>& cdf = it->second;
        const double u = uniform_double(rng);
        const std::size_t word = static_cast<std::size_t>(
            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());

        for (int q = 0; q < n; ++q) {
            std::uint8_t bit = (word >> (n - 1 - q)) & 1;
            const double u_flip = uniform_double(rng);  // always consumed
            if (has_confusion) {
                const CMatrix& c = noise.confusion[q];
                const double p_flip = c.at(1 - bit, bit).real();
                if (u_flip < p_flip) bit ^= 1;
            }
            rec.bases.push_back(bases[q]);
            rec.bits.push_back(bit);
        }
    }
    return rec;
}

OutcomeDataset outcomes_from_records(const BasisRecords& r, PovmKind kind,
                                     OutcomeDataset::Provenance provenance) {
    OutcomeDataset d;
    d.n_qubits = r.n_qubits;
    d.alphabet = povm_alphabet(kind);
    d.provenance = provenance;
    d.provenance.kind = kind;
    d.shots.resize(r.bits.size());
    for (std::size_t i = 0; i < r.bits.size(); ++i)
        d.shots[i] = outcome_of(kind, r.bases[i], r.bits[i]);
    return d;
}

OutcomeDataset sample_dataset(const DensityMatrix& rho, const PovmSet& p, std::size_t n_shots,
                              const NoiseModel& noise, std::uint64_t seed) {
    BasisRecords rec = sample_basis_records(rho, n_shots, noise, seed);
    OutcomeDataset::Provenance prov;
    prov.seed = seed;
    prov.depolarized = noise.depolarizing_p > 0.0;
    prov.readout_noise = noise.has_readout_noise();
    return outcomes_from_records(rec, p.kind, prov);
}

ProbDist empirical_distribution(const OutcomeDataset& d) {
    const std::size_t n = d.n_shots();
    if (n == 0) throw std::invalid_argument("empirical_distribution: empty dataset");
    ProbDist dist(d.n_qubits, d.alphabet);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) dist.values[outcome_index(d.shot(i), d.alphabet)] += w;
    return dist;
}

ProbDist coarse_grain_p6_to_p4(const ProbDist& dist) {
    if (dist.alphabet != 6)
        throw std::invalid_argument("coarse_grain_p6_to_p4: alphabet must be 6");
    ProbDist out(dist.n_qubits, 4);
    const int n = dist.n_qubits;
    std::vector<std::uint8_t> sym(n);
    for (std::size_t idx = 0; idx < dist.values.size(); ++idx) {
        index_to_outcome(idx, 6, sym);
        std::size_t target = 0;
        for (int q = 0; q < n; ++q) target = target * 4 + std::min<std::uint8_t>(sym[q], 3);
        out.values[target] += dist.values[idx];
    }
    return out;
}

OutcomeDataset coarse_grain_p6_to_p4(const OutcomeDataset& d) {
    if (d.alphabet != 6) throw std::invalid_argument("coarse_grain_p6_to_p4: alphabet must be 6");
    OutcomeDataset out = d;
    out.alphabet = 4;
    out.provenance.kind = PovmKind::Pauli4;
    for (std::uint8_t& s : out.shots) s = std::min<std::uint8_t>(s, 3);
    return out;
}

BasisHistograms basis_histograms(const BasisRecords& r) {
    BasisHistograms h;
    h.n_qubits = r.n_qubits;
    h.total_shots = r.n_shots();
    const std::size_t dim = std::size_t(1) << r.n_qubits;
    for (std::size_t shot = 0; shot < h.total_shots; ++shot) {
        const std::uint8_t* bases = r.bases.data() + shot * r.n_qubits;
        const std::uint8_t* bits = r.bits.data() + shot * r.n_qubits;
        const std::uint32_t code = encode_bases({bases, static_cast<std::size_t>(r.n_qubits)});
        std::size_t word = 0;
        for (int q = 0; q < r.n_qubits; ++q) word = (word << 1) | bits[q];
        auto [it, fresh] = h.hist.try_emplace(code, std::vector<double>(dim, 0.0));
        it->second[word] += 1.0;
        h.shots[code] += 1;
    }
    return h;
}

BasisHistograms bayes_correct(const BasisHistograms& h, const std::vector<CMatrix>& confusion) {
    if (confusion.size() != static_cast<std::size_t>(h.n_qubits))
        throw std::invalid_argument("bayes_correct: confusion matrix count mismatch");
    std::vector<CMatrix> inv;
    inv.reserve(confusion.size());
    for (const CMatrix& c : confusion) {
        if (c.rows != 2 || c.cols != 2)
            throw std::invalid_argument("bayes_correct: confusion matrices must be 2x2");
        const cplx det = c.at(0, 0) * c.at(1, 1) - c.at(0, 1) * c.at(1, 0);
        if (std::abs(det) < 1e-9)
            throw std::runtime_error("bayes_correct: confusion matrix is singular");
        inv.push_back(inverse(c));
    }

    BasisHistograms out;
    out.n_qubits = h.n_qubits;
    out.shots = h.shots;
    out.total_shots = h.total_shots;
    for (const auto& [code, counts] : h.hist) {
        double total = 0.0;
        for (double v : counts) total += v;
        if (total <= 0.0) {
            out.hist.emplace(code, counts);
            continue;
        }
        std::vector<cplx> tensor(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) tensor[i] = counts[i] / total;
        std::vector<std::size_t> shape(h.n_qubits, 2);
        for (int q = 0; q < h.n_qubits; ++q) tensor = mode_apply(tensor, shape, q, inv[q]);

        std::vector<double> corrected(tensor.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            corrected[i] = std::max(tensor[i].real(), 0.0);
            sum += corrected[i];
        }
        if (sum <= 0.0) throw std::runtime_error("bayes_correct: correction emptied a histogram");
        for (double& v : corrected) v /= sum;
        out.hist.emplace(code, std::move(corrected));
    }
    return out;
}

ProbDist povm_dist_from_histograms(const BasisHistograms& h, PovmKind kind) {
    if (h.total_shots == 0)
        throw std::invalid_argument("povm_dist_from_histograms: no shots recorded");
    const int n = h.n_qubits;
    ProbDist dist(n, povm_alphabet(kind));
    std::vector<std::uint8_t> bases(n), outcome(n);
    for (const auto& [code, values] : h.hist) {
        const double weight =
            static_cast<double>(h.shots.at(code)) / static_cast<double>(h.total_shots);
        double total = 0.0;
        for (double v : values) total += v;
        if (total <= 0.0) continue;
        decode_bases(code, bases);
        for (std::size_t word = 0; word < values.size(); ++word) {
            if (values[word] == 0.0) continue;
            for (int q = 0; q < n; ++q)
                outcome[q] = outcome_of(kind, bases[q], (word >> (n - 1 - q)) & 1);
            dist.values[outcome_index(outcome, dist.alphabet)] += weight * values[word] / total;
        }
    }
    return dist;
}

BasisRecords resample_records(const BasisHistograms& h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BasisRecords rec;
    rec.n_qubits = h.n_qubits;
    const int n = h.n_qubits;
    std::vector<std::uint8_t> bases(n);
    for (const auto& [code, values] : h.hist) {
        decode_bases(code, bases);
        std::vector<double> cdf(values.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            acc += values[i];
            cdf[i] = acc;
        }
        if (acc <= 0.0) continue;
        for (double& v : cdf) v /= acc;
        cdf.back() = 1.0;
        const std::size_t count = h.shots.at(code);
        for (std::size_t s = 0; s < count; ++s) {
            const double u = uniform_double(rng);
            const std::size_t word = static_cast<std::size_t>(
                std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            for (int q = 0; q < n; ++q) {
                rec.bases.push_back(bases[q]);
                rec.bits.push_back((word >> (n - 1 - q)) & 1);
            }
        }
    }
    return rec;
}

}  // namespace qgt
