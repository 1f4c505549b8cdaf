#include "qgt/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "qgt/rng.hpp"

namespace qgt {

namespace {

struct Layout {
    int h = 0, k = 0;
    std::size_t embed = 0, u_z = 0, u_r = 0, u_c = 0;
    std::size_t b_z = 0, b_r = 0, b_c = 0, w_out = 0, b_out = 0, total = 0;

    Layout(int hidden, int alphabet) : h(hidden), k(alphabet) {
        const std::size_t hh = static_cast<std::size_t>(h) * h;
        std::size_t off = 0;
        embed = off, off += static_cast<std::size_t>(k + 1) * 3 * h;
        u_z = off, off += hh;
        u_r = off, off += hh;
        u_c = off, off += hh;
        b_z = off, off += h;
        b_r = off, off += h;
        b_c = off, off += h;
        w_out = off, off += static_cast<std::size_t>(k) * h;
        b_out = off, off += k;
        total = off;
    }
    // Row of per-token gate contributions, blocks [z | r | c].
    std::size_t embed_row(int token) const {
        return embed + static_cast<std::size_t>(token) * 3 * h;
    }
};

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void matvec(const double* m, const double* v, double* out, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* row = m + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) acc += row[j] * v[j];
        out[i] += acc;
    }
}

void matvec_t(const double* m, const double* v, double* out, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const double w = v[i];
        if (w == 0.0) continue;
        const double* row = m + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) out[j] += w * row[j];
    }
}

void outer_acc(double* m, const double* a, const double* b, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const double w = a[i];
        if (w == 0.0) continue;
        double* row = m + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) row[j] += w * b[j];
    }
}

// One recurrent step: gates, new hidden state, site distribution.
void cell_step(const double* theta, const Layout& lay, const double* h_prev, int token,
               double* z, double* r, double* c, double* h_new, double* p) {
    const int h = lay.h, k = lay.k;
    const double* erow = theta + lay.embed_row(token);
    for (int i = 0; i < h; ++i) z[i] = erow[i] + theta[lay.b_z + i];
    for (int i = 0; i < h; ++i) r[i] = erow[h + i] + theta[lay.b_r + i];
    matvec(theta + lay.u_z, h_prev, z, h, h);
    matvec(theta + lay.u_r, h_prev, r, h, h);
    for (int i = 0; i < h; ++i) z[i] = sigmoid(z[i]);
    for (int i = 0; i < h; ++i) r[i] = sigmoid(r[i]);

    for (int i = 0; i < h; ++i) c[i] = erow[2 * h + i] + theta[lay.b_c + i];
    // candidate sees the reset-gated hidden state
    {
        double g[512];
        for (int i = 0; i < h; ++i) g[i] = r[i] * h_prev[i];
        matvec(theta + lay.u_c, g, c, h, h);
    }
    for (int i = 0; i < h; ++i) c[i] = std::tanh(c[i]);
    for (int i = 0; i < h; ++i) h_new[i] = (1.0 - z[i]) * h_prev[i] + z[i] * c[i];

    double max_logit = -1e300;
    for (int a = 0; a < k; ++a) {
        double acc = theta[lay.b_out + a];
        const double* row = theta + lay.w_out + static_cast<std::size_t>(a) * h;
        for (int j = 0; j < h; ++j) acc += row[j] * h_new[j];
        p[a] = acc;
        max_logit = std::max(max_logit, acc);
    }
    double norm = 0.0;
    for (int a = 0; a < k; ++a) {
        p[a] = std::exp(p[a] - max_logit);
        norm += p[a];
    }
    for (int a = 0; a < k; ++a) p[a] /= norm;
}

// Per-sequence tape for backpropagation through time.
struct Tape {
    std::vector<double> h;        // (L+1) x H, h[0] = 0
    std::vector<double> z, r, c;  // L x H
    std::vector<double> p;        // L x K

    void resize(int len, int hidden, int alphabet) {
        h.assign(static_cast<std::size_t>(len + 1) * hidden, 0.0);
        z.resize(static_cast<std::size_t>(len) * hidden);
        r.resize(static_cast<std::size_t>(len) * hidden);
        c.resize(static_cast<std::size_t>(len) * hidden);
        p.resize(static_cast<std::size_t>(len) * alphabet);
    }
};

double forward_tape(const double* theta, const Layout& lay, std::span<const std::uint8_t> seq,
                    Tape& tape) {
    const int h = lay.h, k = lay.k;
    const int len = static_cast<int>(seq.size());
    tape.resize(len, h, k);
    double nll = 0.0;
    for (int m = 0; m < len; ++m) {
        if (seq[m] >= k) throw std::invalid_argument("forward: symbol out of alphabet range");
        const int token = m == 0 ? k : seq[m - 1];  // start token is index K
        cell_step(theta, lay, tape.h.data() + static_cast<std::size_t>(m) * h, token,
                  tape.z.data() + static_cast<std::size_t>(m) * h,
                  tape.r.data() + static_cast<std::size_t>(m) * h,
                  tape.c.data() + static_cast<std::size_t>(m) * h,
                  tape.h.data() + static_cast<std::size_t>(m + 1) * h,
                  tape.p.data() + static_cast<std::size_t>(m) * k);
        nll -= std::log(tape.p[static_cast<std::size_t>(m) * k + seq[m]]);
    }
    return nll;
}

void backward_tape(const double* theta, const Layout& lay, std::span<const std::uint8_t> seq,
                   const Tape& tape, double scale, double* grad) {
    const int h = lay.h, k = lay.k;
    const int len = static_cast<int>(seq.size());
    std::vector<double> dh(h, 0.0), dh_prev(h), buf(h), dgate(h), g(h);

    for (int m = len - 1; m >= 0; --m) {
        const double* h_prev = tape.h.data() + static_cast<std::size_t>(m) * h;
        const double* h_new = tape.h.data() + static_cast<std::size_t>(m + 1) * h;
        const double* z = tape.z.data() + static_cast<std::size_t>(m) * h;
        const double* r = tape.r.data() + static_cast<std::size_t>(m) * h;
        const double* c = tape.c.data() + static_cast<std::size_t>(m) * h;
        const double* p = tape.p.data() + static_cast<std::size_t>(m) * k;
        const int token = m == 0 ? k : seq[m - 1];

        // softmax + NLL: dlogit_a = p_a - [a == seq[m]]
        for (int a = 0; a < k; ++a) {
            const double dl = scale * (p[a] - (a == seq[m] ? 1.0 : 0.0));
            grad[lay.b_out + a] += dl;
            double* wrow = grad + lay.w_out + static_cast<std::size_t>(a) * h;
            const double* orow = theta + lay.w_out + static_cast<std::size_t>(a) * h;
            for (int j = 0; j < h; ++j) {
                wrow[j] += dl * h_new[j];
                dh[j] += dl * orow[j];
            }
        }

        double* erow = grad + lay.embed_row(token);
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);

        // h_new = (1-z) h_prev + z c
        for (int i = 0; i < h; ++i) {
            dh_prev[i] += dh[i] * (1.0 - z[i]);
            g[i] = r[i] * h_prev[i];
        }
        // candidate branch
        for (int i = 0; i < h; ++i) dgate[i] = dh[i] * z[i] * (1.0 - c[i] * c[i]);
        for (int i = 0; i < h; ++i) {
            erow[2 * h + i] += dgate[i];
            grad[lay.b_c + i] += dgate[i];
        }
        outer_acc(grad + lay.u_c, dgate.data(), g.data(), h, h);
        std::fill(buf.begin(), buf.end(), 0.0);
        matvec_t(theta + lay.u_c, dgate.data(), buf.data(), h, h);  // buf = dg
        for (int i = 0; i < h; ++i) dh_prev[i] += buf[i] * r[i];
        // reset gate
        for (int i = 0; i < h; ++i) dgate[i] = buf[i] * h_prev[i] * r[i] * (1.0 - r[i]);
        for (int i = 0; i < h; ++i) {
            erow[h + i] += dgate[i];
            grad[lay.b_r + i] += dgate[i];
        }
        outer_acc(grad + lay.u_r, dgate.data(), h_prev, h, h);
        matvec_t(theta + lay.u_r, dgate.data(), dh_prev.data(), h, h);
        // update gate
        for (int i = 0; i < h; ++i) dgate[i] = dh[i] * (c[i] - h_prev[i]) * z[i] * (1.0 - z[i]);
        for (int i = 0; i < h; ++i) {
            erow[i] += dgate[i];
            grad[lay.b_z + i] += dgate[i];
        }
        outer_acc(grad + lay.u_z, dgate.data(), h_prev, h, h);
        matvec_t(theta + lay.u_z, dgate.data(), dh_prev.data(), h, h);

        std::swap(dh, dh_prev);
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    }
}

}  // namespace

std::size_t RnnParams::param_count(int hidden, int alphabet) {
    return Layout(hidden, alphabet).total;
}

RnnParams RnnParams::zeros(int hidden, int alphabet) {
    if (hidden < 1 || hidden > 512) throw std::invalid_argument("hidden size out of range");
    if (alphabet < 2) throw std::invalid_argument("alphabet must be >= 2");
    RnnParams p;
    p.hidden = hidden;
    p.alphabet = alphabet;
    p.theta.assign(param_count(hidden, alphabet), 0.0);
    return p;
}

void TrainingConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
    if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("adam betas must lie in (0,1)");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    if (hidden_size < 1 || hidden_size > 512)
        throw std::invalid_argument("hidden_size out of range");
    if (adam_eps <= 0.0) throw std::invalid_argument("adam_eps must be > 0");
}

namespace {

void check_params(const RnnParams& params) {
    if (params.hidden < 1 || params.hidden > 512 || params.alphabet < 2 ||
        params.theta.size() != RnnParams::param_count(params.hidden, params.alphabet))
        throw std::invalid_argument("RnnParams: inconsistent shape");
}

}  // namespace

ForwardResult forward(const RnnParams& params, std::span<const std::uint8_t> sequence) {
    check_params(params);
    const Layout lay(params.hidden, params.alphabet);
    Tape tape;
    ForwardResult out;
    out.nll = forward_tape(params.theta.data(), lay, sequence, tape);
    out.sites.n_sites = static_cast<int>(sequence.size());
    out.sites.alphabet = params.alphabet;
    out.sites.probs = std::move(tape.p);
    return out;
}

GradientResult gradient(const RnnParams& params,
                        const std::vector<std::span<const std::uint8_t>>& batch) {
    if (batch.empty()) throw std::invalid_argument("gradient: empty batch");
    check_params(params);
    const Layout lay(params.hidden, params.alphabet);
    GradientResult out;
    out.grad.assign(params.theta.size(), 0.0);
    const double scale = 1.0 / static_cast<double>(batch.size());
    Tape tape;

    // Identical sequences contribute identical terms, so the batch collapses
    // to weighted unique sequences. With K^N distinct outcome strings this
    // turns full-dataset gradients from O(shots) into O(K^N).
    bool packable = true;
    for (const auto& seq : batch) {
        if (seq.size() > 8) packable = false;
        for (std::uint8_t s : seq)
            if (s >= 127) packable = false;
    }
    if (packable && batch.size() >= 64) {
        std::unordered_map<std::uint64_t, std::pair<std::size_t, double>> unique;
        unique.reserve(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::uint64_t key = batch[i].size();
            for (std::uint8_t s : batch[i]) key = (key << 7) | (s + 1);
            auto [it, fresh] = unique.try_emplace(key, std::make_pair(i, 0.0));
            it->second.second += scale;
        }
        if (unique.size() * 2 <= batch.size()) {
            // deterministic order: sort by first occurrence
            std::vector<std::pair<std::size_t, double>> groups;
            groups.reserve(unique.size());
            for (const auto& [key, group] : unique) groups.push_back(group);
            std::sort(groups.begin(), groups.end());
            for (const auto& [first, weight] : groups) {
                out.mean_nll +=
                    weight * forward_tape(params.theta.data(), lay, batch[first], tape);
                backward_tape(params.theta.data(), lay, batch[first], tape, weight,
                              out.grad.data());
            }
            return out;
        }
    }

    for (const auto& seq : batch) {
        out.mean_nll += scale * forward_tape(params.theta.data(), lay, seq, tape);
        backward_tape(params.theta.data(), lay, seq, tape, scale, out.grad.data());
    }
    return out;
}

TrainResult train(const OutcomeDataset& data, const TrainingConfig& cfg,
                  const EpochCallback& callback) {
    cfg.validate();
    data.validate();
    const std::size_t n_shots = data.n_shots();
    if (n_shots == 0) throw std::invalid_argument("train: empty dataset");

    std::mt19937_64 rng(cfg.seed);
    RnnParams params = RnnParams::zeros(cfg.hidden_size, data.alphabet);
    {
        const Layout lay(cfg.hidden_size, data.alphabet);
        const double embed_scale = 0.1;
        const double rec_scale = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_size));
        for (std::size_t i = lay.embed; i < lay.u_z; ++i)
            params.theta[i] = embed_scale * (2.0 * uniform_double(rng) - 1.0);
        for (std::size_t i = lay.u_z; i < lay.b_z; ++i)
            params.theta[i] = rec_scale * (2.0 * uniform_double(rng) - 1.0);
        for (std::size_t i = lay.w_out; i < lay.b_out; ++i)
            params.theta[i] = rec_scale * (2.0 * uniform_double(rng) - 1.0);
        // biases stay zero: the initial model is near-uniform
    }

    std::vector<double> m(params.theta.size(), 0.0), v(params.theta.size(), 0.0);
    double beta1_t = 1.0, beta2_t = 1.0;

    std::vector<std::size_t> order(n_shots);
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::vector<std::span<const std::uint8_t>> batch;

    TrainResult result;
    result.trace.best_loss = std::numeric_limits<double>::infinity();
    int epochs_since_improve = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_indices(order, rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n_shots;
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(n_shots, start + static_cast<std::size_t>(cfg.batch_size));
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(data.shot(order[i]));
            GradientResult g = gradient(params, batch);
            loss_sum += g.mean_nll * static_cast<double>(stop - start);

            beta1_t *= cfg.beta1;
            beta2_t *= cfg.beta2;
            const double corr1 = 1.0 - beta1_t;
            const double corr2 = 1.0 - beta2_t;
            for (std::size_t i = 0; i < params.theta.size(); ++i) {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g.grad[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g.grad[i] * g.grad[i];
                params.theta[i] -= cfg.learning_rate * (m[i] / corr1) /
                                   (std::sqrt(v[i] / corr2) + cfg.adam_eps);
            }
        }
        const double epoch_loss = loss_sum / static_cast<double>(n_shots);
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
        result.trace.epoch_loss.push_back(epoch_loss);
        result.trace.epochs_run = epoch;

        if (epoch_loss < result.trace.best_loss - cfg.min_delta)
            epochs_since_improve = 0;
        else
            ++epochs_since_improve;
        if (epoch_loss < result.trace.best_loss) {
            result.trace.best_loss = epoch_loss;
            result.trace.best_epoch = epoch;
            result.params = params;
        }
        if (callback) callback(epoch, params, epoch_loss);
        if (epoch_loss <= cfg.loss_threshold) {
            result.trace.hit_threshold = true;
            break;
        }
        if (cfg.patience > 0 && epochs_since_improve >= cfg.patience) {
            result.trace.stopped_on_plateau = true;
            break;
        }
    }
    return result;
}

ProbDist exact_distribution(const RnnParams& params, int n_qubits) {
    if (n_qubits < 1) throw std::invalid_argument("exact_distribution: n_qubits must be >= 1");
    check_params(params);
    const Layout lay(params.hidden, params.alphabet);
    const int h = lay.h, k = lay.k;
    ProbDist dist(n_qubits, k);  // ctor enforces the K^N <= 1e7 guard

    // Depth-first walk over prefixes. Level d of hstack holds the hidden
    // state after consuming d tokens; it is shared by all K continuations of
    // that prefix, so each cell step runs exactly once per prefix.
    std::vector<double> hstack(static_cast<std::size_t>(n_qubits + 1) * h, 0.0);
    std::vector<double> z(h), r(h), c(h);
    std::vector<std::vector<double>> site_p(n_qubits, std::vector<double>(k));

    auto walk = [&](auto&& self, int depth, std::size_t base, std::size_t stride, double path,
                    int token) -> void {
        cell_step(params.theta.data(), lay, hstack.data() + static_cast<std::size_t>(depth) * h,
                  token, z.data(), r.data(), c.data(),
                  hstack.data() + static_cast<std::size_t>(depth + 1) * h,
                  site_p[depth].data());
        if (depth == n_qubits - 1) {
            for (int a = 0; a < k; ++a) dist.values[base + a] = path * site_p[depth][a];
            return;
        }
        for (int a = 0; a < k; ++a)
            self(self, depth + 1, base + static_cast<std::size_t>(a) * stride, stride / k,
                 path * site_p[depth][a], a);
    };
    walk(walk, 0, 0, dist.values.size() / k, 1.0, k);
    return dist;
}

OutcomeDataset sample_sequences(const RnnParams& params, int n_qubits, std::size_t n,
                                std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_sequences: n must be >= 1");
    if (n_qubits < 1) throw std::invalid_argument("sample_sequences: n_qubits must be >= 1");
    check_params(params);
    const Layout lay(params.hidden, params.alphabet);
    const int h = lay.h, k = lay.k;

    std::mt19937_64 rng(seed);
    OutcomeDataset d;
    d.n_qubits = n_qubits;
    d.alphabet = k;
    d.provenance.kind = k == 6 ? PovmKind::Pauli6 : PovmKind::Pauli4;
    d.provenance.seed = seed;
    d.shots.reserve(n * static_cast<std::size_t>(n_qubits));

    std::vector<double> h_prev(h), h_new(h), z(h), r(h), c(h), p(k);
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(h_prev.begin(), h_prev.end(), 0.0);
        int token = k;
        for (int m = 0; m < n_qubits; ++m) {
            cell_step(params.theta.data(), lay, h_prev.data(), token, z.data(), r.data(),
                      c.data(), h_new.data(), p.data());
            const double u = uniform_double(rng);
            double acc = 0.0;
            int sym = k - 1;
            for (int a = 0; a < k; ++a) {
                acc += p[a];
                if (u < acc) {
                    sym = a;
                    break;
                }
            }
            d.shots.push_back(static_cast<std::uint8_t>(sym));
            token = sym;
            std::swap(h_prev, h_new);
        }
    }
    return d;
}

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

constexpr char kMagic[8] = {'Q', 'G', 'T', 'R', 'N', 'N', '0', '1'};

void write_config(std::ofstream& out, const TrainingConfig& c) {
    write_pod(out, c.hidden_size);
    write_pod(out, c.learning_rate);
    write_pod(out, c.batch_size);
    write_pod(out, c.max_epochs);
    write_pod(out, c.loss_threshold);
    write_pod(out, c.beta1);
    write_pod(out, c.beta2);
    write_pod(out, c.adam_eps);
    write_pod(out, c.seed);
    write_pod(out, c.patience);
    write_pod(out, c.min_delta);
}

void read_config(std::ifstream& in, TrainingConfig& c) {
    read_pod(in, c.hidden_size);
    read_pod(in, c.learning_rate);
    read_pod(in, c.batch_size);
    read_pod(in, c.max_epochs);
    read_pod(in, c.loss_threshold);
    read_pod(in, c.beta1);
    read_pod(in, c.beta2);
    read_pod(in, c.adam_eps);
    read_pod(in, c.seed);
    read_pod(in, c.patience);
    read_pod(in, c.min_delta);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, ckpt.params.hidden);
    write_pod(out, ckpt.params.alphabet);
    write_pod(out, ckpt.n_qubits);
    const std::uint64_t n = ckpt.params.theta.size();
    write_pod(out, n);
    out.write(reinterpret_cast<const char*>(ckpt.params.theta.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
    write_pod(out, ckpt.dataset_hash);
    write_config(out, ckpt.cfg);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a model checkpoint: " + path);
    Checkpoint ckpt;
    read_pod(in, ckpt.params.hidden);
    read_pod(in, ckpt.params.alphabet);
    read_pod(in, ckpt.n_qubits);
    if (!in || ckpt.params.hidden < 1 || ckpt.params.hidden > 512 || ckpt.params.alphabet < 2 ||
        ckpt.n_qubits < 1)
        throw std::runtime_error("checkpoint header out of range: " + path);
    std::uint64_t n = 0;
    read_pod(in, n);
    if (!in || n != RnnParams::param_count(ckpt.params.hidden, ckpt.params.alphabet))
        throw std::runtime_error("checkpoint parameter count mismatch: " + path);
    ckpt.params.theta.resize(n);
    in.read(reinterpret_cast<char*>(ckpt.params.theta.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    read_pod(in, ckpt.dataset_hash);
    read_config(in, ckpt.cfg);
    if (!in) throw std::runtime_error("checkpoint truncated: " + path);
    return ckpt;
}

}  // namespace qgt
