#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qgt/data.hpp"

namespace qgt {

// Gated recurrent generative model over outcome strings. All weights live in
// one flat vector so the optimizer, the finite-difference checks and the
// checkpoint format can treat parameters uniformly. Layout, in order:
//   embed   (K+1) x 3H   per-token input contributions to the z/r/c gates
//   u_z, u_r, u_c  H x H recurrent weights
//   b_z, b_r, b_c  H     gate biases
//   w_out   K x H        logit projection
//   b_out   K
struct RnnParams {
    int hidden = 0;
    int alphabet = 0;
    std::vector<double> theta;

    static RnnParams zeros(int hidden, int alphabet);
    std::size_t size() const { return theta.size(); }
    static std::size_t param_count(int hidden, int alphabet);
};

struct TrainingConfig {
    int hidden_size = 32;
    double learning_rate = 1e-3;
    int batch_size = 64;
    int max_epochs = 200;
    double loss_threshold = 0.0;  // stop once epoch mean NLL falls to this
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    int patience = 0;        // >0: stop after this many epochs without improvement
    double min_delta = 1e-4;  // improvement granularity for the patience counter

    void validate() const;
};

// Conditional distributions p(a_m | a_<m), one row per site.
struct SiteDistributions {
    int n_sites = 0;
    int alphabet = 0;
    std::vector<double> probs;  // site-major

    std::span<const double> site(int m) const {
        return {probs.data() + static_cast<std::size_t>(m) * alphabet,
                static_cast<std::size_t>(alphabet)};
    }
};

struct ForwardResult {
    SiteDistributions sites;
    double nll = 0.0;  // -sum_m log p(a_m | a_<m)
};

ForwardResult forward(const RnnParams& params, std::span<const std::uint8_t> sequence);

struct GradientResult {
    std::vector<double> grad;  // d(mean NLL)/d(theta)
    double mean_nll = 0.0;
};

GradientResult gradient(const RnnParams& params,
                        const std::vector<std::span<const std::uint8_t>>& batch);

struct TrainTrace {
    std::vector<double> epoch_loss;
    int epochs_run = 0;
    double best_loss = 0.0;
    int best_epoch = 0;
    bool hit_threshold = false;
    bool stopped_on_plateau = false;
};

struct TrainResult {
    RnnParams params;  // best-loss parameters
    TrainTrace trace;
};

// Called after every epoch with the current parameters and epoch mean loss.
using EpochCallback = std::function<void(int epoch, const RnnParams&, double loss)>;

// Adam over shuffled mini-batches; deterministic in (data, cfg.seed).
// Throws if the loss turns non-finite, naming the epoch.
TrainResult train(const OutcomeDataset& data, const TrainingConfig& cfg,
                  const EpochCallback& callback = nullptr);

// Full joint distribution by depth-first enumeration with shared prefix
// hidden states; guarded at K^N <= 1e7 entries.
ProbDist exact_distribution(const RnnParams& params, int n_qubits);

// Ancestral sampling, site by site.
OutcomeDataset sample_sequences(const RnnParams& params, int n_qubits, std::size_t n,
                                std::uint64_t seed);

struct Checkpoint {
    RnnParams params;
    int n_qubits = 0;
    std::uint64_t dataset_hash = 0;
    TrainingConfig cfg;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace qgt
