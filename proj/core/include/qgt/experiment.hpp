#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qgt/data.hpp"
#include "qgt/rnn.hpp"
#include "qgt/sim.hpp"

namespace qgt {

// Full description of a tomography experiment; the master seed pins every
// random draw, so equal specs reproduce equal reports.
struct ExperimentSpec {
    std::string state = "ghz";  // ghz | random | zero
    bool ghz_experimental = false;
    int n_qubits = 2;
    int random_depth = 8;
    std::uint64_t state_seed = 0;
    PovmKind povm = PovmKind::Pauli4;
    double depol_p = -1.0;  // negative: per-N calibrated default
    bool readout_noise = false;
    bool bayes = false;  // correct basis histograms before training
    std::size_t shots = 10000;
    std::vector<std::size_t> shot_grid = {250, 500, 1000, 2000, 4000, 8000, 16000, 32000};
    std::size_t master_shots = 0;  // 0: twice the largest grid value
    int repeats = 10;
    double fc_threshold = 0.99;
    std::vector<int> qubit_counts;  // sweep targets; empty means {n_qubits}
    TrainingConfig train;
    std::uint64_t master_seed = 1;
    int threads = 0;  // 0: hardware concurrency
    // also compute F_Q (N <= 5) and pair correlations per sweep cell
    bool cell_metrics = false;

    void validate() const;
    std::vector<int> sweep_qubits() const;
    std::size_t effective_master_shots() const;
};

// Per-qubit depolarizing strength whose GHZ fidelity tracks the measured
// device values (98.0/97.9/93.3/89.4% for N=2..5).
double default_depolarizing(int n_qubits);

// Readout confusion defaults from the measured per-qubit (F_g, F_e) pairs,
// cycled when more qubits are requested than the five-qubit device has.
std::vector<CMatrix> default_confusion(int n_qubits);

NoiseModel noise_from_spec(const ExperimentSpec& spec, int n_qubits);
StateVector target_state(const ExperimentSpec& spec, int n_qubits);
DensityMatrix target_density(const ExperimentSpec& spec, int n_qubits);

struct PairCorrelation {
    int j = 0, k = 0;
    double zz_model = 0, xx_model = 0;            // from the MLE-corrected model state
    double zz_model_dist = 0, xx_model_dist = 0;  // from P_model directly, no MLE
    double zz_true = 0, xx_true = 0;              // from the simulated state
};

struct TomographyRecord {
    int n_qubits = 0;
    std::size_t shots = 0;
    std::uint64_t seed = 0;
    double f_c = 0;        // model vs full-dataset empirical distribution
    double f_c_exact = 0;  // model vs exact simulated distribution (diagnostic)
    std::optional<double> f_q;      // MLE(model) vs simulated state, N <= 5
    std::optional<double> f_q_qst;  // MLE(empirical) vs simulated state
    std::optional<double> mle_objective;
    std::vector<PairCorrelation> correlations;
    int epochs = 0;
    double final_loss = 0;
    double train_seconds = 0;  // timing; excluded from the reproducibility contract
};

// prepare -> sample -> (bayes) -> train -> enumerate -> invert+MLE -> metrics.
// Stage failures are rethrown with the stage name prefixed.
TomographyRecord run_tomography(const ExperimentSpec& spec);

struct CellRecord {
    int n_qubits = 0;
    std::size_t ns = 0;
    int repeat = 0;
    double f_c = 0;
    int epochs = 0;
    double wall_seconds = 0;
    std::optional<double> f_q;                  // cell_metrics and N <= 5 only
    std::vector<PairCorrelation> correlations;  // cell_metrics only
};

struct GridPoint {
    std::size_t ns = 0;
    double mean_fc = 0;
    double std_fc = 0;
};

struct ScalingCurve {
    int n_qubits = 0;
    std::vector<GridPoint> points;
    std::optional<std::size_t> ns_star;  // empty: censored (threshold never crossed)
};

struct LinearFit {
    bool valid = false;
    double slope = 0, intercept = 0, r2 = 0;
};

struct ScalingReport {
    std::vector<CellRecord> cells;
    std::vector<ScalingCurve> curves;
    LinearFit fit;  // ns_star against qubit count, censored points excluded
};

// Average classical fidelity over `repeats` without-replacement subsamples at
// every grid size; ns_star is the smallest grid value whose mean crosses the
// threshold.
ScalingReport find_ns_star(const ExperimentSpec& spec);

// Same sweep scored by the empirical distribution of the subsample itself
// (the plain linear-inversion tomography baseline); no model is trained.
ScalingReport baseline_ns_star(const ExperimentSpec& spec);

LinearFit fit_ns_star(const ScalingReport& report);

std::string tomography_report_json(const ExperimentSpec& spec, const TomographyRecord& rec);
std::string scaling_report_json(const ExperimentSpec& spec, const ScalingReport& rnn,
                                const ScalingReport* baseline);
// Writes <stem>_cells.csv, <stem>_curve.csv and <stem>_summary.csv.
void write_scaling_csv(const std::string& stem, const ScalingReport& rnn,
                       const ScalingReport* baseline);

}  // namespace qgt
