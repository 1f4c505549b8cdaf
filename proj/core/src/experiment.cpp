#include "qgt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "qgt/metrics.hpp"
#include "qgt/mle.hpp"
#include "qgt/povm.hpp"
#include "qgt/rng.hpp"

namespace qgt {

namespace {

using nlohmann::json;

// Seed-stream labels, one per random draw site.
enum Stream : std::uint64_t {
    kMasterData = 1,
    kBayesResample = 2,
    kSubsample = 3,
    kTraining = 4,
};

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename Fn>
void rethrow_with_stage(const char* stage, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(stage) + ": " + e.what());
    }
}

// Readout fidelities (F_g, F_e) of the five-qubit device.
constexpr double kFg[5] = {0.990, 0.985, 0.973, 0.988, 0.985};
constexpr double kFe[5] = {0.899, 0.933, 0.922, 0.917, 0.918};

OutcomeDataset make_master_dataset(const ExperimentSpec& spec, int n, const DensityMatrix& rho,
                                   const NoiseModel& noise, std::size_t shots,
                                   std::uint64_t seed_base) {
    BasisRecords rec =
        sample_basis_records(rho, shots, noise, mix_seed(seed_base, Stream::kMasterData));
    if (spec.bayes && !noise.confusion.empty()) {
        BasisHistograms corrected = bayes_correct(basis_histograms(rec), noise.confusion);
        rec = resample_records(corrected, mix_seed(seed_base, Stream::kBayesResample));
    }
    OutcomeDataset::Provenance prov;
    prov.seed = seed_base;
    prov.depolarized = noise.depolarizing_p > 0.0;
    prov.readout_noise = noise.has_readout_noise();
    OutcomeDataset data = outcomes_from_records(rec, spec.povm, prov);
    data.n_qubits = n;
    return data;
}

std::vector<std::size_t> draw_subsample(std::size_t master, std::size_t ns, std::uint64_t seed) {
    if (ns > master) throw std::invalid_argument("subsample larger than master dataset");
    std::vector<std::size_t> idx(master);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < ns; ++i) {
        const std::size_t j = i + uniform_index(rng, master - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(ns);
    return idx;
}

struct SweepScorer {
    // Returns (f_c, epochs) for one subsampled cell.
    virtual std::pair<double, int> score(const OutcomeDataset& sub, const ProbDist& p_full,
                                         int n, std::uint64_t cell_seed) const = 0;
    virtual ~SweepScorer() = default;
};

struct RnnScorer final : SweepScorer {
    const ExperimentSpec* spec;
    std::pair<double, int> score(const OutcomeDataset& sub, const ProbDist& p_full, int n,
                                 std::uint64_t cell_seed) const override {
        TrainingConfig cfg = spec->train;
        cfg.seed = mix_seed(cell_seed, Stream::kTraining);
        TrainResult result = train(sub, cfg);
        ProbDist p_model = exact_distribution(result.params, n);
        return {classical_fidelity(p_model, p_full), result.trace.epochs_run};
    }
};

struct BaselineScorer final : SweepScorer {
    std::pair<double, int> score(const OutcomeDataset& sub, const ProbDist& p_full, int,
                                 std::uint64_t) const override {
        return {classical_fidelity(empirical_distribution(sub), p_full), 0};
    }
};

ScalingReport run_sweep(const ExperimentSpec& spec, const SweepScorer& scorer) {
    spec.validate();
    ScalingReport report;
    const std::vector<int> qubit_counts = spec.sweep_qubits();
    const std::size_t master_shots = spec.effective_master_shots();

    struct Cell {
        int n_idx;
        std::size_t grid_idx;
        int repeat;
    };

    for (std::size_t n_idx = 0; n_idx < qubit_counts.size(); ++n_idx) {
        const int n = qubit_counts[n_idx];
        const NoiseModel noise = noise_from_spec(spec, n);
        const DensityMatrix rho = target_density(spec, n);
        const std::uint64_t seed_n = mix_seed(spec.master_seed, 0xA11CE, n);
        const OutcomeDataset master =
            make_master_dataset(spec, n, rho, noise, master_shots, seed_n);
        const ProbDist p_full = empirical_distribution(master);

        std::vector<Cell> cells;
        for (std::size_t gi = 0; gi < spec.shot_grid.size(); ++gi)
            for (int rep = 0; rep < spec.repeats; ++rep)
                cells.push_back({static_cast<int>(n_idx), gi, rep});
        std::vector<CellRecord> results(cells.size());

        const unsigned hw = std::thread::hardware_concurrency();
        const unsigned n_threads = spec.threads > 0
                                       ? static_cast<unsigned>(spec.threads)
                                       : std::max(1u, hw == 0 ? 1u : hw);
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::string failure;
        std::mutex failure_mutex;

        auto worker = [&]() {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= cells.size() || failed.load()) break;
                const Cell& cell = cells[c];
                const std::size_t ns = spec.shot_grid[cell.grid_idx];
                const std::uint64_t cell_seed =
                    mix_seed(seed_n, cell.grid_idx + 1, static_cast<std::uint64_t>(cell.repeat));
                try {
                    const double t0 = now_seconds();
                    const auto indices = draw_subsample(
                        master.n_shots(), ns, mix_seed(cell_seed, Stream::kSubsample));
                    const OutcomeDataset sub = master.subset(indices);
                    const auto [fc, epochs] = scorer.score(sub, p_full, n, cell_seed);
                    results[c] = {n, ns, cell.repeat, fc, epochs, now_seconds() - t0};
                } catch (const std::exception& e) {
                    std::scoped_lock lock(failure_mutex);
                    failure = e.what();
                    failed.store(true);
                }
            }
        };
        if (n_threads <= 1 || cells.size() <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        if (failed.load()) throw std::runtime_error("scaling sweep: " + failure);

        ScalingCurve curve;
        curve.n_qubits = n;
        for (std::size_t gi = 0; gi < spec.shot_grid.size(); ++gi) {
            GridPoint pt;
            pt.ns = spec.shot_grid[gi];
            std::vector<double> fcs;
            for (const CellRecord& r : results)
                if (r.ns == pt.ns) fcs.push_back(r.f_c);
            double mean = 0;
            for (double f : fcs) mean += f;
            mean /= static_cast<double>(fcs.size());
            double var = 0;
            for (double f : fcs) var += (f - mean) * (f - mean);
            pt.mean_fc = mean;
            pt.std_fc = fcs.size() > 1 ? std::sqrt(var / static_cast<double>(fcs.size() - 1)) : 0;
            curve.points.push_back(pt);
            if (!curve.ns_star && mean >= spec.fc_threshold) curve.ns_star = pt.ns;
        }
        report.curves.push_back(std::move(curve));
        report.cells.insert(report.cells.end(), results.begin(), results.end());
    }
    report.fit = fit_ns_star(report);
    return report;
}

json spec_to_json(const ExperimentSpec& spec) {
    json j;
    j["state"] = spec.state;
    j["ghz_experimental"] = spec.ghz_experimental;
    j["n_qubits"] = spec.n_qubits;
    j["random_depth"] = spec.random_depth;
    j["state_seed"] = spec.state_seed;
    j["povm"] = povm_name(spec.povm);
    j["depol_p"] = spec.depol_p;
    j["readout_noise"] = spec.readout_noise;
    j["bayes"] = spec.bayes;
    j["shots"] = spec.shots;
    j["shot_grid"] = spec.shot_grid;
    j["master_shots"] = spec.effective_master_shots();
    j["repeats"] = spec.repeats;
    j["fc_threshold"] = spec.fc_threshold;
    j["qubit_counts"] = spec.sweep_qubits();
    j["master_seed"] = spec.master_seed;
    j["train"] = {{"hidden_size", spec.train.hidden_size},
                  {"learning_rate", spec.train.learning_rate},
                  {"batch_size", spec.train.batch_size},
                  {"max_epochs", spec.train.max_epochs},
                  {"loss_threshold", spec.train.loss_threshold},
                  {"patience", spec.train.patience}};
    return j;
}

json scaling_to_json(const ScalingReport& r) {
    json cells = json::array();
    for (const CellRecord& c : r.cells)
        cells.push_back({{"n", c.n_qubits},
                         {"ns", c.ns},
                         {"repeat", c.repeat},
                         {"f_c", c.f_c},
                         {"epochs", c.epochs},
                         {"wall_seconds", c.wall_seconds}});
    json curves = json::array();
    for (const ScalingCurve& c : r.curves) {
        json points = json::array();
        for (const GridPoint& p : c.points)
            points.push_back({{"ns", p.ns}, {"mean_fc", p.mean_fc}, {"std_fc", p.std_fc}});
        json jc = {{"n", c.n_qubits}, {"points", points}, {"censored", !c.ns_star.has_value()}};
        if (c.ns_star) jc["ns_star"] = *c.ns_star;
        curves.push_back(jc);
    }
    json fit = {{"valid", r.fit.valid},
                {"slope", r.fit.slope},
                {"intercept", r.fit.intercept},
                {"r2", r.fit.r2}};
    return {{"cells", cells}, {"curves", curves}, {"fit", fit}};
}

}  // namespace

void ExperimentSpec::validate() const {
    if (state != "ghz" && state != "random")
        throw std::invalid_argument("spec: state must be ghz or random");
    if (repeats < 1) throw std::invalid_argument("spec: repeats must be >= 1");
    if (shot_grid.empty()) throw std::invalid_argument("spec: shot grid is empty");
    for (std::size_t i = 1; i < shot_grid.size(); ++i)
        if (shot_grid[i] <= shot_grid[i - 1])
            throw std::invalid_argument("spec: shot grid must be strictly increasing");
    if (fc_threshold < 0.0 || fc_threshold > 1.0)
        throw std::invalid_argument("spec: fidelity threshold outside [0,1]");
    for (int n : sweep_qubits())
        if (n < 1 || n > 8) throw std::invalid_argument("spec: qubit counts must be in [1,8]");
    train.validate();
}

std::vector<int> ExperimentSpec::sweep_qubits() const {
    return qubit_counts.empty() ? std::vector<int>{n_qubits} : qubit_counts;
}

std::size_t ExperimentSpec::effective_master_shots() const {
    if (master_shots > 0) return master_shots;
    return 2 * *std::max_element(shot_grid.begin(), shot_grid.end());
}

double default_depolarizing(int n_qubits) {
    // Matched to the measured GHZ fidelities 98.0/97.9/93.3/89.4% (N=2..5)
    // under the per-qubit depolarizing surrogate; edges extrapolated.
    static constexpr double p[9] = {0.0,      0.020,    0.026758, 0.018763, 0.045711,
                                    0.059048, 0.065,    0.070,    0.075};
    if (n_qubits < 1 || n_qubits > 8)
        throw std::invalid_argument("default_depolarizing: qubit count out of range");
    return p[n_qubits];
}

std::vector<CMatrix> default_confusion(int n_qubits) {
    std::vector<CMatrix> c;
    c.reserve(n_qubits);
    for (int q = 0; q < n_qubits; ++q)
        c.push_back(NoiseModel::confusion_from_fidelities(kFg[q % 5], kFe[q % 5]));
    return c;
}

NoiseModel noise_from_spec(const ExperimentSpec& spec, int n_qubits) {
    NoiseModel noise;
    noise.depolarizing_p = spec.depol_p < 0.0 ? default_depolarizing(n_qubits) : spec.depol_p;
    if (spec.readout_noise) noise.confusion = default_confusion(n_qubits);
    return noise;
}

StateVector target_state(const ExperimentSpec& spec, int n_qubits) {
    if (spec.state == "ghz") return build_ghz(n_qubits, spec.ghz_experimental);
    return random_state(n_qubits, spec.random_depth,
                        mix_seed(spec.state_seed ? spec.state_seed : spec.master_seed, 0x57A7E,
                                 static_cast<std::uint64_t>(n_qubits)));
}

DensityMatrix target_density(const ExperimentSpec& spec, int n_qubits) {
    return densify(target_state(spec, n_qubits), noise_from_spec(spec, n_qubits));
}

TomographyRecord run_tomography(const ExperimentSpec& spec) {
    spec.validate();
    const int n = spec.n_qubits;
    TomographyRecord rec;
    rec.n_qubits = n;
    rec.shots = spec.shots;
    rec.seed = spec.master_seed;

    DensityMatrix rho;
    NoiseModel noise;
    rethrow_with_stage("prepare", [&] {
        noise = noise_from_spec(spec, n);
        rho = target_density(spec, n);
    });

    OutcomeDataset data;
    ProbDist p_exp;
    rethrow_with_stage("sample", [&] {
        data = make_master_dataset(spec, n, rho, noise, spec.shots,
                                   mix_seed(spec.master_seed, 0xDA7A, n));
        p_exp = empirical_distribution(data);
    });

    RnnParams model;
    rethrow_with_stage("train", [&] {
        TrainingConfig cfg = spec.train;
        cfg.seed = mix_seed(spec.master_seed, Stream::kTraining, n);
        const double t0 = now_seconds();
        TrainResult result = train(data, cfg);
        rec.train_seconds = now_seconds() - t0;
        rec.epochs = result.trace.epochs_run;
        rec.final_loss = result.trace.best_loss;
        model = std::move(result.params);
    });

    ProbDist p_model;
    rethrow_with_stage("reconstruct", [&] {
        p_model = exact_distribution(model, n);
        rec.f_c = classical_fidelity(p_model, p_exp);
        rec.f_c_exact = classical_fidelity(p_model, povm_distribution(rho, make_povm(spec.povm)));
    });

    if (n <= 5) {
        rethrow_with_stage("metrics", [&] {
            const PovmSet p4 = make_povm(PovmKind::Pauli4);
            const ProbDist p_model4 =
                spec.povm == PovmKind::Pauli6 ? coarse_grain_p6_to_p4(p_model) : p_model;
            const ProbDist p_exp4 =
                spec.povm == PovmKind::Pauli6 ? coarse_grain_p6_to_p4(p_exp) : p_exp;

            PhysicalFit fit = mle_project(p_model4, p4);
            rec.mle_objective = fit.objective;
            rec.f_q = quantum_fidelity(fit.rho, rho);
            PhysicalFit fit_qst = mle_project(p_exp4, p4);
            rec.f_q_qst = quantum_fidelity(fit_qst.rho, rho);

            for (int j = 0; j < n; ++j)
                for (int k = j + 1; k < n; ++k) {
                    PairCorrelation c;
                    c.j = j;
                    c.k = k;
                    c.zz_model = pauli_correlation(fit.rho, j, k, Basis::Z);
                    c.xx_model = pauli_correlation(fit.rho, j, k, Basis::X);
                    c.zz_model_dist = pauli_correlation_from_dist(p_model4, p4, j, k, Basis::Z);
                    c.xx_model_dist = pauli_correlation_from_dist(p_model4, p4, j, k, Basis::X);
                    c.zz_true = pauli_correlation(rho, j, k, Basis::Z);
                    c.xx_true = pauli_correlation(rho, j, k, Basis::X);
                    rec.correlations.push_back(c);
                }
        });
    }
    return rec;
}

ScalingReport find_ns_star(const ExperimentSpec& spec) {
    RnnScorer scorer;
    scorer.spec = &spec;
    return run_sweep(spec, scorer);
}

ScalingReport baseline_ns_star(const ExperimentSpec& spec) {
    return run_sweep(spec, BaselineScorer{});
}

LinearFit fit_ns_star(const ScalingReport& report) {
    std::vector<double> xs, ys;
    for (const ScalingCurve& c : report.curves)
        if (c.ns_star) {
            xs.push_back(static_cast<double>(c.n_qubits));
            ys.push_back(static_cast<double>(*c.ns_star));
        }
    LinearFit fit;
    if (xs.size() < 2) return fit;
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ymean = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = fit.slope * xs[i] + fit.intercept;
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
    }
    fit.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    fit.valid = true;
    return fit;
}

std::string tomography_report_json(const ExperimentSpec& spec, const TomographyRecord& rec) {
    json j;
    j["report_version"] = 1;
    j["kind"] = "tomography";
    j["spec"] = spec_to_json(spec);
    json r;
    r["n_qubits"] = rec.n_qubits;
    r["shots"] = rec.shots;
    r["seed"] = rec.seed;
    r["f_c"] = rec.f_c;
    r["f_c_exact"] = rec.f_c_exact;
    if (rec.f_q) r["f_q"] = *rec.f_q;
    if (rec.f_q_qst) r["f_q_qst"] = *rec.f_q_qst;
    if (rec.mle_objective) r["mle_objective"] = *rec.mle_objective;
    r["epochs"] = rec.epochs;
    r["final_loss"] = rec.final_loss;
    r["train_seconds"] = rec.train_seconds;
    json corr = json::array();
    for (const PairCorrelation& c : rec.correlations)
        corr.push_back({{"j", c.j},
                        {"k", c.k},
                        {"zz_model", c.zz_model},
                        {"xx_model", c.xx_model},
                        {"zz_model_dist", c.zz_model_dist},
                        {"xx_model_dist", c.xx_model_dist},
                        {"zz_true", c.zz_true},
                        {"xx_true", c.xx_true}});
    r["correlations"] = corr;
    j["record"] = r;
    return j.dump(2) + "\n";
}

std::string scaling_report_json(const ExperimentSpec& spec, const ScalingReport& rnn,
                                const ScalingReport* baseline) {
    json j;
    j["report_version"] = 1;
    j["kind"] = "scaling";
    j["spec"] = spec_to_json(spec);
    j["rnn"] = scaling_to_json(rnn);
    if (baseline) j["baseline"] = scaling_to_json(*baseline);
    return j.dump(2) + "\n";
}

void write_scaling_csv(const std::string& stem, const ScalingReport& rnn,
                       const ScalingReport* baseline) {
    {
        std::ofstream out(stem + "_cells.csv");
        out << "source,n,ns,repeat,f_c,epochs,wall_seconds\n";
        for (const CellRecord& c : rnn.cells)
            out << "rnn," << c.n_qubits << ',' << c.ns << ',' << c.repeat << ',' << c.f_c << ','
                << c.epochs << ',' << c.wall_seconds << '\n';
        if (baseline)
            for (const CellRecord& c : baseline->cells)
                out << "baseline," << c.n_qubits << ',' << c.ns << ',' << c.repeat << ',' << c.f_c
                    << ',' << c.epochs << ',' << c.wall_seconds << '\n';
    }
    {
        std::ofstream out(stem + "_curve.csv");
        out << "source,n,ns,mean_fc,std_fc\n";
        auto dump_curves = [&out](const ScalingReport& r, const char* tag) {
            for (const ScalingCurve& c : r.curves)
                for (const GridPoint& p : c.points)
                    out << tag << ',' << c.n_qubits << ',' << p.ns << ',' << p.mean_fc << ','
                        << p.std_fc << '\n';
        };
        dump_curves(rnn, "rnn");
        if (baseline) dump_curves(*baseline, "baseline");
    }
    {
        std::ofstream out(stem + "_summary.csv");
        out << "n,rnn_ns_star,rnn_censored,baseline_ns_star,baseline_censored\n";
        for (std::size_t i = 0; i < rnn.curves.size(); ++i) {
            const ScalingCurve& c = rnn.curves[i];
            out << c.n_qubits << ',' << (c.ns_star ? static_cast<long long>(*c.ns_star) : -1)
                << ',' << (c.ns_star ? 0 : 1) << ',';
            if (baseline && i < baseline->curves.size()) {
                const ScalingCurve& b = baseline->curves[i];
                out << (b.ns_star ? static_cast<long long>(*b.ns_star) : -1) << ','
                    << (b.ns_star ? 0 : 1) << '\n';
            } else {
                out << "-1,-1\n";
            }
        }
    }
}

}  // namespace qgt
