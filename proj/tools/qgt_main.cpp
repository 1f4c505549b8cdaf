// Command-line front end: state preparation, POVM sampling, model training,
// reconstruction, metrics and the sample-scaling sweep.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qgt/experiment.hpp"
#include "qgt/metrics.hpp"
#include "qgt/mle.hpp"
#include "qgt/povm.hpp"
#include "qgt/rnn.hpp"

namespace {

using nlohmann::json;


// --config handling: the file holds one `key = value` per line with `#`
// comments, mirroring the subcommand's long flags. Keys already given
// explicitly on the command line win; everything else is appended as
// `--key=value` tokens before parsing.
std::string config_stub;  // shown in --help; the real work happens pre-parse

void add_config_stub(CLI::App* cmd) {
    cmd->add_option("--config", config_stub,
                    "Key-value file mirroring every flag (# comments, key = value)");
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

void expand_config(std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw CLI::FileError("--config: cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::FileError("--config: malformed line (expected key = value): " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw CLI::FileError("--config: empty key in line: " + line);
        const std::string flag = "--" + key;
        bool given = false;
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (!given) args.push_back(flag + "=" + value);
    }
}

struct CommonOpts {
    int qubits = 2;
    std::string state = "ghz";
    std::string povm = "pauli4";
    std::size_t shots = 10000;
    std::uint64_t seed = 1;
    double noise_depol = -1.0;
    std::string readout_table;  // empty: ideal readout; "builtin": device table; else file
    std::string out;
    int depth = 8;
    std::uint64_t state_seed = 0;
};

void add_state_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--qubits", o.qubits, "Number of qubits (1-8)")
        ->check(CLI::Range(1, 8))
        ->capture_default_str();
    cmd->add_option("--state", o.state, "Target state")
        ->check(CLI::IsMember({"ghz", "ghz-exp", "random"}))
        ->capture_default_str();
    cmd->add_option("--noise-depol", o.noise_depol,
                    "Per-qubit depolarizing strength; negative selects the calibrated per-N "
                    "default, 0 disables")
        ->capture_default_str();
    cmd->add_option("--depth", o.depth, "Random-state circuit depth")->capture_default_str();
    cmd->add_option("--state-seed", o.state_seed, "Random-state circuit seed (0: derive)")
        ->capture_default_str();
}

void add_povm_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--povm", o.povm, "POVM kind")
        ->check(CLI::IsMember({"pauli4", "pauli6"}))
        ->capture_default_str();
    cmd->add_option("--readout-table", o.readout_table,
                    "Readout confusion: 'builtin' for the device table, or a file with one "
                    "'F_g F_e' pair per line");
}

std::vector<qgt::CMatrix> load_readout_table(const std::string& arg, int n_qubits) {
    if (arg == "builtin") return qgt::default_confusion(n_qubits);
    std::ifstream in(arg);
    if (!in) throw std::runtime_error("cannot open readout table: " + arg);
    std::vector<qgt::CMatrix> c;
    double fg, fe;
    while (in >> fg >> fe) c.push_back(qgt::NoiseModel::confusion_from_fidelities(fg, fe));
    if (c.size() < static_cast<std::size_t>(n_qubits))
        throw std::runtime_error("readout table has fewer rows than qubits");
    c.resize(n_qubits);
    return c;
}

qgt::ExperimentSpec spec_from_common(const CommonOpts& o) {
    qgt::ExperimentSpec spec;
    spec.state = o.state == "random" ? "random" : "ghz";
    spec.ghz_experimental = o.state == "ghz-exp";
    spec.n_qubits = o.qubits;
    spec.random_depth = o.depth;
    spec.state_seed = o.state_seed;
    spec.povm = qgt::povm_from_name(o.povm);
    spec.depol_p = o.noise_depol;
    spec.readout_noise = !o.readout_table.empty();
    spec.shots = o.shots;
    spec.master_seed = o.seed;
    return spec;
}

qgt::NoiseModel noise_from_common(const CommonOpts& o) {
    qgt::NoiseModel noise;
    noise.depolarizing_p =
        o.noise_depol < 0.0 ? qgt::default_depolarizing(o.qubits) : o.noise_depol;
    if (!o.readout_table.empty()) noise.confusion = load_readout_table(o.readout_table, o.qubits);
    return noise;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

json matrix_json(const qgt::CMatrix& m) {
    json re = json::array(), im = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json re_row = json::array(), im_row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) {
            re_row.push_back(m.at(i, j).real());
            im_row.push_back(m.at(i, j).imag());
        }
        re.push_back(re_row);
        im.push_back(im_row);
    }
    return {{"re", re}, {"im", im}};
}

int run_prepare(const CommonOpts& o) {
    const qgt::ExperimentSpec spec = spec_from_common(o);
    const qgt::StateVector psi = qgt::target_state(spec, o.qubits);
    json j;
    j["report_version"] = 1;
    j["kind"] = "state";
    j["n_qubits"] = o.qubits;
    j["state"] = o.state;
    json re = json::array(), im = json::array();
    for (const qgt::cplx& a : psi.amplitudes) {
        re.push_back(a.real());
        im.push_back(a.imag());
    }
    j["amplitudes"] = {{"re", re}, {"im", im}};
    const qgt::NoiseModel noise = noise_from_common(o);
    if (noise.depolarizing_p > 0.0) {
        j["depolarizing_p"] = noise.depolarizing_p;
        j["density"] = matrix_json(qgt::densify(psi, noise).matrix);
    }
    write_text(o.out, j.dump(2) + "\n");
    return 0;
}

int run_sample(const CommonOpts& o) {
    const qgt::ExperimentSpec spec = spec_from_common(o);
    const qgt::NoiseModel noise = noise_from_common(o);
    const qgt::DensityMatrix rho = qgt::densify(qgt::target_state(spec, o.qubits), noise);
    const qgt::PovmSet povm = qgt::make_povm(spec.povm);
    const qgt::OutcomeDataset data = qgt::sample_dataset(rho, povm, o.shots, noise, o.seed);
    qgt::save_dataset(data, o.out);
    return 0;
}

int run_train(const CommonOpts& o, const std::string& data_path, qgt::TrainingConfig cfg) {
    const qgt::OutcomeDataset data = qgt::load_dataset(data_path);
    cfg.seed = o.seed;
    const qgt::TrainResult result = qgt::train(data, cfg);

    qgt::Checkpoint ckpt;
    ckpt.params = result.params;
    ckpt.n_qubits = data.n_qubits;
    ckpt.dataset_hash = qgt::dataset_hash(data);
    ckpt.cfg = cfg;
    qgt::save_checkpoint(ckpt, o.out);

    json trace;
    trace["report_version"] = 1;
    trace["kind"] = "training-trace";
    trace["epochs_run"] = result.trace.epochs_run;
    trace["best_epoch"] = result.trace.best_epoch;
    trace["best_loss"] = result.trace.best_loss;
    trace["hit_threshold"] = result.trace.hit_threshold;
    trace["stopped_on_plateau"] = result.trace.stopped_on_plateau;
    trace["epoch_loss"] = result.trace.epoch_loss;
    trace["optimizer"] = "adam";
    write_text(o.out + ".trace.json", trace.dump(2) + "\n");
    std::cerr << "trained " << result.trace.epochs_run << " epochs, best loss "
              << result.trace.best_loss << "\n";
    return 0;
}

int run_reconstruct(const CommonOpts& o, const std::string& model_path, bool use_mle) {
    const qgt::Checkpoint ckpt = qgt::load_checkpoint(model_path);
    const qgt::ProbDist p_model = qgt::exact_distribution(ckpt.params, ckpt.n_qubits);
    const qgt::PovmSet p4 = qgt::make_povm(qgt::PovmKind::Pauli4);
    const qgt::ProbDist p4_model =
        p_model.alphabet == 6 ? qgt::coarse_grain_p6_to_p4(p_model) : p_model;

    json j;
    j["report_version"] = 1;
    j["kind"] = "reconstruction";
    j["n_qubits"] = ckpt.n_qubits;
    j["alphabet"] = p_model.alphabet;
    j["p_model"] = p_model.values;

    if (use_mle) {
        const qgt::PhysicalFit fit = qgt::mle_project(p4_model, p4);
        j["rho"] = matrix_json(fit.rho.matrix);
        j["mle"] = {{"objective", fit.objective},
                    {"iterations", fit.iterations},
                    {"converged", fit.converged}};
        const auto eig = qgt::hermitian_eig(fit.rho.matrix);
        j["min_eigenvalue"] = eig.eigenvalues.front();
        j["trace"] = fit.rho.matrix.trace().real();
    } else {
        const qgt::DensityMatrix rho = qgt::reconstruct_linear_inversion(p4_model, p4);
        j["rho"] = matrix_json(rho.matrix);
        const auto eig = qgt::hermitian_eig(rho.matrix);
        j["min_eigenvalue"] = eig.eigenvalues.front();
        j["trace"] = rho.matrix.trace().real();
        j["mle"] = nullptr;
    }
    write_text(o.out, j.dump(2) + "\n");
    return 0;
}

int run_metrics(const CommonOpts& o, const std::string& model_path, const std::string& data_path,
                bool with_reference) {
    const qgt::Checkpoint ckpt = qgt::load_checkpoint(model_path);
    const int n = ckpt.n_qubits;
    const qgt::ProbDist p_model = qgt::exact_distribution(ckpt.params, n);

    json j;
    j["report_version"] = 1;
    j["kind"] = "metrics";
    j["n_qubits"] = n;

    if (!data_path.empty()) {
        const qgt::OutcomeDataset data = qgt::load_dataset(data_path);
        if (data.n_qubits != n || data.alphabet != p_model.alphabet)
            throw std::runtime_error("metrics: dataset shape does not match the model");
        j["f_c"] = qgt::classical_fidelity(p_model, qgt::empirical_distribution(data));
    }

    const qgt::PovmSet p4 = qgt::make_povm(qgt::PovmKind::Pauli4);
    const qgt::ProbDist p4_model =
        p_model.alphabet == 6 ? qgt::coarse_grain_p6_to_p4(p_model) : p_model;
    const qgt::PhysicalFit fit = qgt::mle_project(p4_model, p4);

    json corr = json::array();
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            corr.push_back(
                {{"j", a},
                 {"k", b},
                 {"zz_model", qgt::pauli_correlation(fit.rho, a, b, qgt::Basis::Z)},
                 {"xx_model", qgt::pauli_correlation(fit.rho, a, b, qgt::Basis::X)},
                 {"zz_model_dist",
                  qgt::pauli_correlation_from_dist(p4_model, p4, a, b, qgt::Basis::Z)},
                 {"xx_model_dist",
                  qgt::pauli_correlation_from_dist(p4_model, p4, a, b, qgt::Basis::X)}});
    j["correlations"] = corr;
    j["mle_objective"] = fit.objective;

    if (with_reference) {
        CommonOpts ref = o;
        ref.qubits = n;
        const qgt::ExperimentSpec spec = spec_from_common(ref);
        const qgt::DensityMatrix rho =
            qgt::densify(qgt::target_state(spec, n), noise_from_common(ref));
        if (n <= 5) j["f_q"] = qgt::quantum_fidelity(fit.rho, rho);
        j["f_c_exact"] =
            qgt::classical_fidelity(p_model, qgt::povm_distribution(rho, qgt::make_povm(
                                                                             ckpt.params.alphabet == 6
                                                                                 ? qgt::PovmKind::Pauli6
                                                                                 : qgt::PovmKind::Pauli4)));
    }
    write_text(o.out, j.dump(2) + "\n");
    return 0;
}

struct ScalingOpts {
    std::vector<int> qubit_counts = {2, 3, 4, 5};
    std::vector<std::size_t> grid;
    std::size_t master_shots = 0;
    int repeats = 10;
    double threshold = 0.99;
    bool baseline = true;
    bool bayes = false;
    int threads = 0;
};

int run_scaling(const CommonOpts& o, const ScalingOpts& so, const qgt::TrainingConfig& cfg) {
    qgt::ExperimentSpec spec = spec_from_common(o);
    spec.qubit_counts = so.qubit_counts;
    if (!so.grid.empty()) spec.shot_grid = so.grid;
    spec.master_shots = so.master_shots;
    spec.repeats = so.repeats;
    spec.fc_threshold = so.threshold;
    spec.bayes = so.bayes;
    spec.threads = so.threads;
    spec.train = cfg;

    const qgt::ScalingReport rnn = qgt::find_ns_star(spec);
    std::optional<qgt::ScalingReport> base;
    if (so.baseline) base = qgt::baseline_ns_star(spec);

    const std::string stem =
        o.out.size() > 5 && o.out.substr(o.out.size() - 5) == ".json" ? o.out.substr(0, o.out.size() - 5)
                                                                      : o.out;
    write_text(stem + ".json",
               qgt::scaling_report_json(spec, rnn, base ? &*base : nullptr));
    qgt::write_scaling_csv(stem, rnn, base ? &*base : nullptr);
    for (const qgt::ScalingCurve& c : rnn.curves) {
        std::cerr << "N=" << c.n_qubits << " ns_star=";
        if (c.ns_star)
            std::cerr << *c.ns_star;
        else
            std::cerr << "censored(>" << spec.shot_grid.back() << ")";
        std::cerr << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generative-model quantum state tomography at desk scale"};
    app.require_subcommand(1);

    CommonOpts prep_o, samp_o, train_o, rec_o, met_o, scal_o;
    std::string train_data, rec_model, met_model, met_data;
    bool rec_mle = true;
    bool met_reference = false;
    qgt::TrainingConfig train_cfg, scal_cfg;
    ScalingOpts scaling_opts;

    auto add_train_flags = [](CLI::App* cmd, qgt::TrainingConfig& cfg) {
        cmd->add_option("--hidden", cfg.hidden_size, "Hidden state size")->capture_default_str();
        cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
        cmd->add_option("--batch", cfg.batch_size, "Mini-batch size")->capture_default_str();
        cmd->add_option("--epochs", cfg.max_epochs, "Epoch cap")->capture_default_str();
        cmd->add_option("--alpha", cfg.loss_threshold, "Loss threshold for early exit")
            ->capture_default_str();
        cmd->add_option("--patience", cfg.patience,
                        "Stop after this many epochs without improvement (0: off)")
            ->capture_default_str();
    };

    // prepare
    CLI::App* prepare = app.add_subcommand("prepare", "Build a target state and write it as JSON");
    add_state_flags(prepare, prep_o);
    prepare->add_option("--out", prep_o.out, "Output JSON path")->required();
    add_config_stub(prepare);

    // sample
    CLI::App* sample = app.add_subcommand("sample", "Sample a POVM shot dataset");
    add_state_flags(sample, samp_o);
    add_povm_flags(sample, samp_o);
    sample->add_option("--shots", samp_o.shots, "Number of shots")->capture_default_str();
    sample->add_option("--seed", samp_o.seed, "Sampling seed")->capture_default_str();
    sample->add_option("--out", samp_o.out, "Output dataset path")->required();
    add_config_stub(sample);

    // train
    CLI::App* train_cmd = app.add_subcommand("train", "Train the generative model on a dataset");
    train_cmd->add_option("--data", train_data, "Input dataset path")->required();
    train_cmd->add_option("--seed", train_o.seed, "Training seed")->capture_default_str();
    add_train_flags(train_cmd, train_cfg);
    train_cmd->add_option("--out", train_o.out, "Output checkpoint path")->required();
    add_config_stub(train_cmd);

    // reconstruct
    CLI::App* reconstruct =
        app.add_subcommand("reconstruct", "Enumerate the learned distribution and invert it");
    reconstruct->add_option("--model", rec_model, "Model checkpoint")->required();
    reconstruct->add_flag("--mle,!--no-mle", rec_mle, "Project onto physical states (default on)");
    reconstruct->add_option("--out", rec_o.out, "Output JSON path")->required();
    add_config_stub(reconstruct);

    // metrics
    CLI::App* metrics = app.add_subcommand("metrics", "Fidelities and correlations for a model");
    metrics->add_option("--model", met_model, "Model checkpoint")->required();
    metrics->add_option("--data", met_data, "Dataset for the empirical F_C target");
    add_state_flags(metrics, met_o);
    add_povm_flags(metrics, met_o);
    metrics->add_flag("--reference", met_reference,
                      "Also compare against the simulated reference state");
    metrics->add_option("--out", met_o.out, "Output JSON path")->required();
    add_config_stub(metrics);

    // scaling
    CLI::App* scaling = app.add_subcommand("scaling", "Sample-complexity sweep (N_s*)");
    add_state_flags(scaling, scal_o);
    add_povm_flags(scaling, scal_o);
    scaling->add_option("--seed", scal_o.seed, "Master seed")->capture_default_str();
    scaling->add_option("--qubits-list", scaling_opts.qubit_counts, "Qubit counts to sweep")
        ->delimiter(',')
        ->capture_default_str();
    scaling->add_option("--grid", scaling_opts.grid, "Shot-count grid (strictly increasing)")
        ->delimiter(',');
    scaling->add_option("--master-shots", scaling_opts.master_shots,
                        "Master dataset size (0: twice the grid maximum)")
        ->capture_default_str();
    scaling->add_option("--repeats", scaling_opts.repeats, "Subsample repeats per grid point")
        ->capture_default_str();
    scaling->add_option("--threshold", scaling_opts.threshold, "Classical fidelity threshold")
        ->capture_default_str();
    scaling->add_flag("--baseline,!--no-baseline", scaling_opts.baseline,
                      "Also run the empirical linear-inversion baseline (default on)");
    scaling->add_flag("--bayes", scaling_opts.bayes, "Bayes-correct histograms before training");
    scaling->add_option("--threads", scaling_opts.threads, "Worker threads (0: hardware)")
        ->capture_default_str();
    add_train_flags(scaling, scal_cfg);
    scaling->add_option("--out", scal_o.out, "Output path stem or .json path")->required();
    add_config_stub(scaling);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // nonzero parse failures map to usage errors
    }

    try {
        if (prepare->parsed()) return run_prepare(prep_o);
        if (sample->parsed()) return run_sample(samp_o);
        if (train_cmd->parsed()) return run_train(train_o, train_data, train_cfg);
        if (reconstruct->parsed()) return run_reconstruct(rec_o, rec_model, rec_mle);
        if (metrics->parsed()) return run_metrics(met_o, met_model, met_data, met_reference);
        if (scaling->parsed()) return run_scaling(scal_o, scaling_opts, scal_cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
