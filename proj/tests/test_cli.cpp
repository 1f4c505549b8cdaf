// Drives the installed binary end to end; the harness passes its path via
// the QGT_CLI environment variable.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qgt/data.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("QGT_CLI");
    REQUIRE_MESSAGE(p != nullptr, "QGT_CLI must point at the qgt binary");
    return p;
}

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    const fs::path dir = fs::temp_directory_path();
    const fs::path out_path = dir / "qgt_cli_stdout.txt";
    const fs::path err_path = dir / "qgt_cli_stderr.txt";
    const std::string cmd =
        cli_path() + " " + args + " > " + out_path.string() + " 2> " + err_path.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

fs::path tmp_file(const std::string& name) { return fs::temp_directory_path() / name; }

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("sample writes the documented header") {
    const fs::path data = tmp_file("qgt_cli_sample.txt");
    const RunResult r = run_cli("sample --qubits 2 --state ghz --povm pauli4 --shots 1000 "
                                "--seed 1 --noise-depol 0 --out " +
                                data.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    std::ifstream in(data);
    std::string header;
    std::getline(in, header);
    CHECK(header == "#povm=pauli4 qubits=2 seed=1");
    const qgt::OutcomeDataset d = qgt::load_dataset(data.string());
    CHECK(d.n_shots() == 1000);
    fs::remove(data);
}

TEST_CASE("unknown flags and bad enum values exit 2") {
    CHECK(run_cli("sample --frobnicate 1 --out x.txt").exit_code == 2);
    CHECK(run_cli("definitely-not-a-subcommand").exit_code == 2);
    const RunResult r = run_cli("sample --povm pauli5 --out x.txt");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("--povm") != std::string::npos);
}

TEST_CASE("help exits zero") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("sample --help").exit_code == 0);
}

TEST_CASE("config file mirrors the flags") {
    const fs::path cfg = tmp_file("qgt_cli_config.cfg");
    const fs::path data = tmp_file("qgt_cli_config_data.txt");
    {
        std::ofstream out(cfg);
        out << "# sampling settings\n";
        out << "qubits = 3\n";
        out << "povm = pauli6\n";
        out << "shots = 120\n";
        out << "seed = 9\n";
        out << "noise-depol = 0\n";
    }
    const RunResult r =
        run_cli("sample --config " + cfg.string() + " --out " + data.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    std::ifstream in(data);
    std::string header;
    std::getline(in, header);
    CHECK(header == "#povm=pauli6 qubits=3 seed=9");
    fs::remove(cfg);
    fs::remove(data);
}

TEST_CASE("prepare emits the state as json") {
    const fs::path out = tmp_file("qgt_cli_state.json");
    const RunResult r =
        run_cli("prepare --qubits 2 --state ghz-exp --noise-depol 0 --out " + out.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    const auto j = nlohmann::json::parse(std::ifstream(out));
    CHECK(j["kind"] == "state");
    CHECK(j["n_qubits"] == 2);
    const auto& re = j["amplitudes"]["re"];
    REQUIRE(re.size() == 4);
    CHECK(std::abs(re[1].get<double>() - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(re[2].get<double>() - 1.0 / std::sqrt(2.0)) < 1e-12);
    fs::remove(out);
}

TEST_CASE("train, reconstruct and metrics pipeline") {
    const fs::path data = tmp_file("qgt_cli_pipe_data.txt");
    const fs::path ckpt = tmp_file("qgt_cli_pipe_model.ckpt");
    const fs::path rec = tmp_file("qgt_cli_pipe_rec.json");
    const fs::path met = tmp_file("qgt_cli_pipe_metrics.json");

    RunResult r = run_cli("sample --qubits 2 --state ghz --shots 1500 --seed 3 "
                          "--noise-depol 0 --out " +
                          data.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);

    r = run_cli("train --data " + data.string() + " --hidden 12 --epochs 25 --seed 4 --out " +
                ckpt.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(ckpt.string() + ".trace.json"));

    r = run_cli("reconstruct --model " + ckpt.string() + " --out " + rec.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    const auto rec_json = nlohmann::json::parse(std::ifstream(rec));
    CHECK(rec_json["kind"] == "reconstruction");
    CHECK(rec_json["min_eigenvalue"].get<double>() >= -1e-9);
    CHECK(std::abs(rec_json["trace"].get<double>() - 1.0) < 1e-9);
    CHECK(rec_json["mle"]["converged"].is_boolean());

    r = run_cli("metrics --model " + ckpt.string() + " --data " + data.string() +
                " --state ghz --qubits 2 --noise-depol 0 --reference --out " + met.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    const auto met_json = nlohmann::json::parse(std::ifstream(met));
    CHECK(met_json["f_c"].get<double>() > 0.9);
    CHECK(met_json["f_q"].get<double>() > 0.8);
    CHECK(met_json["correlations"].size() == 1);

    for (const fs::path& p :
         {data, ckpt, fs::path(ckpt.string() + ".trace.json"), rec, met})
        fs::remove(p);
}

TEST_CASE("scaling subcommand writes json and csv outputs") {
    const fs::path stem = tmp_file("qgt_cli_scaling");
    const RunResult r = run_cli(
        "scaling --qubits-list 2 --grid 60,120 --master-shots 400 --repeats 2 --hidden 6 "
        "--epochs 3 --threshold 0.5 --noise-depol 0 --seed 11 --threads 2 --out " +
        stem.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    const auto j = nlohmann::json::parse(std::ifstream(stem.string() + ".json"));
    CHECK(j["report_version"] == 1);
    CHECK(j["kind"] == "scaling");
    CHECK(j["rnn"]["curves"].size() == 1);
    CHECK(j.contains("baseline"));
    for (const char* suffix : {".json", "_cells.csv", "_curve.csv", "_summary.csv"}) {
        CHECK(fs::exists(stem.string() + suffix));
        fs::remove(stem.string() + suffix);
    }
}

TEST_CASE("runtime failures exit 1 with a diagnostic") {
    const RunResult r = run_cli("train --data /nonexistent/path.txt --out x.ckpt");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("error") != std::string::npos);
}

TEST_SUITE_END();
