#include <doctest.h>

#include <cmath>

#include "qgt/sim.hpp"
#include "test_support.hpp"

using namespace qgt;

TEST_SUITE_BEGIN("sim");

TEST_CASE("X flips |0>") {
    Circuit c;
    c.n_qubits = 1;
    c.gates.push_back(Gate::x(0));
    const StateVector out = apply_circuit(c, StateVector::zero_state(1));
    CHECK(std::abs(out.amplitudes[0]) == doctest::Approx(0.0));
    CHECK(std::abs(out.amplitudes[1]) == doctest::Approx(1.0));
}

TEST_CASE("H-CZ-H builds the Bell state") {
    Circuit c;
    c.n_qubits = 2;
    c.gates = {Gate::h(0), Gate::h(1), Gate::cz(0, 1), Gate::h(1)};
    const StateVector out = apply_circuit(c, StateVector::zero_state(2));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(out.amplitudes[0].real() == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    CHECK(std::abs(out.amplitudes[1]) < 1e-12);
    CHECK(std::abs(out.amplitudes[2]) < 1e-12);
    CHECK(out.amplitudes[3].real() == doctest::Approx(inv_sqrt2).epsilon(1e-12));
}

TEST_CASE("circuits preserve the norm") {
    const StateVector s = random_state(4, 6, 123);
    CHECK(std::abs(s.norm_sq() - 1.0) < 1e-12);
}

TEST_CASE("gate target validation") {
    Circuit c;
    c.n_qubits = 2;
    c.gates = {Gate::x(2)};
    CHECK_THROWS_AS(apply_circuit(c, StateVector::zero_state(2)), std::invalid_argument);
    Circuit cz_same;
    cz_same.n_qubits = 2;
    cz_same.gates = {Gate::cz(1, 1)};
    CHECK_THROWS_AS(apply_circuit(cz_same, StateVector::zero_state(2)), std::invalid_argument);
}

TEST_CASE("build_ghz standard amplitudes") {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const StateVector bell = build_ghz(2, false);
    CHECK(bell.amplitudes[0].real() == doctest::Approx(inv_sqrt2));
    CHECK(bell.amplitudes[3].real() == doctest::Approx(inv_sqrt2));

    const StateVector ghz3 = build_ghz(3, false);
    CHECK(std::abs(ghz3.amplitudes[0]) == doctest::Approx(inv_sqrt2));
    CHECK(std::abs(ghz3.amplitudes[7]) == doctest::Approx(inv_sqrt2));

    const StateVector ghz5 = build_ghz(5, false);
    for (std::size_t i = 0; i < 32; ++i) {
        if (i == 0 || i == 31)
            CHECK(std::abs(ghz5.amplitudes[i]) == doctest::Approx(inv_sqrt2));
        else
            CHECK(std::abs(ghz5.amplitudes[i]) < 1e-12);
    }
}

TEST_CASE("experimental variant is |01>+|10> at n=2") {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const StateVector bell = build_ghz(2, true);
    CHECK(std::abs(bell.amplitudes[0]) < 1e-12);
    CHECK(bell.amplitudes[1].real() == doctest::Approx(inv_sqrt2));
    CHECK(bell.amplitudes[2].real() == doctest::Approx(inv_sqrt2));
    CHECK(std::abs(bell.amplitudes[3]) < 1e-12);
}

TEST_CASE("experimental variant equals an X layer after the standard circuit") {
    for (int n : {2, 3, 4, 5}) {
        const StateVector experimental = build_ghz(n, true);
        Circuit x_layer;
        x_layer.n_qubits = n;
        for (int q = 1; q < n; q += 2) x_layer.gates.push_back(Gate::x(q));
        const StateVector relabeled = apply_circuit(x_layer, build_ghz(n, false));
        REQUIRE(experimental.amplitudes.size() == relabeled.amplitudes.size());
        for (std::size_t i = 0; i < experimental.amplitudes.size(); ++i)
            CHECK(experimental.amplitudes[i] == relabeled.amplitudes[i]);
    }
}

TEST_CASE("build_ghz range check") {
    CHECK_THROWS_AS(build_ghz(1), std::invalid_argument);
    CHECK_THROWS_AS(build_ghz(9), std::invalid_argument);
}

TEST_CASE("random_state determinism and range checks") {
    const StateVector a = random_state(4, 8, 7);
    const StateVector b = random_state(4, 8, 7);
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i) CHECK(a.amplitudes[i] == b.amplitudes[i]);
    CHECK_THROWS_AS(random_state(4, 0, 7), std::invalid_argument);

    const StateVector c = random_state(4, 8, 8);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
        diff += std::abs(a.amplitudes[i] - c.amplitudes[i]);
    CHECK(diff > 1e-3);  // different seeds give different states
}

TEST_CASE("random circuit with zeroed angles is the identity") {
    Circuit c = random_circuit(3, 1, 42);
    for (Gate& g : c.gates) g.angle = 0.0;
    const StateVector out = apply_circuit(c, StateVector::zero_state(3));
    CHECK(std::abs(out.amplitudes[0] - cplx(1.0)) < 1e-12);
}

TEST_CASE("random_state at depth 8 is entangled") {
    const StateVector s = random_state(4, 8, 7);
    CHECK(std::abs(s.norm_sq() - 1.0) < 1e-10);
    CHECK(testsupport::half_chain_entropy_bits(s) > 0.5);
}

TEST_CASE("densify without noise is the pure projector") {
    const StateVector bell = build_ghz(2, false);
    const DensityMatrix rho = densify(bell, NoiseModel::ideal());
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(std::abs(rho.matrix.at(i, j) -
                           bell.amplitudes[i] * std::conj(bell.amplitudes[j])) < 1e-14);
}

TEST_CASE("full depolarizing on one qubit yields the mixed state") {
    NoiseModel noise;
    noise.depolarizing_p = 1.0;
    const DensityMatrix rho = densify(StateVector::zero_state(1), noise);
    CHECK(rho.matrix.at(0, 0).real() == doctest::Approx(0.5));
    CHECK(rho.matrix.at(1, 1).real() == doctest::Approx(0.5));
    CHECK(std::abs(rho.matrix.at(0, 1)) < 1e-14);
}

TEST_CASE("densify keeps trace one and near-PSD spectrum") {
    NoiseModel noise;
    noise.depolarizing_p = 0.07;
    for (std::uint64_t seed : {3ull, 4ull}) {
        const DensityMatrix rho = densify(random_state(3, 6, seed), noise);
        CHECK(std::abs(rho.matrix.trace().real() - 1.0) < 1e-12);
        const auto eig = hermitian_eig(rho.matrix);
        CHECK(eig.eigenvalues.front() >= -1e-12);
    }
}

TEST_CASE("rotated distributions of |0>") {
    const DensityMatrix rho = densify(StateVector::zero_state(1), NoiseModel::ideal());
    const ProbDist pz = rotated_z_distribution(rho, {Basis::Z});
    CHECK(pz.values[0] == doctest::Approx(1.0));
    CHECK(pz.values[1] == doctest::Approx(0.0));
    const ProbDist px = rotated_z_distribution(rho, {Basis::X});
    CHECK(px.values[0] == doctest::Approx(0.5));
    CHECK(px.values[1] == doctest::Approx(0.5));
}

TEST_CASE("Bell state in the xx basis") {
    // analytic Born rule: |<++|Bell>|^2 = |<--|Bell>|^2 = 1/2, cross terms 0
    const DensityMatrix rho = densify(build_ghz(2, false), NoiseModel::ideal());
    const ProbDist p = rotated_z_distribution(rho, {Basis::X, Basis::X});
    CHECK(p.values[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.values[1] == doctest::Approx(0.0));
    CHECK(p.values[2] == doctest::Approx(0.0));
    CHECK(p.values[3] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rotated distributions are normalized for random states") {
    NoiseModel noise;
    noise.depolarizing_p = 0.04;
    const DensityMatrix rho = densify(random_state(5, 6, 17), noise);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<Basis> bases(5);
        for (auto& b : bases) b = static_cast<Basis>(uniform_index(rng, 3));
        const ProbDist p = rotated_z_distribution(rho, bases);
        double sum = 0.0;
        for (double v : p.values) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("confusion matrix construction") {
    const CMatrix c = NoiseModel::confusion_from_fidelities(0.990, 0.899);
    CHECK(c.at(0, 0).real() == doctest::Approx(0.990));
    CHECK(c.at(1, 0).real() == doctest::Approx(0.010));
    CHECK(c.at(0, 1).real() == doctest::Approx(0.101));
    CHECK(c.at(1, 1).real() == doctest::Approx(0.899));
}

TEST_SUITE_END();
