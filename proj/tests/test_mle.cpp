#include <doctest.h>

#include <cmath>

#include "qgt/metrics.hpp"
#include "qgt/mle.hpp"
#include "test_support.hpp"

using namespace qgt;
using testsupport::frobenius_distance;

using testsupport::perturbed_distribution;

TEST_SUITE_BEGIN("mle");

TEST_CASE("already-physical distributions are fixed points") {
    const PovmSet p = make_povm(PovmKind::Pauli4);
    NoiseModel noise;
    noise.depolarizing_p = 0.07;
    const DensityMatrix rho = densify(random_state(2, 6, 5), noise);
    const ProbDist dist = povm_distribution(rho, p);
    const PhysicalFit fit = mle_project(dist, p);
    CHECK(fit.objective < 1e-10);
    CHECK(fit.converged);
    CHECK(frobenius_distance(fit.rho.matrix, rho.matrix) < 1e-6);
}

TEST_CASE("maximally mixed distribution maps to the maximally mixed state") {
    const PovmSet p = make_povm(PovmKind::Pauli4);
    for (int n : {1, 2}) {
        const std::size_t dim = std::size_t(1) << n;
        CMatrix mixed = CMatrix::identity(dim) * cplx(1.0 / static_cast<double>(dim));
        DensityMatrix rho;
        rho.n_qubits = n;
        rho.matrix = mixed;
        const PhysicalFit fit = mle_project(povm_distribution(rho, p), p);
        CHECK(frobenius_distance(fit.rho.matrix, mixed) < 1e-8);
    }
}

TEST_CASE("constructed unphysical input comes back physical") {
    const PovmSet p = make_povm(PovmKind::Pauli4);
    const ProbDist dist = perturbed_distribution(p, 2, 0.02, 7);

    // the linear inversion really is indefinite
    const auto eig = hermitian_eig(reconstruct_linear_inversion(dist, p).matrix);
    CHECK(eig.eigenvalues.front() == doctest::Approx(-0.02).epsilon(1e-6));

    const PhysicalFit fit = mle_project(dist, p);
    const auto eig_fit = hermitian_eig(fit.rho.matrix);
    CHECK(eig_fit.eigenvalues.front() >= -1e-9);
    CHECK(std::abs(fit.rho.matrix.trace().real() - 1.0) < 1e-9);
    CHECK(fit.objective > 0.0);  // the target is genuinely outside the physical set
    CHECK(fit.p_mle.values.size() == dist.values.size());
    // p_mle is the Born image of the fitted state
    const ProbDist born = povm_distribution(fit.rho, p);
    for (std::size_t i = 0; i < born.values.size(); ++i)
        CHECK(std::abs(born.values[i] - fit.p_mle.values[i]) < 1e-9);
}

TEST_CASE("projection is idempotent") {
    const PovmSet p = make_povm(PovmKind::Pauli4);
    const ProbDist dist = perturbed_distribution(p, 2, 0.015, 31);
    const PhysicalFit first = mle_project(dist, p);
    const PhysicalFit second = mle_project(first.p_mle, p);
    CHECK(frobenius_distance(second.rho.matrix, first.rho.matrix) < 1e-6);
}

TEST_CASE("pauli6 input is rejected") {
    const PovmSet p6 = make_povm(PovmKind::Pauli6);
    ProbDist dist(1, 6);
    dist.values.assign(6, 1.0 / 6.0);
    CHECK_THROWS_AS(mle_project(dist, p6), std::invalid_argument);
}

TEST_CASE("iteration cap returns the best iterate unconverged") {
    const PovmSet p = make_povm(PovmKind::Pauli4);
    const ProbDist dist = perturbed_distribution(p, 2, 0.03, 13);
    MleConfig cfg;
    cfg.max_iters = 1;
    cfg.tol = 0.0;
    cfg.grad_tol = 0.0;
    const PhysicalFit fit = mle_project(dist, p, cfg);
    CHECK(!fit.converged);
    CHECK(fit.iterations <= 1);
    const auto eig = hermitian_eig(fit.rho.matrix);
    CHECK(eig.eigenvalues.front() >= -1e-9);  // still physical
}

TEST_SUITE_END();
