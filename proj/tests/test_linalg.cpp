#include <doctest.h>

#include <cmath>

#include "qgt/linalg.hpp"
#include "test_support.hpp"

using namespace qgt;
using testsupport::frobenius_distance;

namespace {

CMatrix sigma_x() {
    CMatrix m(2, 2);
    m.at(0, 1) = 1.0;
    m.at(1, 0) = 1.0;
    return m;
}

}  // namespace

TEST_SUITE_BEGIN("linalg");

TEST_CASE("kron identity and sigma_x") {
    const CMatrix i2 = CMatrix::identity(2);
    const CMatrix i4 = kron(i2, i2);
    CHECK(frobenius_distance(i4, CMatrix::identity(4)) == doctest::Approx(0.0));

    const CMatrix xx = kron(sigma_x(), sigma_x());
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(xx.at(i, j) == cplx(i + j == 3 ? 1.0 : 0.0));
}

TEST_CASE("kron is associative on integer matrices") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        CMatrix a(2, 3), b(3, 2), c(2, 2);
        for (auto& e : a.entries) e = static_cast<double>(uniform_index(rng, 7)) - 3.0;
        for (auto& e : b.entries) e = static_cast<double>(uniform_index(rng, 7)) - 3.0;
        for (auto& e : c.entries) e = static_cast<double>(uniform_index(rng, 7)) - 3.0;
        const CMatrix lhs = kron(kron(a, b), c);
        const CMatrix rhs = kron(a, kron(b, c));
        REQUIRE(lhs.entries.size() == rhs.entries.size());
        for (std::size_t i = 0; i < lhs.entries.size(); ++i)
            CHECK(lhs.entries[i] == rhs.entries[i]);
    }
}

TEST_CASE("hermitian_eig on identity and sigma_x") {
    const auto eig_i = hermitian_eig(CMatrix::identity(4));
    for (double lambda : eig_i.eigenvalues) CHECK(lambda == doctest::Approx(1.0).epsilon(1e-12));

    const auto eig_x = hermitian_eig(sigma_x());
    CHECK(eig_x.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(eig_x.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hermitian_eig residuals on random 8x8 matrices") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        const CMatrix a = testsupport::random_hermitian(8, seed);
        const auto eig = hermitian_eig(a);
        const double scale = a.frobenius_norm();
        // A v_i = lambda_i v_i
        for (std::size_t i = 0; i < 8; ++i) {
            double resid = 0.0;
            for (std::size_t r = 0; r < 8; ++r) {
                cplx av = 0.0;
                for (std::size_t c = 0; c < 8; ++c) av += a.at(r, c) * eig.eigenvectors.at(c, i);
                resid += std::norm(av - eig.eigenvalues[i] * eig.eigenvectors.at(r, i));
            }
            CHECK(std::sqrt(resid) < 1e-9 * scale);
        }
        // V^dag V = I
        const CMatrix vtv = eig.eigenvectors.adjoint() * eig.eigenvectors;
        CHECK(frobenius_distance(vtv, CMatrix::identity(8)) < 1e-9);
        // ascending order
        for (std::size_t i = 1; i < 8; ++i)
            CHECK(eig.eigenvalues[i] >= eig.eigenvalues[i - 1]);
    }
}

TEST_CASE("hermitian_eig trace and determinant identities") {
    for (std::uint64_t seed : {21ull, 22ull, 23ull, 24ull, 25ull, 26ull, 27ull, 28ull}) {
        const CMatrix a = testsupport::random_hermitian(6, seed);
        const auto eig = hermitian_eig(a);
        double sum = 0.0, prod = 1.0;
        for (double l : eig.eigenvalues) {
            sum += l;
            prod *= l;
        }
        CHECK(std::abs(sum - a.trace().real()) < 1e-9 * a.frobenius_norm());
        const double det = testsupport::determinant(a).real();
        CHECK(prod == doctest::Approx(det).epsilon(1e-6));
    }
}

TEST_CASE("hermitian_eig rejects non-Hermitian input") {
    CMatrix m(2, 2);
    m.at(0, 1) = 1.0;  // strictly upper triangular
    CHECK_THROWS_AS(hermitian_eig(m), std::invalid_argument);
}

TEST_CASE("hermitian_eig is deterministic") {
    const CMatrix a = testsupport::random_hermitian(6, 99);
    const auto e1 = hermitian_eig(a);
    const auto e2 = hermitian_eig(a);
    for (std::size_t i = 0; i < e1.eigenvalues.size(); ++i)
        CHECK(e1.eigenvalues[i] == e2.eigenvalues[i]);
    for (std::size_t i = 0; i < e1.eigenvectors.entries.size(); ++i)
        CHECK(e1.eigenvectors.entries[i] == e2.eigenvectors.entries[i]);
}

TEST_CASE("psd_sqrt of diagonal and projector") {
    CMatrix d(2, 2);
    d.at(0, 0) = 4.0;
    d.at(1, 1) = 9.0;
    const CMatrix s = psd_sqrt(d);
    CHECK(s.at(0, 0).real() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.at(1, 1).real() == doctest::Approx(3.0).epsilon(1e-12));

    // rank-1 projector is its own square root
    CMatrix proj(2, 2);
    const double c = std::cos(0.3), sn = std::sin(0.3);
    proj.at(0, 0) = c * c;
    proj.at(0, 1) = c * sn;
    proj.at(1, 0) = c * sn;
    proj.at(1, 1) = sn * sn;
    CHECK(frobenius_distance(psd_sqrt(proj), proj) < 1e-10);
}

TEST_CASE("psd_sqrt squares back to the input") {
    for (std::uint64_t seed : {31ull, 32ull, 33ull}) {
        const CMatrix a = testsupport::random_psd(6, seed);
        const CMatrix s = psd_sqrt(a);
        CHECK(frobenius_distance(s * s, a) < 1e-8 * std::max(1.0, a.frobenius_norm()));
        // idempotence of the square-root path
        CHECK(frobenius_distance(psd_sqrt(s * s), s) < 1e-7);
    }
}

TEST_CASE("psd_sqrt rejects indefinite input") {
    CMatrix m(2, 2);
    m.at(0, 0) = 1.0;
    m.at(1, 1) = -0.5;
    CHECK_THROWS_AS(psd_sqrt(m), std::invalid_argument);
}

TEST_CASE("inverse round trip and singular detection") {
    const CMatrix a = testsupport::random_hermitian(4, 77) + CMatrix::identity(4) * cplx(5.0);
    const CMatrix ainv = inverse(a);
    CHECK(frobenius_distance(a * ainv, CMatrix::identity(4)) < 1e-10);

    CMatrix sing(2, 2);
    sing.at(0, 0) = 1.0;
    sing.at(0, 1) = 2.0;
    sing.at(1, 0) = 2.0;
    sing.at(1, 1) = 4.0;
    CHECK_THROWS_AS(inverse(sing), std::runtime_error);
}

TEST_CASE("CMatrix rejects non-finite entries") {
    std::vector<cplx> bad = {1.0, cplx(std::nan(""), 0.0), 0.0, 1.0};
    CHECK_THROWS_AS(CMatrix(2, 2, bad), std::invalid_argument);
}

TEST_SUITE_END();
