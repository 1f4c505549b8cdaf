#include "qgt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qgt {

namespace {

bool all_finite(const std::vector<cplx>& v) {
    for (const cplx& x : v) {
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    }
    return true;
}

double off_diagonal_norm(const CMatrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            if (i != j) s += std::norm(m.at(i, j));
    return std::sqrt(s);
}

}  // namespace

CMatrix::CMatrix(std::size_t r, std::size_t c, std::vector<cplx> e)
    : rows(r), cols(c), entries(std::move(e)) {
    if (entries.size() != rows * cols)
        throw std::invalid_argument("CMatrix: entry count does not match rows*cols");
    if (!all_finite(entries))
        throw std::invalid_argument("CMatrix: non-finite entry");
}

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::adjoint() const {
    CMatrix m(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m.at(j, i) = std::conj(at(i, j));
    return m;
}

cplx CMatrix::trace() const {
    if (!is_square()) throw std::invalid_argument("trace: matrix not square");
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows; ++i) t += at(i, i);
    return t;
}

double CMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const cplx& x : entries) s += std::norm(x);
    return std::sqrt(s);
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    if (rows != o.rows || cols != o.cols) throw std::invalid_argument("matrix add: shape mismatch");
    for (std::size_t k = 0; k < entries.size(); ++k) entries[k] += o.entries[k];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    if (rows != o.rows || cols != o.cols) throw std::invalid_argument("matrix sub: shape mismatch");
    for (std::size_t k = 0; k < entries.size(); ++k) entries[k] -= o.entries[k];
    return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
    for (cplx& x : entries) x *= s;
    return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(CMatrix a, cplx s) { return a *= s; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matrix mul: inner dims differ");
    CMatrix m(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const cplx aik = a.at(i, k);
            if (aik == cplx(0.0)) continue;
            for (std::size_t j = 0; j < b.cols; ++j) m.at(i, j) += aik * b.at(k, j);
        }
    }
    return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const std::size_t kMaxDim = std::size_t(1) << 20;
    if (a.rows != 0 && b.rows > kMaxDim / a.rows)
        throw std::invalid_argument("kron: dimension product overflow");
    if (a.cols != 0 && b.cols > kMaxDim / a.cols)
        throw std::invalid_argument("kron: dimension product overflow");
    CMatrix m(a.rows * b.rows, a.cols * b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) {
            const cplx aij = a.at(i, j);
            for (std::size_t k = 0; k < b.rows; ++k)
                for (std::size_t l = 0; l < b.cols; ++l)
                    m.at(i * b.rows + k, j * b.cols + l) = aij * b.at(k, l);
        }
    return m;
}

EigDecomposition hermitian_eig(const CMatrix& a) {
    if (!a.is_square()) throw std::invalid_argument("hermitian_eig: matrix not square");
    if (!all_finite(a.entries)) throw std::invalid_argument("hermitian_eig: non-finite entry");
    const std::size_t n = a.rows;
    const double anorm = a.frobenius_norm();
    {
        double herm_defect = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                herm_defect += std::norm(a.at(i, j) - std::conj(a.at(j, i)));
        if (std::sqrt(herm_defect) > 1e-8 * std::max(1.0, anorm))
            throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
    }

    // Work on the exactly-Hermitian part; round-off in the input goes away here.
    CMatrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b.at(i, j) = 0.5 * (a.at(i, j) + std::conj(a.at(j, i)));

    CMatrix v = CMatrix::identity(n);
    const double threshold = 1e-12 * anorm;
    const int max_sweeps = 100;

    bool converged = (n <= 1) || off_diagonal_norm(b) <= threshold;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx beta = b.at(p, q);
                const double babs = std::abs(beta);
                if (babs == 0.0) continue;
                const cplx phase = beta / babs;
                const double alpha = b.at(p, p).real();
                const double gamma = b.at(q, q).real();
                const double tau = (gamma - alpha) / (2.0 * babs);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx se = s * phase;           // rotation entry (p,q)
                const cplx se_conj = s * std::conj(phase);

                // b <- R^dag b R with R = I except R[p][p]=c, R[p][q]=se,
                // R[q][p]=-conj(se), R[q][q]=c. Columns first, then rows.
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx bkp = b.at(k, p), bkq = b.at(k, q);
                    b.at(k, p) = c * bkp - se_conj * bkq;
                    b.at(k, q) = se * bkp + c * bkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx bpk = b.at(p, k), bqk = b.at(q, k);
                    b.at(p, k) = c * bpk - se * bqk;
                    b.at(q, k) = se_conj * bpk + c * bqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx vkp = v.at(k, p), vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - se_conj * vkq;
                    v.at(k, q) = se * vkp + c * vkq;
                }
                b.at(p, q) = 0.0;
                b.at(q, p) = 0.0;
                b.at(p, p) = b.at(p, p).real();
                b.at(q, q) = b.at(q, q).real();
            }
        }
        converged = off_diagonal_norm(b) <= threshold;
    }
    if (!converged) throw std::runtime_error("hermitian_eig: Jacobi sweeps did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return b.at(i, i).real() < b.at(j, j).real();
    });

    EigDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = CMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = b.at(order[j], order[j]).real();
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors.at(i, j) = v.at(i, order[j]);
    }
    return out;
}

CMatrix psd_sqrt(const CMatrix& a) {
    EigDecomposition eig = hermitian_eig(a);
    // Eigenvalues inside the solver's round-off resolution are exact zeros;
    // letting them through would seed sqrt(eps)-sized ghost components.
    const double lambda_max =
        eig.eigenvalues.empty() ? 0.0 : std::max(std::abs(eig.eigenvalues.front()),
                                                 std::abs(eig.eigenvalues.back()));
    const double floor = 1e-12 * lambda_max;
    std::vector<double> roots(eig.eigenvalues.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        double lambda = eig.eigenvalues[i];
        if (lambda < -1e-6)
            throw std::invalid_argument("psd_sqrt: matrix is not positive semidefinite");
        roots[i] = lambda <= floor ? 0.0 : std::sqrt(lambda);
    }
    const std::size_t n = a.rows;
    CMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += eig.eigenvectors.at(i, k) * roots[k] * std::conj(eig.eigenvectors.at(j, k));
            out.at(i, j) = s;
        }
    return out;
}

CMatrix inverse(const CMatrix& a) {
    if (!a.is_square()) throw std::invalid_argument("inverse: matrix not square");
    const std::size_t n = a.rows;
    CMatrix work = a;
    CMatrix inv = CMatrix::identity(n);
    const double scale = std::max(1.0, a.frobenius_norm());
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(work.at(r, col)) > std::abs(work.at(pivot, col))) pivot = r;
        if (std::abs(work.at(pivot, col)) < 1e-12 * scale)
            throw std::runtime_error("inverse: matrix is singular");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(work.at(pivot, j), work.at(col, j));
                std::swap(inv.at(pivot, j), inv.at(col, j));
            }
        }
        const cplx d = work.at(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            work.at(col, j) /= d;
            inv.at(col, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = work.at(r, col);
            if (f == cplx(0.0)) continue;
            for (std::size_t j = 0; j < n; ++j) {
                work.at(r, j) -= f * work.at(col, j);
                inv.at(r, j) -= f * inv.at(col, j);
            }
        }
    }
    return inv;
}

}  // namespace qgt
