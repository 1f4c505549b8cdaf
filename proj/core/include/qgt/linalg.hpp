#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qgt {

using cplx = std::complex<double>;

// Dense row-major complex matrix. Small by design: everything downstream
// lives in dimensions <= 256 (up to 8 qubits).
struct CMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<cplx> entries;

    CMatrix() = default;
    CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r * c) {}
    CMatrix(std::size_t r, std::size_t c, std::vector<cplx> e);

    static CMatrix identity(std::size_t n);

    cplx& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }

    CMatrix adjoint() const;
    cplx trace() const;
    double frobenius_norm() const;
    bool is_square() const { return rows == cols; }

    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);
    CMatrix& operator*=(cplx s);
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(CMatrix a, cplx s);
CMatrix operator*(cplx s, CMatrix a);
CMatrix operator*(const CMatrix& a, const CMatrix& b);

struct EigDecomposition {
    std::vector<double> eigenvalues;  // ascending
    CMatrix eigenvectors;             // orthonormal columns, column i pairs with eigenvalues[i]
};

// Kronecker product, dims (a.rows*b.rows) x (a.cols*b.cols).
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Cyclic complex Jacobi diagonalization of a Hermitian matrix. Rejects input
// with ||a - a^dag||_F > 1e-8 * max(1, ||a||_F); gives up after 100 sweeps
// if the off-diagonal Frobenius norm stays above 1e-12 * ||a||_F.
EigDecomposition hermitian_eig(const CMatrix& a);

// Hermitian PSD square root. Eigenvalues in [-1e-6, 0) are clipped to zero;
// anything below -1e-6 is rejected as not positive semidefinite.
CMatrix psd_sqrt(const CMatrix& a);

// Gauss-Jordan inverse with partial pivoting; for the small overlap and
// confusion matrices only. Throws on singular input.
CMatrix inverse(const CMatrix& a);

}  // namespace qgt
