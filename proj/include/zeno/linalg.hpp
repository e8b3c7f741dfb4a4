#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// Dense complex linear algebra kernel: everything else in the library is
// built on the types and solvers in this header.  Matrices are small
// (dim <~ 2000 for the discretized-continuum models, <= 32 elsewhere), so
// all algorithms are straightforward dense ones chosen for accuracy.

namespace zeno {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

class HermiticityError : public Error {
  public:
    using Error::Error;
};

class ConvergenceError : public Error {
  public:
    using Error::Error;
};

// Eigenvector basis is ill-conditioned (Jordan-like structure).
class NearDefectiveError : public Error {
  public:
    using Error::Error;
};

/// Dense complex matrix, row-major storage.
class CMatrix {
  public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Complex(0.0, 0.0)) {}

    static CMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }
    bool square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Complex* row_data(std::size_t i) { return data_.data() + i * cols_; }
    const Complex* row_data(std::size_t i) const { return data_.data() + i * cols_; }

    CMatrix& operator+=(const CMatrix& other);
    CMatrix& operator-=(const CMatrix& other);
    CMatrix& operator*=(Complex s);

    friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
    friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
    friend CMatrix operator*(CMatrix a, Complex s) { return a *= s; }
    friend CMatrix operator*(Complex s, CMatrix a) { return a *= s; }
    friend CMatrix operator*(CMatrix a, double s) { return a *= Complex(s, 0.0); }
    friend CMatrix operator*(double s, CMatrix a) { return a *= Complex(s, 0.0); }

    friend CMatrix operator*(const CMatrix& a, const CMatrix& b);

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

CMatrix adjoint(const CMatrix& a);
Complex trace(const CMatrix& a);
CMatrix commutator(const CMatrix& a, const CMatrix& b);

double frobenius_norm(const CMatrix& a);
double max_abs(const CMatrix& a);
/// Largest singular value (via the Hermitian eigenproblem of A'A).
double spectral_norm(const CMatrix& a);

bool is_hermitian(const CMatrix& a, double tol = 1e-10);
bool is_skew_hermitian(const CMatrix& a, double tol = 1e-10);

CVector matvec(const CMatrix& a, const CVector& v);
Complex dot(const CVector& a, const CVector& b);  // conjugates the first argument
double norm(const CVector& v);
CMatrix outer(const CVector& a, const CVector& b);  // |a><b|

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix submatrix(const CMatrix& a, const std::vector<std::size_t>& rows,
                  const std::vector<std::size_t>& cols);

/// Result of herm_eig / gen_eig.  Eigenvalues are sorted by ascending real
/// part, then ascending imaginary part; column k of `vectors` is the
/// unit-norm right eigenvector for `values[k]`.  The first component of each
/// eigenvector with modulus > 1e-8 is made real and positive.
struct EigenDecomposition {
    std::vector<Complex> values;
    CMatrix vectors;
};

/// Hermitian eigensolver.  Cyclic Jacobi sweeps for small matrices; large
/// real-symmetric input (the discretized continuum) is routed through a
/// Householder tridiagonalization + implicit-shift QL path.
EigenDecomposition herm_eig(const CMatrix& a);

/// General (non-Hermitian) eigensolver: Hessenberg reduction + shifted QR
/// for the eigenvalues, eigenvectors from the kernel of (A - lambda).
/// Throws NearDefectiveError when the eigenvector basis has condition
/// number above 1e8 or a repeated eigenvalue lacks a full eigenspace.
EigenDecomposition gen_eig(const CMatrix& a);

/// Matrix exponential.  Hermitian / skew-Hermitian inputs go through the
/// spectral decomposition; everything else through scaling-and-squaring
/// with the degree-13 diagonal Pade approximant.
CMatrix expm(const CMatrix& a);

/// Orthonormal basis of { v : ||A v|| <= tol * ||A|| * ||v|| }, computed
/// from the small-singular-value eigenvectors of A'A.  Returns a rows x 0
/// matrix when the kernel is trivial.
CMatrix null_space(const CMatrix& a, double tol);

/// Solve A X = B with partial-pivoting LU.  A square, B conformal.
CMatrix lu_solve(CMatrix a, CMatrix b);
CMatrix inverse(const CMatrix& a);

namespace detail {
// Exposed for cross-validation in tests.
EigenDecomposition herm_eig_jacobi(const CMatrix& a);
EigenDecomposition herm_eig_real(const CMatrix& a);
std::vector<Complex> qr_eigenvalues(const CMatrix& a);
}  // namespace detail

}  // namespace zeno
