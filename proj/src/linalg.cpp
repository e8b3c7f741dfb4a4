#include "zeno/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zeno {

namespace {

void check_same_shape(const CMatrix& a, const CMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError(std::string(what) + ": shape mismatch");
}

void check_square(const CMatrix& a, const char* what) {
    if (!a.square())
        throw DimensionError(std::string(what) + ": matrix is not square");
}

double hypot2(double x, double y) { return std::sqrt(x * x + y * y); }

}  // namespace

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
    check_same_shape(*this, other, "operator+");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
    check_same_shape(*this, other, "operator-");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
    for (auto& x : data_) x *= s;
    return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("operator*: inner dimensions differ");
    CMatrix c(a.rows(), b.cols());
    const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        Complex* ci = c.row_data(i);
        for (std::size_t k = 0; k < m; ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex(0.0, 0.0)) continue;
            const Complex* bk = b.row_data(k);
            for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

CMatrix adjoint(const CMatrix& a) {
    CMatrix b(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) b(j, i) = std::conj(a(i, j));
    return b;
}

Complex trace(const CMatrix& a) {
    check_square(a, "trace");
    Complex t = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

double frobenius_norm(const CMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

double max_abs(const CMatrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

bool is_hermitian(const CMatrix& a, double tol) {
    if (!a.square()) return false;
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            diff += std::norm(a(i, j) - std::conj(a(j, i)));
            scale += std::norm(a(i, j));
        }
    return std::sqrt(diff) <= tol * std::max(1.0, std::sqrt(scale));
}

bool is_skew_hermitian(const CMatrix& a, double tol) {
    if (!a.square()) return false;
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            diff += std::norm(a(i, j) + std::conj(a(j, i)));
            scale += std::norm(a(i, j));
        }
    return std::sqrt(diff) <= tol * std::max(1.0, std::sqrt(scale));
}

CVector matvec(const CMatrix& a, const CVector& v) {
    if (a.cols() != v.size()) throw DimensionError("matvec: shape mismatch");
    CVector w(a.rows(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const Complex* row = a.row_data(i);
        Complex s = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) s += row[j] * v[j];
        w[i] = s;
    }
    return w;
}

Complex dot(const CVector& a, const CVector& b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    Complex s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm(const CVector& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

CMatrix outer(const CVector& a, const CVector& b) {
    CMatrix m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * std::conj(b[j]);
    return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const Complex aij = a(i, j);
            if (aij == Complex(0.0, 0.0)) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return c;
}

CMatrix submatrix(const CMatrix& a, const std::vector<std::size_t>& rows,
                  const std::vector<std::size_t>& cols) {
    CMatrix s(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = a(rows[i], cols[j]);
    return s;
}

// ---------------------------------------------------------------------------
// Eigenvalue ordering, phase convention, degenerate-cluster orthonormalization
// ---------------------------------------------------------------------------

namespace {

void fix_phase(CMatrix& vectors, std::size_t col) {
    const std::size_t n = vectors.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const Complex x = vectors(i, col);
        if (std::abs(x) > 1e-8) {
            const Complex phase = x / std::abs(x);
            for (std::size_t k = 0; k < n; ++k) vectors(k, col) /= phase;
            return;
        }
    }
}

void normalize_column(CMatrix& vectors, std::size_t col) {
    double s = 0.0;
    for (std::size_t i = 0; i < vectors.rows(); ++i) s += std::norm(vectors(i, col));
    s = std::sqrt(s);
    if (s > 0.0)
        for (std::size_t i = 0; i < vectors.rows(); ++i) vectors(i, col) /= s;
}

// Sorts eigenpairs by (Re, Im) ascending; stable so degenerate clusters keep
// discovery order.
void sort_eigenpairs(EigenDecomposition& eig) {
    const std::size_t n = eig.values.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        if (eig.values[a].real() != eig.values[b].real())
            return eig.values[a].real() < eig.values[b].real();
        return eig.values[a].imag() < eig.values[b].imag();
    });
    std::vector<Complex> vals(n);
    CMatrix vecs(eig.vectors.rows(), n);
    for (std::size_t k = 0; k < n; ++k) {
        vals[k] = eig.values[perm[k]];
        for (std::size_t i = 0; i < eig.vectors.rows(); ++i)
            vecs(i, k) = eig.vectors(i, perm[k]);
    }
    eig.values = std::move(vals);
    eig.vectors = std::move(vecs);
}

// Gram-Schmidt within clusters of (numerically) equal real eigenvalues, then
// phase-fix every column.  Input must already be sorted.
void polish_hermitian_eigenvectors(EigenDecomposition& eig, double cluster_tol) {
    const std::size_t n = eig.values.size();
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start + 1;
        while (end < n && eig.values[end].real() - eig.values[end - 1].real() <= cluster_tol) ++end;
        for (std::size_t k = start; k < end; ++k) {
            for (std::size_t j = start; j < k; ++j) {
                Complex ov = 0.0;
                for (std::size_t i = 0; i < eig.vectors.rows(); ++i)
                    ov += std::conj(eig.vectors(i, j)) * eig.vectors(i, k);
                for (std::size_t i = 0; i < eig.vectors.rows(); ++i)
                    eig.vectors(i, k) -= ov * eig.vectors(i, j);
            }
            normalize_column(eig.vectors, k);
        }
        start = end;
    }
    for (std::size_t k = 0; k < n; ++k) fix_phase(eig.vectors, k);
}

}  // namespace

// ---------------------------------------------------------------------------
// Hermitian eigensolver
// ---------------------------------------------------------------------------

namespace detail {

// Cyclic Jacobi for complex Hermitian matrices.  The (p,q) rotation is the
// unitary that diagonalizes the 2x2 pivot block exactly; off-norm decreases
// monotonically and convergence is quadratic once sweeps settle.
EigenDecomposition herm_eig_jacobi(const CMatrix& input) {
    const std::size_t n = input.rows();
    CMatrix a = input;
    CMatrix v = CMatrix::identity(n);

    const double scale = std::max(1.0, frobenius_norm(a));
    const double stop = 1e-14 * scale;
    const int max_sweeps = 60;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        off = std::sqrt(2.0 * off);
        if (off <= stop) break;
        if (sweep == max_sweeps - 1)
            throw ConvergenceError("herm_eig: Jacobi sweeps did not converge");

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = std::abs(a(p, q));
                if (apq <= 1e-300) continue;
                const Complex phase = a(p, q) / apq;  // a_pq = |a_pq| e^{i phi}
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * apq);
                // smaller-magnitude root of t^2 - 2 tau t ... picks |theta|<=pi/4
                const double t = (tau >= 0.0 ? -1.0 : 1.0) / (std::abs(tau) + std::sqrt(tau * tau + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                const double app = a(p, p).real(), aqq = a(q, q).real();
                a(p, p) = app * c * c + aqq * s * s + 2.0 * c * s * apq;
                a(q, q) = aqq * c * c + app * s * s - 2.0 * c * s * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const Complex akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * c + akq * s * std::conj(phase);
                    a(k, q) = akq * c - akp * s * phase;
                    a(p, k) = std::conj(a(k, p));
                    a(q, k) = std::conj(a(k, q));
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * c + vkq * s * std::conj(phase);
                    v(k, q) = vkq * c - vkp * s * phase;
                }
            }
        }
    }

    EigenDecomposition eig;
    eig.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) eig.values[i] = Complex(a(i, i).real(), 0.0);
    eig.vectors = std::move(v);
    return eig;
}

// Real symmetric path: Householder tridiagonalization followed by
// implicit-shift QL with eigenvector accumulation.  Used for the large
// (continuum-dilation) matrices where Jacobi sweeps would be too slow.
EigenDecomposition herm_eig_real(const CMatrix& input) {
    const std::size_t n = input.rows();
    std::vector<double> z(n * n);  // accumulates transforms, row-major
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) z[i * n + j] = input(i, j).real();

    std::vector<double> d(n, 0.0), e(n, 0.0);

    // tred2: reduce to symmetric tridiagonal, accumulating transforms in z.
    for (std::size_t ii = n; ii-- > 1;) {
        const std::size_t i = ii;
        const std::size_t l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double sc = 0.0;
            for (std::size_t k = 0; k <= l; ++k) sc += std::abs(z[i * n + k]);
            if (sc == 0.0) {
                e[i] = z[i * n + l];
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    z[i * n + k] /= sc;
                    h += z[i * n + k] * z[i * n + k];
                }
                double f = z[i * n + l];
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = sc * g;
                h -= f * g;
                z[i * n + l] = f - g;
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    z[j * n + i] = z[i * n + j] / h;
                    g = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g += z[j * n + k] * z[i * n + k];
                    for (std::size_t k = j + 1; k <= l; ++k) g += z[k * n + j] * z[i * n + k];
                    e[j] = g / h;
                    f += e[j] * z[i * n + j];
                }
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    f = z[i * n + j];
                    e[j] = g = e[j] - hh * f;
                    for (std::size_t k = 0; k <= j; ++k)
                        z[j * n + k] -= f * e[k] + g * z[i * n + k];
                }
            }
        } else {
            e[i] = z[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            for (std::size_t j = 0; j < i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k < i; ++k) g += z[i * n + k] * z[k * n + j];
                for (std::size_t k = 0; k < i; ++k) z[k * n + j] -= g * z[k * n + i];
            }
        }
        d[i] = z[i * n + i];
        z[i * n + i] = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            z[i * n + j] = 0.0;
            z[j * n + i] = 0.0;
        }
    }

    // tqli: implicit-shift QL on the tridiagonal (d, e).
    if (n > 1) {
        for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
        e[n - 1] = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            int iter = 0;
            std::size_t m;
            do {
                for (m = l; m + 1 < n; ++m) {
                    const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                    if (std::abs(e[m]) <= 1e-16 * dd + 1e-300) break;
                }
                if (m != l) {
                    if (iter++ == 50) throw ConvergenceError("herm_eig: QL did not converge");
                    double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                    double r = hypot2(g, 1.0);
                    g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
                    double s = 1.0, c = 1.0, p = 0.0;
                    bool underflow = false;
                    for (std::size_t i = m; i-- > l;) {
                        double f = s * e[i];
                        const double b = c * e[i];
                        r = hypot2(f, g);
                        e[i + 1] = r;
                        if (r == 0.0) {
                            d[i + 1] -= p;
                            e[m] = 0.0;
                            underflow = true;
                            break;
                        }
                        s = f / r;
                        c = g / r;
                        g = d[i + 1] - p;
                        r = (d[i] - g) * s + 2.0 * c * b;
                        p = s * r;
                        d[i + 1] = g + p;
                        g = c * r - b;
                        for (std::size_t k = 0; k < n; ++k) {
                            double* zk = &z[k * n];
                            f = zk[i + 1];
                            zk[i + 1] = s * zk[i] + c * f;
                            zk[i] = c * zk[i] - s * f;
                        }
                    }
                    if (underflow) continue;
                    d[l] -= p;
                    e[l] = g;
                    e[m] = 0.0;
                }
            } while (m != l);
        }
    }

    EigenDecomposition eig;
    eig.values.resize(n);
    eig.vectors = CMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        eig.values[i] = Complex(d[i], 0.0);
        for (std::size_t k = 0; k < n; ++k) eig.vectors(k, i) = z[k * n + i];
    }
    return eig;
}

}  // namespace detail

EigenDecomposition herm_eig(const CMatrix& a) {
    check_square(a, "herm_eig");
    if (!is_hermitian(a, 1e-10))
        throw HermiticityError("herm_eig: input is not Hermitian within tolerance");
    const std::size_t n = a.rows();
    if (n == 0) return {};

    double max_imag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) max_imag = std::max(max_imag, std::abs(a(i, j).imag()));
    const double scale = std::max(1.0, max_abs(a));

    EigenDecomposition eig = (n > 64 && max_imag <= 1e-14 * scale)
                                 ? detail::herm_eig_real(a)
                                 : detail::herm_eig_jacobi(a);

    sort_eigenpairs(eig);
    polish_hermitian_eigenvectors(eig, 1e-12 * scale * n);
    return eig;
}

// ---------------------------------------------------------------------------
// General eigensolver: Hessenberg + shifted QR, eigenvectors via null spaces
// ---------------------------------------------------------------------------

namespace {

// Householder similarity reduction to upper Hessenberg form.
CMatrix hessenberg(CMatrix a) {
    const std::size_t n = a.rows();
    if (n < 3) return a;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double colnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) colnorm += std::norm(a(i, k));
        colnorm = std::sqrt(colnorm);
        if (colnorm <= 1e-300) continue;

        const Complex x0 = a(k + 1, k);
        const Complex phase = (std::abs(x0) > 0.0) ? x0 / std::abs(x0) : Complex(1.0, 0.0);
        const Complex alpha = -phase * colnorm;

        CVector v(n, Complex(0.0, 0.0));
        for (std::size_t i = k + 1; i < n; ++i) v[i] = a(i, k);
        v[k + 1] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
        if (vnorm2 <= 1e-300) continue;

        // A <- (I - 2 v v'/v'v) A (I - 2 v v'/v'v)
        for (std::size_t j = 0; j < n; ++j) {
            Complex s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * a(i, j);
            s *= 2.0 / vnorm2;
            for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
            s *= 2.0 / vnorm2;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * std::conj(v[j]);
        }
    }
    return a;
}

// Eigenvalues of a complex upper Hessenberg matrix by explicit shifted QR
// with Givens rotations.  Wilkinson shift, occasional exceptional shift.
std::vector<Complex> hessenberg_qr_eigenvalues(CMatrix h) {
    const std::size_t n = h.rows();
    std::vector<Complex> w(n, Complex(0.0, 0.0));
    if (n == 0) return w;

    const double scale = std::max(1.0, frobenius_norm(h));
    std::size_t en = n - 1;
    int its = 0;
    const int max_its = 60;

    while (true) {
        // locate the active block [l, en]
        std::size_t l = en;
        while (l > 0) {
            const double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
            if (std::abs(h(l, l - 1)) <= 1e-16 * std::max(s, 1e-30 * scale)) {
                h(l, l - 1) = 0.0;
                break;
            }
            --l;
        }
        if (l == en) {
            w[en] = h(en, en);
            if (en == 0) break;
            --en;
            its = 0;
            continue;
        }
        if (++its > max_its) throw ConvergenceError("gen_eig: QR iteration did not converge");

        // Wilkinson shift: eigenvalue of the trailing 2x2 closest to h(en,en)
        Complex shift;
        if (its % 15 == 0) {
            double ex = std::abs(h(en, en - 1));
            if (en >= 2) ex += std::abs(h(en - 1, en - 2));
            shift = Complex(ex, 0.0);
        } else {
            const Complex a11 = h(en - 1, en - 1), a12 = h(en - 1, en);
            const Complex a21 = h(en, en - 1), a22 = h(en, en);
            const Complex tr2 = (a11 + a22) * 0.5;
            const Complex disc = std::sqrt(tr2 * tr2 - (a11 * a22 - a12 * a21));
            const Complex r1 = tr2 + disc, r2 = tr2 - disc;
            shift = (std::abs(r1 - a22) < std::abs(r2 - a22)) ? r1 : r2;
        }

        for (std::size_t i = l; i <= en; ++i) h(i, i) -= shift;

        // QR factor the active block with Givens rotations, then form RQ.
        std::vector<double> cs(en - l);
        std::vector<Complex> sn(en - l);
        for (std::size_t i = l; i < en; ++i) {
            const Complex f = h(i, i), g = h(i + 1, i);
            const double r = std::sqrt(std::norm(f) + std::norm(g));
            double c;
            Complex s;
            if (r <= 1e-300) {
                c = 1.0;
                s = 0.0;
            } else if (std::abs(f) <= 1e-300) {
                c = 0.0;
                s = std::conj(g) / std::abs(g);
            } else {
                c = std::abs(f) / r;
                s = (f / std::abs(f)) * std::conj(g) / r;
            }
            cs[i - l] = c;
            sn[i - l] = s;
            // rows i, i+1
            for (std::size_t j = i; j < n; ++j) {
                const Complex hij = h(i, j), hi1j = h(i + 1, j);
                h(i, j) = c * hij + s * hi1j;
                h(i + 1, j) = -std::conj(s) * hij + c * hi1j;
            }
        }
        for (std::size_t i = l; i < en; ++i) {
            const double c = cs[i - l];
            const Complex s = sn[i - l];
            for (std::size_t k = 0; k <= std::min(i + 1, en); ++k) {
                const Complex hki = h(k, i), hki1 = h(k, i + 1);
                h(k, i) = c * hki + std::conj(s) * hki1;
                h(k, i + 1) = -s * hki + c * hki1;
            }
        }
        for (std::size_t i = l; i <= en; ++i) h(i, i) += shift;
    }
    return w;
}

}  // namespace

namespace detail {
std::vector<Complex> qr_eigenvalues(const CMatrix& a) {
    return hessenberg_qr_eigenvalues(hessenberg(a));
}
}  // namespace detail

CMatrix lu_solve(CMatrix a, CMatrix b) {
    check_square(a, "lu_solve");
    if (a.rows() != b.rows()) throw DimensionError("lu_solve: rhs shape mismatch");
    const std::size_t n = a.rows(), m = b.cols();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        if (best <= 1e-300) throw Error("lu_solve: matrix is singular");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(k, j), b(piv, j));
        }
        const Complex inv_pivot = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex f = a(i, k) * inv_pivot;
            if (f == Complex(0.0, 0.0)) continue;
            a(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < m; ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = 0; j < m; ++j) {
            Complex s = b(i, j);
            for (std::size_t k = i + 1; k < n; ++k) s -= a(i, k) * b(k, j);
            b(i, j) = s / a(i, i);
        }
    }
    return b;
}

CMatrix inverse(const CMatrix& a) { return lu_solve(a, CMatrix::identity(a.rows())); }

EigenDecomposition gen_eig(const CMatrix& a) {
    check_square(a, "gen_eig");
    const std::size_t n = a.rows();
    if (n == 0) return {};

    const double scale = std::max(1.0, frobenius_norm(a));
    std::vector<Complex> raw = hessenberg_qr_eigenvalues(hessenberg(a));

    // Cluster numerically coincident eigenvalues (connected components under
    // the merge distance), then take each cluster's eigenvectors from the
    // kernel of (A - lambda).  For a semisimple matrix this recovers a full
    // basis; a defective cluster comes up short and is rejected.
    const double cluster_tol = 1e-7 * scale;
    std::vector<int> component(n, -1);
    std::vector<std::pair<Complex, std::size_t>> clusters;  // (representative, count)
    for (std::size_t i = 0; i < n; ++i) {
        if (component[i] >= 0) continue;
        std::vector<std::size_t> members = {i};
        component[i] = static_cast<int>(clusters.size());
        for (std::size_t probe = 0; probe < members.size(); ++probe)
            for (std::size_t j = 0; j < n; ++j) {
                if (component[j] >= 0) continue;
                if (std::abs(raw[members[probe]] - raw[j]) <= cluster_tol) {
                    component[j] = component[i];
                    members.push_back(j);
                }
            }
        Complex mean = 0.0;
        for (const std::size_t j : members) mean += raw[j];
        clusters.emplace_back(mean / static_cast<double>(members.size()), members.size());
    }

    EigenDecomposition eig;
    eig.vectors = CMatrix(n, n);
    std::size_t col = 0;
    for (const auto& [lam, count] : clusters) {
        CMatrix shifted = a;
        for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= lam;
        // kernel directions = smallest singular vectors of the shifted matrix
        EigenDecomposition gram = herm_eig(adjoint(shifted) * shifted);
        for (std::size_t k = 0; k < count; ++k) {
            for (std::size_t i = 0; i < n; ++i) eig.vectors(i, col) = gram.vectors(i, k);
            eig.values.push_back(lam);
            ++col;
        }
    }

    sort_eigenpairs(eig);

    // residual check ||A v - lambda v|| <= 1e-8 ||A||
    for (std::size_t k = 0; k < n; ++k) {
        CVector v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = eig.vectors(i, k);
        CVector av = matvec(a, v);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res += std::norm(av[i] - eig.values[k] * v[i]);
        if (std::sqrt(res) > 1e-8 * scale)
            throw NearDefectiveError("gen_eig: repeated eigenvalue without full eigenspace");
    }

    // eigenvector basis conditioning
    double vnorm = spectral_norm(eig.vectors);
    double vinv_norm;
    try {
        vinv_norm = spectral_norm(inverse(eig.vectors));
    } catch (const Error&) {
        throw NearDefectiveError("gen_eig: eigenvector basis is singular");
    }
    if (vnorm * vinv_norm > 1e8)
        throw NearDefectiveError("gen_eig: eigenvector basis condition number above 1e8");

    for (std::size_t k = 0; k < n; ++k) fix_phase(eig.vectors, k);
    return eig;
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

namespace {

CMatrix expm_spectral(const EigenDecomposition& eig, const std::vector<Complex>& exp_values) {
    const std::size_t n = eig.values.size();
    CMatrix scaled = eig.vectors;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= exp_values[j];
    return scaled * adjoint(eig.vectors);
}

double one_norm(const CMatrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
        best = std::max(best, s);
    }
    return best;
}

// Degree-13 diagonal Pade with scaling and squaring (Higham's coefficients).
CMatrix expm_pade(CMatrix a) {
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const std::size_t n = a.rows();
    const double theta13 = 5.371920351148152;

    int squarings = 0;
    const double nrm = one_norm(a);
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        a *= Complex(std::pow(2.0, -squarings), 0.0);
    }

    const CMatrix ident = CMatrix::identity(n);
    const CMatrix a2 = a * a;
    const CMatrix a4 = a2 * a2;
    const CMatrix a6 = a2 * a4;

    CMatrix u_inner = a6 * b[13] + a4 * b[11] + a2 * b[9];
    CMatrix u = a * (a6 * u_inner + a6 * b[7] + a4 * b[5] + a2 * b[3] + ident * b[1]);
    CMatrix v_inner = a6 * b[12] + a4 * b[10] + a2 * b[8];
    CMatrix v = a6 * v_inner + a6 * b[6] + a4 * b[4] + a2 * b[2] + ident * b[0];

    CMatrix result = lu_solve(v - u, v + u);
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace

CMatrix expm(const CMatrix& a) {
    check_square(a, "expm");
    const std::size_t n = a.rows();
    if (n == 0) return a;

    if (is_hermitian(a, 1e-12)) {
        EigenDecomposition eig = herm_eig(a);
        std::vector<Complex> ev(n);
        for (std::size_t k = 0; k < n; ++k) ev[k] = std::exp(eig.values[k].real());
        return expm_spectral(eig, ev);
    }
    if (is_skew_hermitian(a, 1e-12)) {
        // a = -i h with h Hermitian; exp(a) = V exp(-i diag) V'
        CMatrix h = a * Complex(0.0, 1.0);
        EigenDecomposition eig = herm_eig(h);
        std::vector<Complex> ev(n);
        for (std::size_t k = 0; k < n; ++k)
            ev[k] = std::exp(Complex(0.0, -eig.values[k].real()));
        return expm_spectral(eig, ev);
    }
    return expm_pade(a);
}

double spectral_norm(const CMatrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    EigenDecomposition gram = herm_eig(adjoint(a) * a);
    double lam_max = 0.0;
    for (const Complex lam : gram.values) lam_max = std::max(lam_max, lam.real());
    return std::sqrt(std::max(0.0, lam_max));
}

CMatrix null_space(const CMatrix& a, double tol) {
    if (tol <= 0.0) throw Error("null_space: tolerance must be positive");
    EigenDecomposition gram = herm_eig(adjoint(a) * a);
    const std::size_t m = a.cols();
    double lam_max = 0.0;
    for (const Complex lam : gram.values) lam_max = std::max(lam_max, lam.real());
    const double a_norm = std::sqrt(std::max(0.0, lam_max));

    // Eigenvalues of A'A near zero are resolved only to ~eps*||A||^2, so a
    // tight tol cannot be applied to them; the eigenVECTORS are accurate, so
    // screen candidates loosely and decide by the direct residual ||A v||.
    const double screen = std::max(tol, 1e-6) * a_norm;
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < m; ++k) {
        const double sigma = std::sqrt(std::max(0.0, gram.values[k].real()));
        if (sigma > screen) continue;
        CVector v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = gram.vectors(i, k);
        if (norm(matvec(a, v)) <= tol * a_norm) keep.push_back(k);
    }
    CMatrix basis(m, keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j)
        for (std::size_t i = 0; i < m; ++i) basis(i, j) = gram.vectors(i, keep[j]);
    return basis;
}

}  // namespace zeno
