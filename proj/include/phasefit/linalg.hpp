#pragma once

// Small dense symmetric linear algebra: Cholesky solve and eigenvalues.
// Self-contained; the problem sizes here are a few hundred at most.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasefit::linalg {

class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(size_t n) : n_(n), a_(n * n, 0.0) {}

    size_t size() const { return n_; }
    double& operator()(size_t i, size_t j) { return a_[i * n_ + j]; }
    double operator()(size_t i, size_t j) const { return a_[i * n_ + j]; }

    double trace() const {
        double t = 0.0;
        for (size_t i = 0; i < n_; ++i) t += a_[i * n_ + i];
        return t;
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        if (x.size() != n_) throw std::invalid_argument("SymMatrix::multiply: size mismatch");
        std::vector<double> y(n_, 0.0);
        for (size_t i = 0; i < n_; ++i) {
            double acc = 0.0;
            const double* row = &a_[i * n_];
            for (size_t j = 0; j < n_; ++j) acc += row[j] * x[j];
            y[i] = acc;
        }
        return y;
    }

private:
    size_t n_ = 0;
    std::vector<double> a_;
};

struct CholeskyFailure : std::runtime_error {
    explicit CholeskyFailure(size_t pivot)
        : std::runtime_error("cholesky: non-positive pivot at index " + std::to_string(pivot)),
          pivot_index(pivot) {}
    size_t pivot_index;
};

/// Cholesky factor of A + diag_shift I; throws CholeskyFailure on a
/// non-positive pivot. Keeps a reference to A for iterative refinement.
class Cholesky {
public:
    Cholesky(const SymMatrix& a, double diag_shift = 0.0)
        : a_(a), shift_(diag_shift), n_(a.size()), l_(n_ * n_, 0.0) {
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j <= i; ++j) l_[i * n_ + j] = a(i, j) + (i == j ? diag_shift : 0.0);
        for (size_t j = 0; j < n_; ++j) {
            double d = l_[j * n_ + j];
            for (size_t k = 0; k < j; ++k) d -= l_[j * n_ + k] * l_[j * n_ + k];
            if (!(d > 0.0) || !std::isfinite(d)) throw CholeskyFailure(j);
            d = std::sqrt(d);
            l_[j * n_ + j] = d;
            for (size_t i = j + 1; i < n_; ++i) {
                double s = l_[i * n_ + j];
                for (size_t k = 0; k < j; ++k) s -= l_[i * n_ + k] * l_[j * n_ + k];
                l_[i * n_ + j] = s / d;
            }
        }
    }

    std::vector<double> solve(const std::vector<double>& b) const {
        if (b.size() != n_) throw std::invalid_argument("Cholesky::solve: size mismatch");
        std::vector<double> x(b);
        for (size_t i = 0; i < n_; ++i) {
            double s = x[i];
            for (size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * x[k];
            x[i] = s / l_[i * n_ + i];
        }
        for (size_t ii = n_; ii-- > 0;) {
            double s = x[ii];
            for (size_t k = ii + 1; k < n_; ++k) s -= l_[k * n_ + ii] * x[k];
            x[ii] = s / l_[ii * n_ + ii];
        }
        return x;
    }

    /// Solve followed by a few iterative-refinement passes; ill-conditioned
    /// kernel systems need them to push the residual back to b's scale.
    std::vector<double> solve_refined(const std::vector<double>& b, int passes = 3) const {
        std::vector<double> x = solve(b);
        for (int pass = 0; pass < passes; ++pass) {
            std::vector<double> r = residual(b, x);
            double rmax = 0.0;
            for (double v : r) rmax = std::max(rmax, std::abs(v));
            if (rmax == 0.0) break;
            const std::vector<double> d = solve(r);
            for (size_t i = 0; i < n_; ++i) x[i] += d[i];
        }
        return x;
    }

    /// b - (A + shift I) x, against the matrix as factored.
    std::vector<double> residual(const std::vector<double>& b, const std::vector<double>& x) const {
        std::vector<double> ax = a_.multiply(x);
        std::vector<double> r(n_);
        for (size_t i = 0; i < n_; ++i) r[i] = b[i] - ax[i] - shift_ * x[i];
        return r;
    }

private:
    const SymMatrix& a_;
    double shift_;
    size_t n_;
    std::vector<double> l_;
};

inline std::vector<double> cholesky_solve(const SymMatrix& a, const std::vector<double>& b,
                                          double diag_shift = 0.0) {
    return Cholesky(a, diag_shift).solve(b);
}

struct EigenFailure : std::runtime_error {
    EigenFailure(size_t index, int iterations)
        : std::runtime_error("symmetric eigensolver: no convergence at eigenvalue " +
                             std::to_string(index) + " after " + std::to_string(iterations) +
                             " QL iterations"),
          eigen_index(index),
          iteration_count(iterations) {}
    size_t eigen_index;
    int iteration_count;
};

/// All eigenvalues of a symmetric matrix, sorted descending.
/// Householder tridiagonalization followed by implicit-shift QL.
inline std::vector<double> sym_eigenvalues(const SymMatrix& m) {
    const size_t n = m.size();
    if (n == 0) throw std::invalid_argument("sym_eigenvalues: empty matrix");
    std::vector<double> a(n * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) a[i * n + j] = m(i, j);
    std::vector<double> d(n, 0.0), e(n, 0.0);

    // Reduce to tridiagonal form (eigenvalue-only Householder pass).
    for (size_t i = n - 1; i >= 1; --i) {
        const size_t l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (size_t k = 0; k <= l; ++k) scale += std::abs(a[i * n + k]);
            if (scale == 0.0) {
                e[i] = a[i * n + l];
            } else {
                for (size_t k = 0; k <= l; ++k) {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                double f = a[i * n + l];
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = 0.0;
                for (size_t j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (size_t k = 0; k <= j; ++k) g += a[j * n + k] * a[i * n + k];
                    for (size_t k = j + 1; k <= l; ++k) g += a[k * n + j] * a[i * n + k];
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                const double hh = f / (h + h);
                for (size_t j = 0; j <= l; ++j) {
                    f = a[i * n + j];
                    g = e[j] - hh * f;
                    e[j] = g;
                    for (size_t k = 0; k <= j; ++k) a[j * n + k] -= f * e[k] + g * a[i * n + k];
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    for (size_t i = 0; i < n; ++i) d[i] = a[i * n + i];

    // Implicit-shift QL on the tridiagonal (d, e).
    for (size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    const int max_iter = 60;
    for (size_t l = 0; l < n; ++l) {
        int iter = 0;
        size_t msel;
        do {
            for (msel = l; msel + 1 < n; ++msel) {
                double dd = std::abs(d[msel]) + std::abs(d[msel + 1]);
                if (std::abs(e[msel]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (msel != l) {
                if (++iter >= max_iter) throw EigenFailure(l, iter);
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[msel] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (size_t ii = msel; ii-- > l;) {
                    double f = s * e[ii];
                    double b = c * e[ii];
                    r = std::hypot(f, g);
                    e[ii + 1] = r;
                    if (r == 0.0) {
                        d[ii + 1] -= p;
                        e[msel] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[ii + 1] - p;
                    r = (d[ii] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[ii + 1] = g + p;
                    g = c * r - b;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[msel] = 0.0;
            }
        } while (msel != l);
    }

    std::sort(d.begin(), d.end(), std::greater<double>());
    return d;
}

}  // namespace phasefit::linalg
