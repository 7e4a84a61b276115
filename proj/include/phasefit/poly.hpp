#pragma once

// Dense univariate polynomials in the monomial basis, plus evaluation of
// Legendre series. Coefficient vectors are indexed by power.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "phasefit/quadrature.hpp"

namespace phasefit::poly {

inline double eval(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
}

inline std::vector<double> derivative(const std::vector<double>& coeffs) {
    if (coeffs.size() <= 1) return {0.0};
    std::vector<double> d(coeffs.size() - 1);
    for (size_t i = 1; i < coeffs.size(); ++i) d[i - 1] = coeffs[i] * static_cast<double>(i);
    return d;
}

/// Monomial coefficients from a Taylor vector (t_k = f^{(k)}(0)).
inline std::vector<double> from_taylor(const std::vector<double>& taylor) {
    std::vector<double> c(taylor.size());
    double inv_fact = 1.0;
    for (size_t k = 0; k < taylor.size(); ++k) {
        if (k > 0) inv_fact /= static_cast<double>(k);
        c[k] = taylor[k] * inv_fact;
    }
    return c;
}

/// integral of p(x)^2 over [lo,hi], exact via Gauss-Legendre of matching order.
inline double integral_sq(const std::vector<double>& coeffs, double lo, double hi) {
    const int deg = coeffs.empty() ? 0 : static_cast<int>(coeffs.size()) - 1;
    const int nodes = deg + 1;  // integrand degree 2*deg <= 2*nodes - 1
    return quad::integrate(
        [&](double x) {
            const double v = eval(coeffs, x);
            return v * v;
        },
        lo, hi, nodes);
}

/// Unweighted L2 distance between two polynomials over [lo,hi].
inline double l2_distance(const std::vector<double>& a, const std::vector<double>& b, double lo,
                          double hi) {
    std::vector<double> d(std::max(a.size(), b.size()), 0.0);
    for (size_t i = 0; i < a.size(); ++i) d[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) d[i] -= b[i];
    const double v = integral_sq(d, lo, hi);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

/// sum_k theta[k] * P_k(x), single recurrence pass.
inline double eval_legendre_series(const std::vector<double>& theta, double x) {
    if (theta.empty()) return 0.0;
    double acc = theta[0];
    if (theta.size() == 1) return acc;
    double pm1 = 1.0, p = x;
    acc += theta[1] * x;
    for (size_t k = 1; k + 1 < theta.size(); ++k) {
        const double pn = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = pn;
        acc += theta[k + 1] * pn;
    }
    return acc;
}

}  // namespace phasefit::poly
