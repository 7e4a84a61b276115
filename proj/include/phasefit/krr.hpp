#pragma once

// Kernel ridge regression with the Sobolev kernels:
//   pi^ = (K + lambda I)^{-1} Y / sqrt(n),   f^(x) = (1/sqrt n) sum pi^_i K(x, x_i)
// plus a norm-constrained variant solved by dual bisection on lambda, the
// regime-driven lambda rules, and an O(n) route for the order-0 kernel.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "phasefit/kernels.hpp"
#include "phasefit/regime.hpp"

namespace phasefit::krr {

inline constexpr double kLambdaMin = 1e-10;
inline constexpr double kLambdaMax = 1e6;
inline constexpr double kResidualTol = 1e-8;

struct KrrModel {
    int order_k = 0;
    std::vector<double> xs;
    std::vector<double> pi_hat;
    double lambda = 0.0;
    double rkhs_norm = 0.0;  // pi' K pi
    double jitter = 0.0;     // diagonal shift actually applied (0 if none)

    double predict(double x) const {
        if (x < 0.0 || x > 1.0) throw std::domain_error("KrrModel::predict: x must lie in [0,1]");
        const kernels::SobolevKernel kernel(order_k);
        const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(xs.size()));
        double acc = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) acc += pi_hat[i] * kernel(x, xs[i]);
        return acc * inv_sqrt_n;
    }
};

inline double predict(const KrrModel& model, double x) { return model.predict(x); }

/// Regularization from the regime report, constants fixed to 1:
/// small-n (and analytic): lambda = (gamma*+1)/n; large-n:
/// lambda = R^{-4(k+1)/(2k+3)} (1/n)^{2(k+1)/(2k+3)} at the exploited order
/// k, which collapses to the standard rule at R = 1.
inline double lambda_rule(const regime::RegimeReport& rep, double sigma, double r_radius = 1.0) {
    if (rep.n < 1) throw std::invalid_argument("lambda_rule: need n >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("lambda_rule: need sigma > 0");
    if (!(r_radius > 0.0)) throw std::invalid_argument("lambda_rule: need R > 0");
    const double n = static_cast<double>(rep.n);
    if (rep.regime != regime::Regime::LargeN) return (rep.gamma_star + 1) / n;
    const int k = rep.recommended_degree - 1;
    const double expo = (2.0 * k + 2.0) / (2.0 * k + 3.0);
    return std::pow(r_radius, -2.0 * expo) * std::pow(1.0 / n, expo);
}

namespace detail {

inline void validate_design(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.empty() || xs.size() != ys.size())
        throw std::invalid_argument("krr: xs and ys must be nonempty and equal length");
    for (double x : xs)
        if (!std::isfinite(x) || x < 0.0 || x > 1.0)
            throw std::invalid_argument("krr: design points must lie in [0,1]");
    for (double y : ys)
        if (!std::isfinite(y)) throw std::invalid_argument("krr: non-finite response");
}

inline KrrModel solve_with_matrix(const kernels::KernelMatrix& km, const std::vector<double>& ys,
                                  double lambda) {
    const size_t n = km.size();
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> rhs(n);
    for (size_t i = 0; i < n; ++i) rhs[i] = ys[i] * inv_sqrt_n;

    double ymax = 0.0;
    for (double y : ys) ymax = std::max(ymax, std::abs(y));
    const double tol = kResidualTol * (1.0 + ymax);

    // Residual against the nominal (un-jittered) system.
    const auto max_residual = [&](const std::vector<double>& pi, double jitter) {
        std::vector<double> kp = km.entries().multiply(pi);
        double resid = 0.0;
        for (size_t i = 0; i < n; ++i)
            resid = std::max(resid, std::abs(kp[i] + (lambda + jitter) * pi[i] - rhs[i]));
        return resid;
    };

    std::vector<double> pi;
    double jitter = 0.0;
    double resid = std::numeric_limits<double>::infinity();
    try {
        pi = linalg::Cholesky(km.entries(), lambda).solve_refined(rhs);
        resid = max_residual(pi, 0.0);
    } catch (const linalg::CholeskyFailure&) {
    }
    if (!(resid <= tol) && lambda == 0.0) {
        jitter = 1e-10 * km.entries().trace() / static_cast<double>(n);
        try {
            pi = linalg::Cholesky(km.entries(), lambda + jitter).solve_refined(rhs);
        } catch (const linalg::CholeskyFailure&) {
            throw std::runtime_error("krr::fit: system unsolvable even with jitter");
        }
        resid = max_residual(pi, 0.0);
    }
    if (!(resid <= tol))
        throw std::runtime_error("krr::fit: solver residual " + std::to_string(resid) +
                                 " exceeds tolerance");

    KrrModel model;
    model.order_k = km.order();
    model.xs = km.design();
    model.pi_hat = std::move(pi);
    model.lambda = lambda;
    model.jitter = jitter;
    model.rkhs_norm = kernels::rkhs_norm_sq(model.pi_hat, km);
    return model;
}

}  // namespace detail

inline KrrModel fit(int kernel_order, const std::vector<double>& xs, const std::vector<double>& ys,
                    double lambda) {
    detail::validate_design(xs, ys);
    if (!(lambda >= 0.0)) throw std::invalid_argument("krr::fit: lambda must be >= 0");
    const kernels::KernelMatrix km(kernels::SobolevKernel(kernel_order), xs);
    return detail::solve_with_matrix(km, ys, lambda);
}

/// Norm-constrained fit: the near-interpolant when the constraint is slack,
/// otherwise bisect lambda until pi' K pi hits c_bar^2. The norm is
/// non-increasing in lambda, so the crossing is unique.
inline KrrModel fit_constrained(int kernel_order, const std::vector<double>& xs,
                                const std::vector<double>& ys, double c_bar) {
    detail::validate_design(xs, ys);
    if (!(c_bar > 0.0)) throw std::invalid_argument("fit_constrained: need c_bar > 0");
    const kernels::KernelMatrix km(kernels::SobolevKernel(kernel_order), xs);
    const double target = c_bar * c_bar;
    const double tol = 1e-6 * target;

    KrrModel lo_model = detail::solve_with_matrix(km, ys, kLambdaMin);
    if (lo_model.rkhs_norm <= target) return lo_model;

    double lo = kLambdaMin, hi = kLambdaMax;
    KrrModel hi_model = detail::solve_with_matrix(km, ys, hi);
    if (hi_model.rkhs_norm > target)
        throw std::runtime_error("fit_constrained: norm still above c_bar^2 at lambda_max");
    for (int it = 0; it < 400; ++it) {
        const double mid = std::sqrt(lo * hi);  // geometric: lambda spans 16 decades
        KrrModel m = detail::solve_with_matrix(km, ys, mid);
        if (std::abs(m.rkhs_norm - target) <= tol) return m;
        if (m.rkhs_norm > target)
            lo = mid;
        else
            hi = mid;
    }
    throw std::runtime_error("fit_constrained: bisection failed to meet tolerance");
}

/// Order-0 fits restated as a tridiagonal system. The k=0 estimator is the
/// first-order smoothing spline: with sorted knots and fitted values v,
///   (W + n lambda A) v = W ybar,
/// where A is the tridiagonal form of f(0)^2 + int f'^2 for the minimal-norm
/// interpolant and W holds duplicate-point counts. Predictions are linear
/// between knots, linear from (0, v_1/(1+x_1)) on the left, constant on the
/// right. Agrees with fit(0, ...) to solver precision at O(n) cost.
struct SplineModelK0 {
    std::vector<double> knots;   // sorted, unique
    std::vector<double> values;  // fitted values at the knots
    double lambda = 0.0;

    double predict(double x) const {
        if (x < 0.0 || x > 1.0)
            throw std::domain_error("SplineModelK0::predict: x must lie in [0,1]");
        if (x >= knots.back()) return values.back();
        if (x <= knots.front()) {
            const double x1 = knots.front();
            const double anchor = values.front() / (1.0 + x1);
            if (x1 <= 0.0) return values.front();
            return anchor + (values.front() - anchor) * (x / x1);
        }
        const auto it = std::upper_bound(knots.begin(), knots.end(), x);
        const size_t j = static_cast<size_t>(it - knots.begin()) - 1;
        const double t = (x - knots[j]) / (knots[j + 1] - knots[j]);
        return values[j] + t * (values[j + 1] - values[j]);
    }
};

inline SplineModelK0 fit_k0(const std::vector<double>& xs, const std::vector<double>& ys,
                            double lambda) {
    detail::validate_design(xs, ys);
    if (!(lambda >= 0.0)) throw std::invalid_argument("fit_k0: lambda must be >= 0");
    const size_t n = xs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return xs[a] < xs[b]; });

    // Group exact duplicates.
    std::vector<double> kx, wy, w;
    for (size_t idx : order) {
        if (!kx.empty() && xs[idx] == kx.back()) {
            wy.back() += ys[idx];
            w.back() += 1.0;
        } else {
            kx.push_back(xs[idx]);
            wy.push_back(ys[idx]);
            w.push_back(1.0);
        }
    }
    const size_t m = kx.size();
    std::vector<double> diag(m), lower(m > 1 ? m - 1 : 0), rhs(m);
    const double nl = static_cast<double>(n) * lambda;
    for (size_t i = 0; i < m; ++i) {
        diag[i] = w[i];
        rhs[i] = wy[i];
    }
    diag[0] += nl / (1.0 + kx[0]);
    for (size_t i = 0; i + 1 < m; ++i) {
        const double inv_h = 1.0 / (kx[i + 1] - kx[i]);
        diag[i] += nl * inv_h;
        diag[i + 1] += nl * inv_h;
        lower[i] = -nl * inv_h;
    }

    // Thomas algorithm; the matrix is symmetric tridiagonal positive definite.
    std::vector<double> c(m, 0.0), v(m);
    double piv = diag[0];
    v[0] = rhs[0] / piv;
    for (size_t i = 1; i < m; ++i) {
        c[i - 1] = lower[i - 1] / piv;
        piv = diag[i] - lower[i - 1] * c[i - 1];
        v[i] = (rhs[i] - lower[i - 1] * v[i - 1]) / piv;
    }
    for (size_t i = m - 1; i-- > 0;) v[i] -= c[i] * v[i + 1];

    SplineModelK0 model;
    model.knots = std::move(kx);
    model.values = std::move(v);
    model.lambda = lambda;
    return model;
}

}  // namespace phasefit::krr
