#pragma once

// Reproducing kernels of the (k+1)-st order Sobolev space on [0,1]:
//   K_1(x,x')     = 1 + min(x,x')
//   K_{k+1}(x,x') = sum_{j=0}^{k} x^j x'^j / (j!)^2
//                   + int_0^{min(x,x')} (x-t)^k (x'-t)^k / (k!)^2 dt   (k > 0)
// plus kernel matrix assembly and the RKHS norm form pi' K pi.

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "phasefit/linalg.hpp"
#include "phasefit/quadrature.hpp"

namespace phasefit::kernels {

/// Eigenvalues of kernel matrices below this magnitude are treated as
/// rounding noise and clamped to zero.
inline constexpr double kEigenClamp = 1e-9;

struct SobolevKernel {
    int order_k = 0;

    explicit SobolevKernel(int k) : order_k(k) {
        if (k < 0) throw std::invalid_argument("SobolevKernel: order must be >= 0");
    }

    double operator()(double x, double xp) const {
        if (x < 0.0 || x > 1.0 || xp < 0.0 || xp > 1.0)
            throw std::domain_error("SobolevKernel: arguments must lie in [0,1]");
        const double m = std::min(x, xp);
        if (order_k == 0) return 1.0 + m;
        // Polynomial part, with 1/(j!)^2 accumulated multiplicatively to
        // stay finite for large orders.
        double poly = 1.0;
        double term = 1.0;  // (x*xp)^j / (j!)^2
        const double xx = x * xp;
        for (int j = 1; j <= order_k; ++j) {
            term *= xx / (static_cast<double>(j) * static_cast<double>(j));
            poly += term;
        }
        if (m <= 0.0) return poly;
        // Spline part: degree-2k polynomial integrand, exact with k+1 nodes.
        double inv_kfact = 1.0;
        for (int j = 2; j <= order_k; ++j) inv_kfact /= static_cast<double>(j);
        const int k = order_k;
        const double spline = quad::integrate(
            [&](double t) {
                const double u = (x - t) * (xp - t);
                double p = 1.0;
                for (int j = 0; j < k; ++j) p *= u;
                return p;
            },
            0.0, m, k + 1);
        return poly + spline * inv_kfact * inv_kfact;
    }
};

class KernelMatrix {
public:
    KernelMatrix(SobolevKernel kernel, std::vector<double> xs)
        : kernel_(kernel), xs_(std::move(xs)), cache_(std::make_shared<EigenCache>()) {
        const size_t n = xs_.size();
        if (n == 0) throw std::invalid_argument("KernelMatrix: empty design");
        for (double x : xs_)
            if (!(x >= 0.0 && x <= 1.0))
                throw std::domain_error("KernelMatrix: design points must lie in [0,1]");
        entries_ = linalg::SymMatrix(n);
        const double scale = 1.0 / static_cast<double>(n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i; j < n; ++j) {
                const double v = scale * kernel_(xs_[i], xs_[j]);
                entries_(i, j) = v;
                entries_(j, i) = v;  // mirrored, symmetric by construction
            }
    }

    size_t size() const { return xs_.size(); }
    int order() const { return kernel_.order_k; }
    const std::vector<double>& design() const { return xs_; }
    const linalg::SymMatrix& entries() const { return entries_; }

    /// Eigenvalues sorted descending, computed on first use. Negatives above
    /// -kEigenClamp are clamped to 0; anything more negative is left intact
    /// so a genuinely non-PSD matrix stays visible.
    const std::vector<double>& eigenvalues() const {
        std::lock_guard<std::mutex> lock(cache_->mtx);
        if (!cache_->ready) {
            cache_->eigs = linalg::sym_eigenvalues(entries_);
            for (double& v : cache_->eigs)
                if (v < 0.0 && v >= -kEigenClamp) v = 0.0;
            cache_->ready = true;
        }
        return cache_->eigs;
    }

private:
    struct EigenCache {
        std::mutex mtx;
        bool ready = false;
        std::vector<double> eigs;
    };

    SobolevKernel kernel_;
    std::vector<double> xs_;
    linalg::SymMatrix entries_;
    std::shared_ptr<EigenCache> cache_;
};

inline double eval_kernel(const SobolevKernel& kernel, double x, double xp) {
    return kernel(x, xp);
}

inline KernelMatrix kernel_matrix(const SobolevKernel& kernel, const std::vector<double>& xs) {
    return KernelMatrix(kernel, xs);
}

/// pi' K pi, clamped at zero from below.
inline double rkhs_norm_sq(const std::vector<double>& pi, const KernelMatrix& km) {
    if (pi.size() != km.size()) throw std::invalid_argument("rkhs_norm_sq: size mismatch");
    const std::vector<double> kp = km.entries().multiply(pi);
    double acc = 0.0;
    for (size_t i = 0; i < pi.size(); ++i) acc += pi[i] * kp[i];
    return std::max(0.0, acc);
}

}  // namespace phasefit::kernels
