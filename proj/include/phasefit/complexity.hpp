#pragma once

// Localized kernel complexity and its critical radius:
//   complexity(r) = sqrt( (1/n) sum_i min{r^2, mu_i} )
// and the smallest r > 0 with complexity(r) = c0 r^2. complexity(r)/r is
// non-increasing, so the positive crossing is unique; bisection is used
// because the function has kinks at r^2 = mu_i.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace phasefit::complexity {

inline double kernel_complexity(double r, const std::vector<double>& eigenvalues) {
    if (!(r > 0.0)) throw std::invalid_argument("kernel_complexity: need r > 0");
    if (eigenvalues.empty()) throw std::invalid_argument("kernel_complexity: empty spectrum");
    const double r2 = r * r;
    double acc = 0.0;
    for (double mu : eigenvalues) acc += std::min(r2, std::max(mu, 0.0));
    return std::sqrt(acc / static_cast<double>(eigenvalues.size()));
}

inline double critical_radius(const std::vector<double>& eigenvalues, double c0) {
    if (!(c0 > 0.0)) throw std::invalid_argument("critical_radius: need c0 > 0");
    if (eigenvalues.empty()) throw std::invalid_argument("critical_radius: empty spectrum");
    double total = 0.0;
    for (double mu : eigenvalues) total += std::max(mu, 0.0);
    if (total <= 0.0) throw std::invalid_argument("critical_radius: all-zero spectrum");
    const double n = static_cast<double>(eigenvalues.size());

    double lo = 1e-12;
    double hi = std::max(1.0, std::sqrt(total / n) / c0 + 1.0);
    const auto gap = [&](double r) { return kernel_complexity(r, eigenvalues) - c0 * r * r; };
    if (!(gap(lo) > 0.0))
        throw std::runtime_error("critical_radius: no sign change on the bracket (lower end)");
    if (!(gap(hi) < 0.0))
        throw std::runtime_error("critical_radius: no sign change on the bracket (upper end)");
    double r = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        r = 0.5 * (lo + hi);
        const double c = kernel_complexity(r, eigenvalues);
        const double rhs = c0 * r * r;
        if (std::abs(c - rhs) <= 1e-10 * (1.0 + rhs)) return r;
        if (c - rhs > 0.0)
            lo = r;
        else
            hi = r;
    }
    throw std::runtime_error("critical_radius: bisection failed to meet tolerance");
}

/// The sigma-scaled form: complexity(r) = R r^2 / (2 sigma).
inline double critical_radius_sigma(const std::vector<double>& eigenvalues, double sigma,
                                    double r_radius) {
    if (!(sigma > 0.0)) throw std::invalid_argument("critical_radius_sigma: need sigma > 0");
    if (!(r_radius > 0.0)) throw std::invalid_argument("critical_radius_sigma: need R > 0");
    return critical_radius(eigenvalues, r_radius / (2.0 * sigma));
}

}  // namespace phasefit::complexity
