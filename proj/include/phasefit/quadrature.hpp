#pragma once

// Gauss-Legendre quadrature and Legendre polynomial helpers.

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace phasefit::quad {

/// Legendre polynomial P_k(x) on [-1,1] by the three-term recurrence.
inline double legendre_p(int k, double x) {
    if (k < 0) throw std::invalid_argument("legendre_p: negative degree");
    if (k == 0) return 1.0;
    double pm1 = 1.0, p = x;
    for (int j = 1; j < k; ++j) {
        double pn = ((2.0 * j + 1.0) * x * p - j * pm1) / (j + 1.0);
        pm1 = p;
        p = pn;
    }
    return p;
}

struct Rule {
    std::vector<double> nodes;    // on (-1,1), ascending
    std::vector<double> weights;  // sum to 2
};

namespace detail {

inline Rule compute_rule(int n) {
    Rule r;
    r.nodes.resize(static_cast<size_t>(n));
    r.weights.resize(static_cast<size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton iteration from the Chebyshev-based initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double pm1 = 1.0, p = x;
            for (int j = 1; j < n; ++j) {
                double pn = ((2.0 * j + 1.0) * x * p - j * pm1) / (j + 1.0);
                pm1 = p;
                p = pn;
            }
            dp = n * (x * p - pm1) / (x * x - 1.0);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                pm1 = 1.0;
                p = x;
                for (int j = 1; j < n; ++j) {
                    double pn = ((2.0 * j + 1.0) * x * p - j * pm1) / (j + 1.0);
                    pm1 = p;
                    p = pn;
                }
                dp = n * (x * p - pm1) / (x * x - 1.0);
                break;
            }
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[static_cast<size_t>(n - 1 - i)] = x;
        r.weights[static_cast<size_t>(n - 1 - i)] = w;
        r.nodes[static_cast<size_t>(i)] = -x;
        r.weights[static_cast<size_t>(i)] = w;
    }
    if (n % 2 == 1) {
        // Odd rules have a node exactly at 0.
        double pm1 = 1.0, p = 0.0;
        for (int j = 1; j < n; ++j) {
            double pn = (-j * pm1) / (j + 1.0);
            pm1 = p;
            p = pn;
        }
        double dp = n * (0.0 - pm1) / (-1.0);
        r.nodes[static_cast<size_t>(n / 2)] = 0.0;
        r.weights[static_cast<size_t>(n / 2)] = 2.0 / (dp * dp);
    }
    return r;
}

}  // namespace detail

/// Cached n-point Gauss-Legendre rule on [-1,1]; exact for degree <= 2n-1.
inline const Rule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
    static std::mutex mtx;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::compute_rule(n)).first;
    return it->second;
}

/// Single-panel Gauss-Legendre integral of f over [a,b] with n nodes.
template <typename F>
double integrate(F&& f, double a, double b, int n) {
    if (b <= a) return 0.0;
    const Rule& r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * f(mid + hw * r.nodes[i]);
    return acc * hw;
}

/// Composite rule: `panels` equal panels, `nodes_per_panel` G-L nodes each.
template <typename F>
double integrate_composite(F&& f, double a, double b, int panels, int nodes_per_panel) {
    if (panels < 1 || nodes_per_panel < 1)
        throw std::invalid_argument("integrate_composite: bad panel spec");
    double acc = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) acc += integrate(f, a + p * h, a + (p + 1) * h, nodes_per_panel);
    return acc;
}

/// 64-panel composite sized so the total node count is about `total_points`.
template <typename F>
double integrate_points(F&& f, double a, double b, int total_points) {
    if (total_points < 8) throw std::invalid_argument("integrate_points: need >= 8 points");
    const int panels = 64;
    const int per_panel = std::max(2, (total_points + panels - 1) / panels);
    return integrate_composite(f, a, b, panels, per_panel);
}

}  // namespace phasefit::quad
