#pragma once

// Phase-transition logic. The sample-size regime of a smoothness class is
// decided by comparing n/sigma^2 against (gamma+1)^{2 gamma+3} (or its
// log-weighted variant for the k! radius profile); gamma* is the smallest
// index already in the small-n regime. All comparisons run in the log domain
// since the thresholds overflow doubles near gamma ~ 120.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "phasefit/entropy.hpp"

namespace phasefit::regime {

enum class Regime { SmallN, LargeN, Analytic };
enum class ThresholdKind { Standard, LogWeighted };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::SmallN: return "SmallN";
        case Regime::LargeN: return "LargeN";
        case Regime::Analytic: return "Analytic";
    }
    return "?";
}

namespace detail {

/// log of the regime threshold at smoothness index k.
inline double log_threshold(int k, ThresholdKind kind) {
    const double base =
        (kind == ThresholdKind::Standard)
            ? static_cast<double>(k + 1)
            : static_cast<double>(k + 1) * std::log(static_cast<double>(std::max(k, 2)));
    return (2.0 * k + 3.0) * std::log(base);
}

}  // namespace detail

/// Smallest k >= 0 with log(n/sigma^2) <= log threshold(k), capped at
/// gamma_cap when given. Boundary equality counts as small-n.
inline int gamma_star(long long n, double sigma_sq, std::optional<int> gamma_cap,
                      ThresholdKind kind = ThresholdKind::Standard) {
    if (n < 1) throw std::invalid_argument("gamma_star: need n >= 1");
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("gamma_star: need sigma^2 > 0");
    const double target = std::log(static_cast<double>(n)) - std::log(sigma_sq);
    int k = 0;
    while (target > detail::log_threshold(k, kind)) {
        if (gamma_cap && k >= *gamma_cap) return *gamma_cap;
        ++k;
    }
    if (gamma_cap && k > *gamma_cap) return *gamma_cap;
    return k;
}

struct RegimeReport {
    long long n = 0;
    double sigma_sq = 1.0;
    std::optional<int> gamma;  // absent for analytic classes
    int gamma_star = 0;
    Regime regime = Regime::LargeN;
    int recommended_degree = 1;  // degree of smoothness to exploit
    double predicted_rate = 0.0;
    std::string rate_formula;
    ThresholdKind threshold = ThresholdKind::Standard;
};

/// Regime classification with the minimax rate prediction (constants = 1).
inline RegimeReport classify(long long n, double sigma_sq, int gamma, entropy::ClassKind /*kind*/,
                             const entropy::RadiusProfile& profile) {
    if (n < 1) throw std::invalid_argument("classify: need n >= 1");
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("classify: need sigma^2 > 0");
    if (gamma < 0) throw std::invalid_argument("classify: need gamma >= 0");
    const ThresholdKind kind = (profile.tag == entropy::RadiusProfile::Tag::Factorial)
                                   ? ThresholdKind::LogWeighted
                                   : ThresholdKind::Standard;
    RegimeReport rep;
    rep.n = n;
    rep.sigma_sq = sigma_sq;
    rep.gamma = gamma;
    rep.threshold = kind;
    const double target = std::log(static_cast<double>(n)) - std::log(sigma_sq);
    const bool small = target <= detail::log_threshold(gamma, kind);
    rep.gamma_star = gamma_star(n, sigma_sq, gamma, kind);
    if (small) {
        rep.regime = Regime::SmallN;
        rep.recommended_degree = rep.gamma_star + 1;
        if (kind == ThresholdKind::LogWeighted) {
            rep.predicted_rate = sigma_sq * (rep.gamma_star + 1) *
                                 std::log(static_cast<double>(std::max(rep.gamma_star, 2))) /
                                 static_cast<double>(n);
            rep.rate_formula = "sigma^2 (gamma*+1) log(gamma* v 2) / n";
        } else {
            rep.predicted_rate = sigma_sq * (rep.gamma_star + 1) / static_cast<double>(n);
            rep.rate_formula = "sigma^2 (gamma*+1) / n";
        }
    } else {
        rep.regime = Regime::LargeN;
        rep.recommended_degree = gamma + 1;
        const double expo = (2.0 * gamma + 2.0) / (2.0 * gamma + 3.0);
        rep.predicted_rate = std::pow(sigma_sq / static_cast<double>(n), expo);
        rep.rate_formula = "(sigma^2/n)^((2 gamma+2)/(2 gamma+3))";
    }
    return rep;
}

/// Analytic classes: an uncapped gamma* scan; no phase transition.
inline RegimeReport classify_analytic(long long n, double sigma_sq) {
    RegimeReport rep;
    rep.n = n;
    rep.sigma_sq = sigma_sq;
    rep.gamma = std::nullopt;
    rep.gamma_star = gamma_star(n, sigma_sq, std::nullopt, ThresholdKind::Standard);
    rep.regime = Regime::Analytic;
    rep.recommended_degree = rep.gamma_star + 1;
    rep.predicted_rate = sigma_sq * (rep.gamma_star + 1) / static_cast<double>(n);
    rep.rate_formula = "sigma^2 (gamma*+1) / n";
    return rep;
}

/// Rough degree of smoothness worth exploiting at sample size n:
/// max{ floor(log n / (2 log log n)), 1 }, guarded below n = 16 where the
/// inner log is too small for the ratio to mean anything.
inline int heuristic_degree(long long n) {
    if (n < 1) throw std::invalid_argument("heuristic_degree: need n >= 1");
    if (n <= 15) return 1;
    const double ln = std::log(static_cast<double>(n));
    const int deg = static_cast<int>(std::floor(ln / (2.0 * std::log(ln))));
    return std::max(deg, 1);
}

enum class NonstandardClass { EllipsoidR, HolderSubR };

/// Large-n MISE rate for radius-scaled classes:
/// R^{2/(2 gamma+3)} (sigma^2/n)^{(2 gamma+2)/(2 gamma+3)}, where R is the
/// ellipsoid radius R_{gamma+1} or the Holder-subclass R*.
inline double nonstandard_rate(NonstandardClass cls, long long n, double sigma_sq, int gamma,
                               const std::vector<double>& radii) {
    if (n < 1) throw std::invalid_argument("nonstandard_rate: need n >= 1");
    if (radii.size() != static_cast<size_t>(gamma) + 2)
        throw std::invalid_argument("nonstandard_rate: radii must have gamma+2 entries");
    double r = 1.0;
    if (cls == NonstandardClass::EllipsoidR) {
        r = radii[static_cast<size_t>(gamma) + 1];
    } else {
        double fact = 1.0;
        for (int k = 1; k <= gamma + 1; ++k) {
            if (k >= 2) fact *= static_cast<double>(k - 1);
            r = std::max(r, radii[static_cast<size_t>(k)] / fact);
        }
    }
    const double expo = (2.0 * gamma + 2.0) / (2.0 * gamma + 3.0);
    return std::pow(r, 2.0 / (2.0 * gamma + 3.0)) *
           std::pow(sigma_sq / static_cast<double>(n), expo);
}

struct MultivariateThreshold {
    bool small_n = false;
    double log_threshold = 0.0;  // ((2 gamma+2+d)/d) log(sum_k D*_k)
};

/// d-variate analogue of the regime split; the polynomial dimension count
/// sum_k D*_k replaces gamma+1.
inline MultivariateThreshold multivariate_threshold(long long n, double sigma_sq, int gamma, int d) {
    if (d < 1) throw std::invalid_argument("multivariate_threshold: need d >= 1");
    if (n < 1) throw std::invalid_argument("multivariate_threshold: need n >= 1");
    double sum_d = 0.0;
    for (int k = 0; k <= gamma; ++k) sum_d += static_cast<double>(entropy::dstar(d, k));
    MultivariateThreshold out;
    out.log_threshold = (2.0 * gamma + 2.0 + d) / static_cast<double>(d) * std::log(sum_d);
    const double target = std::log(static_cast<double>(n)) - std::log(sigma_sq);
    out.small_n = target <= out.log_threshold;
    return out;
}

}  // namespace phasefit::regime
