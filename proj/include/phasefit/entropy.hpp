#pragma once

// Metric-entropy toolkit for smooth function classes on an interval:
// covering/packing bound evaluators for the polynomial subclass, the Holder
// subclass, the ellipsoid subclass and the full Holder class, the Legendre
// coefficient map, the multivariate combinatorics, and two constructive
// objects (a product-grid cover and a verified packing set).
//
// Every bound hides unspecified universal constants; this implementation
// fixes them all to 1 (and the B2 packing constant to log 2) and echoes the
// choice in each report, so numbers are comparable across runs but lower vs
// upper comparisons stay heuristic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phasefit/poly.hpp"
#include "phasefit/quadrature.hpp"

namespace phasefit::entropy {

enum class ClassKind { HolderFull, PolySub, HolderSub, Sobolev, Ellipsoid };

struct Interval {
    double lo = -1.0;
    double hi = 1.0;
};

struct RadiusProfile {
    enum class Tag { Constant, FactorialMinusOne, Factorial, Explicit };
    Tag tag = Tag::Constant;
    double c_bar = 1.0;
    std::vector<double> values;  // Explicit only

    static RadiusProfile constant(double c) { return {Tag::Constant, c, {}}; }
    static RadiusProfile factorial_minus_one(double c) { return {Tag::FactorialMinusOne, c, {}}; }
    static RadiusProfile factorial(double c) { return {Tag::Factorial, c, {}}; }
    static RadiusProfile explicit_values(std::vector<double> v) {
        return {Tag::Explicit, 1.0, std::move(v)};
    }
};

/// Radii R_0..R_{gamma+1} from a profile.
inline std::vector<double> make_radii(const RadiusProfile& profile, int gamma) {
    if (gamma < 0) throw std::invalid_argument("make_radii: gamma must be >= 0");
    const size_t len = static_cast<size_t>(gamma) + 2;
    std::vector<double> radii(len);
    switch (profile.tag) {
        case RadiusProfile::Tag::Constant:
            if (!(profile.c_bar > 0.0)) throw std::invalid_argument("make_radii: c_bar must be > 0");
            std::fill(radii.begin(), radii.end(), profile.c_bar);
            break;
        case RadiusProfile::Tag::FactorialMinusOne: {
            if (!(profile.c_bar > 0.0)) throw std::invalid_argument("make_radii: c_bar must be > 0");
            radii[0] = profile.c_bar;
            double fact = 1.0;  // (k-1)!
            for (size_t k = 1; k < len; ++k) {
                if (k >= 2) fact *= static_cast<double>(k - 1);
                radii[k] = profile.c_bar * fact;
            }
            break;
        }
        case RadiusProfile::Tag::Factorial: {
            if (!(profile.c_bar > 0.0)) throw std::invalid_argument("make_radii: c_bar must be > 0");
            double fact = 1.0;
            for (size_t k = 0; k < len; ++k) {
                if (k >= 1) fact *= static_cast<double>(k);
                radii[k] = profile.c_bar * fact;
            }
            break;
        }
        case RadiusProfile::Tag::Explicit:
            if (profile.values.size() != len)
                throw std::invalid_argument("make_radii: explicit profile needs gamma+2 entries");
            radii = profile.values;
            break;
    }
    for (double r : radii)
        if (!(r > 0.0) || !std::isfinite(r))
            throw std::invalid_argument("make_radii: radii must be positive and finite");
    return radii;
}

struct SmoothnessClassSpec {
    int gamma = 0;
    std::vector<double> radii;  // R_0..R_{gamma+1}
    Interval domain;
    ClassKind kind = ClassKind::HolderFull;
    double eigen_decay_c = 1.0;  // Ellipsoid: mu_m = (c m)^{-2(gamma+1)}

    static SmoothnessClassSpec make(ClassKind kind, int gamma, const RadiusProfile& profile,
                                    std::optional<Interval> domain = std::nullopt,
                                    double eigen_decay_c = 1.0) {
        SmoothnessClassSpec s;
        s.kind = kind;
        s.gamma = gamma;
        s.radii = make_radii(profile, gamma);
        const bool unit_interval = (kind == ClassKind::Sobolev || kind == ClassKind::Ellipsoid);
        s.domain = domain.value_or(unit_interval ? Interval{0.0, 1.0} : Interval{-1.0, 1.0});
        if (!(s.domain.lo < s.domain.hi))
            throw std::invalid_argument("SmoothnessClassSpec: domain must have lo < hi");
        s.eigen_decay_c = eigen_decay_c;
        if (kind == ClassKind::Ellipsoid && !(eigen_decay_c > 0.0))
            throw std::invalid_argument("SmoothnessClassSpec: ellipsoid needs eigen decay c > 0");
        return s;
    }
};

struct EntropyBoundReport {
    double delta = 0.0;
    std::optional<double> lower_log;  // absent where the source gives no lower bound
    double upper_log = 0.0;
    std::string branch;
    std::string constants;  // the fixed constant choices behind the numbers
};

inline constexpr const char* kConstantsNote = "C=1,Cprime=log2,prefactors=1";

namespace detail {

inline void require_positive_delta(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("entropy: delta must be > 0");
}

inline double factorial_d(int k) {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= static_cast<double>(j);
    return f;
}

/// R* = (max_{k in 1..gamma+1} R_k/(k-1)!) v 1
inline double r_star(const SmoothnessClassSpec& spec) {
    double best = 1.0;
    double fact = 1.0;  // (k-1)!
    for (int k = 1; k <= spec.gamma + 1; ++k) {
        if (k >= 2) fact *= static_cast<double>(k - 1);
        best = std::max(best, spec.radii[static_cast<size_t>(k)] / fact);
    }
    return best;
}

}  // namespace detail

struct PolyCoverBound {
    double value = 0.0;
    std::string branch;  // "B1bar" or "B2bar"
};

/// Upper bound on the log covering number of the polynomial subclass:
/// B1bar(delta) = sum_k log(4(gamma+1)R_k/(k! delta)) when every summand is
/// nonnegative, otherwise B2bar(delta) = (gamma/2+1) log(1/delta) + sum_k log R_k.
inline PolyCoverBound poly_cover_upper(const SmoothnessClassSpec& spec, double delta) {
    detail::require_positive_delta(delta);
    const int g = spec.gamma;
    double b1 = 0.0;
    double min_term = std::numeric_limits<double>::infinity();
    double sum_log_r = 0.0;
    double fact = 1.0;
    for (int k = 0; k <= g; ++k) {
        if (k >= 1) fact *= static_cast<double>(k);
        const double rk = spec.radii[static_cast<size_t>(k)];
        const double term = std::log(4.0 * (g + 1) * rk / (fact * delta));
        b1 += term;
        min_term = std::min(min_term, term);
        sum_log_r += std::log(rk);
    }
    if (min_term >= 0.0) return {b1, "B1bar"};
    return {(0.5 * g + 1.0) * std::log(1.0 / delta) + sum_log_r, "B2bar"};
}

/// Packing lower bound B1(delta) for the polynomial subclass, with the
/// universal constant fixed to C=1 and the gamma=0 convention 0^0 = 1.
/// Returns nullopt if a summand degenerates to log 0.
inline std::optional<double> poly_pack_lower_B1(const SmoothnessClassSpec& spec, double delta) {
    detail::require_positive_delta(delta);
    const int g = spec.gamma;
    const double log_front = (g == 0) ? 0.0 : -static_cast<double>(g) * (std::log(9.0) + std::log(static_cast<double>(g)));
    double acc = static_cast<double>(g + 1) * log_front;
    for (int k = 0; k <= g; ++k) {
        double inner = 0.0;
        for (int m = 0; k + 2 * m <= g; ++m) inner += spec.radii[static_cast<size_t>(k + 2 * m)];
        if (!(inner > 0.0)) return std::nullopt;
        acc += std::log(inner / delta);
    }
    return acc;
}

struct PackingFeasibility {
    bool feasible = false;
    unsigned long long m0 = 0;
    double log_lower = 0.0;  // (gamma+1) log 2 when feasible
    int k_tilde = 0;
    double s = 0.0;        // (k_tilde+1) v sum_k R_k/k!
    double spacing = 0.0;  // nominal grid spacing 3 delta S
};

/// Feasibility of the constructive B2 packing: M_0 grid points on the k~
/// coefficient interval, requiring M_0 >= 2^{gamma+1} and the spacing to fit.
inline PackingFeasibility poly_pack_B2_feasible(const SmoothnessClassSpec& spec, double delta) {
    detail::require_positive_delta(delta);
    const int g = spec.gamma;
    int k_tilde = 0;
    double best = -1.0;
    double sum_ratio = 0.0;
    double fact = 1.0;
    for (int k = 0; k <= g; ++k) {
        if (k >= 1) fact *= static_cast<double>(k);
        const double ratio = spec.radii[static_cast<size_t>(k)] / fact;
        sum_ratio += ratio;
        if (ratio > best) {  // ties keep the smallest index
            best = ratio;
            k_tilde = k;
        }
    }
    PackingFeasibility out;
    out.k_tilde = k_tilde;
    out.s = std::max(static_cast<double>(k_tilde + 1), sum_ratio);
    out.spacing = 3.0 * delta * out.s;
    const double half_width = best;  // R_k~ / k~!
    const double m0_real = std::ceil(2.0 * half_width / out.spacing) + 1.0;
    if (m0_real > 9e18) throw std::overflow_error("poly_pack_B2_feasible: M_0 overflows");
    out.m0 = static_cast<unsigned long long>(m0_real);
    const bool big_enough = std::log(m0_real) >= static_cast<double>(g + 1) * std::log(2.0);
    const bool fits = out.spacing <= 2.0 * half_width;
    out.feasible = big_enough && fits;
    out.log_lower = out.feasible ? static_cast<double>(g + 1) * std::log(2.0) : 0.0;
    return out;
}

/// Holder-subclass entropy (both sides), prefactors fixed to 1.
inline EntropyBoundReport holder_sub_entropy(const SmoothnessClassSpec& spec, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::out_of_range("holder_sub_entropy: requires 0 < delta < 1");
    const double g1 = static_cast<double>(spec.gamma) + 1.0;
    const double rstar = detail::r_star(spec);
    const double common = std::pow(rstar, 1.0 / g1) * std::pow(delta, -1.0 / g1);
    EntropyBoundReport rep;
    rep.delta = delta;
    rep.upper_log = common;
    rep.constants = kConstantsNote;
    const double r0 = spec.radii[0];
    if (r0 >= 1.0) {
        rep.lower_log = common;
        rep.branch = "holder-sub:R0>=1";
    } else {
        rep.lower_log = std::pow(rstar * r0, 1.0 / g1) * std::pow(delta, -1.0 / g1);
        rep.branch = "holder-sub:R0<1";
    }
    return rep;
}

/// Ellipsoid-subclass entropy (both sides), prefactors fixed to 1.
inline EntropyBoundReport ellipsoid_entropy(const SmoothnessClassSpec& spec, double delta) {
    detail::require_positive_delta(delta);
    const double g1 = static_cast<double>(spec.gamma) + 1.0;
    const double r_top = spec.radii[static_cast<size_t>(spec.gamma) + 1];
    EntropyBoundReport rep;
    rep.delta = delta;
    rep.constants = kConstantsNote;
    const double shared = std::pow(r_top / delta, 1.0 / g1);
    if (r_top >= g1) {
        rep.upper_log = shared;
        rep.lower_log = shared;
        rep.branch = "ellipsoid:R>=gamma+1";
    } else {
        rep.upper_log = std::pow(delta, -1.0 / g1);
        rep.lower_log = shared;
        rep.branch = "ellipsoid:R<gamma+1";
    }
    return rep;
}

/// Full Holder class: cover bound composes the polynomial and Holder-sub
/// pieces; packing takes the best of B1, B2 (when feasible) and the
/// Holder-sub lower bound.
inline EntropyBoundReport full_holder_entropy(const SmoothnessClassSpec& spec, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::out_of_range("full_holder_entropy: requires 0 < delta < 1");
    const auto cover = poly_cover_upper(spec, delta);
    const auto sub = holder_sub_entropy(spec, delta);
    EntropyBoundReport rep;
    rep.delta = delta;
    rep.constants = kConstantsNote;
    rep.upper_log = cover.value + sub.upper_log;
    double lower = -std::numeric_limits<double>::infinity();
    std::string which = "none";
    if (auto b1 = poly_pack_lower_B1(spec, delta); b1 && *b1 > lower) {
        lower = *b1;
        which = "B1";
    }
    if (auto f = poly_pack_B2_feasible(spec, delta); f.feasible && f.log_lower > lower) {
        lower = f.log_lower;
        which = "B2";
    }
    if (sub.lower_log && *sub.lower_log > lower) {
        lower = *sub.lower_log;
        which = "holder-sub";
    }
    rep.lower_log = lower;
    rep.branch = "full-holder:" + cover.branch + "+sub|lower=" + which;
    return rep;
}

/// D*_k = binom(d+k-1, d-1): distinct k-th order partials in d variables.
/// Exact integer arithmetic; throws on overflow naming the pair.
inline unsigned long long dstar(int d, int k) {
    if (d < 1 || k < 0) throw std::invalid_argument("dstar: need d >= 1, k >= 0");
    const unsigned long long n = static_cast<unsigned long long>(d) + static_cast<unsigned long long>(k) - 1ULL;
    unsigned long long kk = std::min<unsigned long long>(static_cast<unsigned long long>(d) - 1ULL,
                                                         static_cast<unsigned long long>(k));
    unsigned long long r = 1;
    for (unsigned long long i = 1; i <= kk; ++i) {
        // r * (n-kk+i) / i is exact at every step: it equals C(n-kk+i, i).
        const unsigned __int128 wide = static_cast<unsigned __int128>(r) * (n - kk + i) / i;
        if (wide > static_cast<unsigned __int128>(~0ULL))
            throw std::overflow_error("dstar: overflow at (d=" + std::to_string(d) +
                                      ", k=" + std::to_string(k) + ")");
        r = static_cast<unsigned long long>(wide);
    }
    return r;
}

enum class MultivariateSub { HolderSubD, PolySubD };

/// d-variate entropy bounds. The polynomial subclass has no known packing
/// lower bound in d > 1, so lower_log is absent on that branch.
inline EntropyBoundReport multivariate_entropy(const SmoothnessClassSpec& spec, int d, double delta,
                                               MultivariateSub sub) {
    if (d < 1) throw std::invalid_argument("multivariate_entropy: need d >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::out_of_range("multivariate_entropy: requires 0 < delta < 1");
    const int g = spec.gamma;
    const double g1 = static_cast<double>(g) + 1.0;
    EntropyBoundReport rep;
    rep.delta = delta;
    rep.constants = kConstantsNote;
    if (sub == MultivariateSub::HolderSubD) {
        double rstar = 1.0;
        double fact = 1.0;  // (k-1)!
        for (int k = 1; k <= g + 1; ++k) {
            if (k >= 2) fact *= static_cast<double>(k - 1);
            const double cnt = static_cast<double>(dstar(d, k - 1));
            rstar = std::max(rstar, cnt * spec.radii[static_cast<size_t>(k)] / fact);
        }
        const double v = std::pow(static_cast<double>(d), static_cast<double>(d)) *
                         std::pow(rstar, static_cast<double>(d) / g1) *
                         std::pow(delta, -static_cast<double>(d) / g1);
        rep.upper_log = v;
        rep.lower_log = v;
        rep.branch = "holder-sub-d";
        return rep;
    }
    double min_term = std::numeric_limits<double>::infinity();
    double b1 = 0.0, b2 = 0.0, sum_d = 0.0;
    double fact = 1.0;
    for (int k = 0; k <= g; ++k) {
        if (k >= 1) fact *= static_cast<double>(k);
        const double cnt = static_cast<double>(dstar(d, k));
        const double rk = spec.radii[static_cast<size_t>(k)];
        const double term = std::log(4.0 * g1 * cnt * rk / (delta * fact));
        min_term = std::min(min_term, term);
        b1 += cnt * term;
        b2 += cnt * std::log(rk);
        sum_d += cnt;
    }
    if (min_term >= 0.0) {
        rep.upper_log = b1;
        rep.branch = "poly-sub-d:B1bar";
    } else {
        rep.upper_log = sum_d * std::log(1.0 / delta) + b2;
        rep.branch = "poly-sub-d:B2bar";
    }
    rep.lower_log = std::nullopt;  // no multivariate polynomial packing bound available
    return rep;
}

/// Legendre coefficients of a polynomial given its Taylor vector f^{(k)}(0),
/// k = 0..gamma:
///   theta~_k = (k + 1/2) sum_m f^{(k+2m)}(0) / (2^{k+2m} m! (1/2)_{k+m+1}).
inline std::vector<double> legendre_coeffs(const std::vector<double>& taylor) {
    const int g = static_cast<int>(taylor.size()) - 1;
    if (g < 0) throw std::invalid_argument("legendre_coeffs: empty Taylor vector");
    std::vector<double> theta(taylor.size(), 0.0);
    for (int k = 0; k <= g; ++k) {
        double acc = 0.0;
        for (int m = 0; k + 2 * m <= g; ++m) {
            const int j = k + 2 * m;
            double denom = std::pow(2.0, j) * detail::factorial_d(m);
            // Pochhammer (1/2)_{k+m+1}
            double poch = 1.0;
            for (int i = 0; i < k + m + 1; ++i) poch *= 0.5 + static_cast<double>(i);
            denom *= poch;
            acc += taylor[static_cast<size_t>(j)] / denom;
        }
        theta[static_cast<size_t>(k)] = (static_cast<double>(k) + 0.5) * acc;
    }
    return theta;
}

/// Unweighted L2[-1,1] distance between two Legendre expansions:
/// sqrt( sum_k 2/(2k+1) (theta_k - theta'_k)^2 ).
inline double legendre_l2_distance(const std::vector<double>& theta,
                                   const std::vector<double>& theta_prime) {
    if (theta.size() != theta_prime.size())
        throw std::invalid_argument("legendre_l2_distance: length mismatch");
    double acc = 0.0;
    for (size_t k = 0; k < theta.size(); ++k) {
        const double dk = theta[k] - theta_prime[k];
        acc += 2.0 / (2.0 * static_cast<double>(k) + 1.0) * dk * dk;
    }
    return std::sqrt(acc);
}

struct PackingSet {
    std::vector<std::vector<double>> members;  // monomial coefficients, length gamma+1
    double delta = 0.0;
    unsigned long long m0 = 0;
    double b = 1.0;
    int k_tilde = 0;
    double min_pair_distance = 0.0;
};

/// Constructive packing set behind the B2 bound. The grid coordinate runs
/// over M_0 evenly spaced points spanning [-R_k~/k~!, R_k~/k~!] (the literal
/// 3*delta*S spacing would push the last point outside the polyhedron; the
/// even grid keeps membership exact while staying within one step of it).
/// Every pair is then verified > delta apart in unweighted L2 on the domain;
/// failure throws, never passes silently.
inline PackingSet build_packing_set(const SmoothnessClassSpec& spec, double delta, double b,
                                    unsigned long long size_cap = 50000) {
    if (!(b >= 1.0)) throw std::invalid_argument("build_packing_set: requires b >= 1");
    const auto feas = poly_pack_B2_feasible(spec, delta);
    if (!feas.feasible)
        throw std::invalid_argument("build_packing_set: (gamma, radii, delta) is infeasible");
    if (feas.m0 > size_cap)
        throw std::length_error("build_packing_set: M_0 = " + std::to_string(feas.m0) +
                                " exceeds the verification cap " + std::to_string(size_cap));
    const int g = spec.gamma;
    const double half_width =
        spec.radii[static_cast<size_t>(feas.k_tilde)] / detail::factorial_d(feas.k_tilde);
    const unsigned long long m0 = feas.m0;
    const double step = (m0 > 1) ? 2.0 * half_width / static_cast<double>(m0 - 1) : 0.0;

    // Gated coordinates theta*_k = R_k delta / (b k! (gamma+1)) for k != k~.
    std::vector<int> gated;
    std::vector<double> gate_value(static_cast<size_t>(g) + 1, 0.0);
    for (int k = 0; k <= g; ++k) {
        if (k == feas.k_tilde) continue;
        gated.push_back(k);
        gate_value[static_cast<size_t>(k)] = spec.radii[static_cast<size_t>(k)] * delta /
                                             (b * detail::factorial_d(k) * static_cast<double>(g + 1));
    }
    const unsigned long long pattern_count =
        gated.size() >= 63 ? (1ULL << 63) : (1ULL << gated.size());

    PackingSet out;
    out.delta = delta;
    out.m0 = m0;
    out.b = b;
    out.k_tilde = feas.k_tilde;
    out.members.reserve(m0);
    for (unsigned long long i = 0; i < m0; ++i) {
        std::vector<double> coeff(static_cast<size_t>(g) + 1, 0.0);
        coeff[static_cast<size_t>(feas.k_tilde)] = -half_width + static_cast<double>(i) * step;
        const unsigned long long lambda = gated.empty() ? 0 : i % pattern_count;
        for (size_t j = 0; j < gated.size(); ++j)
            if ((lambda >> j) & 1ULL)
                coeff[static_cast<size_t>(gated[j])] = gate_value[static_cast<size_t>(gated[j])];
        out.members.push_back(std::move(coeff));
    }

    // Membership: |theta_k| <= R_k/k! throughout.
    double fact = 1.0;
    for (int k = 0; k <= g; ++k) {
        if (k >= 1) fact *= static_cast<double>(k);
        const double cap = spec.radii[static_cast<size_t>(k)] / fact * (1.0 + 1e-12);
        for (const auto& mcoef : out.members)
            if (std::abs(mcoef[static_cast<size_t>(k)]) > cap)
                throw std::runtime_error("build_packing_set: member escapes the polyhedron");
    }

    // Pairwise separation in L2(domain), exact quadrature on degree-2g
    // integrands. Member values at the nodes are precomputed once.
    const auto& rule = quad::gauss_legendre(g + 1);
    const double mid = 0.5 * (spec.domain.lo + spec.domain.hi);
    const double hw = 0.5 * (spec.domain.hi - spec.domain.lo);
    const size_t q = rule.nodes.size();
    std::vector<double> vals(out.members.size() * q);
    for (size_t i = 0; i < out.members.size(); ++i)
        for (size_t a = 0; a < q; ++a)
            vals[i * q + a] = poly::eval(out.members[i], mid + hw * rule.nodes[a]);
    double min_dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < out.members.size(); ++i)
        for (size_t j = i + 1; j < out.members.size(); ++j) {
            double acc = 0.0;
            for (size_t a = 0; a < q; ++a) {
                const double dv = vals[i * q + a] - vals[j * q + a];
                acc += rule.weights[a] * dv * dv;
            }
            const double dist = std::sqrt(acc * hw);
            if (!(dist > delta))
                throw std::runtime_error("build_packing_set: separation check failed for pair (" +
                                         std::to_string(i) + "," + std::to_string(j) +
                                         "), distance " + std::to_string(dist));
            min_dist = std::min(min_dist, dist);
        }
    out.min_pair_distance = out.members.size() > 1 ? min_dist : 0.0;
    return out;
}

/// Product-grid cover of the coefficient polyhedron: axis k carries cells of
/// width <= 2 delta/(gamma+1) so any theta has a grid point within delta in
/// the l1 coefficient metric, hence a sup-norm delta-cover of the class.
/// Stored as per-axis grids; members are enumerated lazily (axis 0 most
/// significant).
struct ProductCover {
    std::vector<std::vector<double>> axes;

    unsigned long long size() const {
        unsigned long long s = 1;
        for (const auto& ax : axes) s *= ax.size();
        return s;
    }
    double log_size() const {
        double acc = 0.0;
        for (const auto& ax : axes) acc += std::log(static_cast<double>(ax.size()));
        return acc;
    }
    std::vector<double> member(unsigned long long idx) const {
        std::vector<double> out(axes.size());
        for (size_t k = axes.size(); k-- > 0;) {
            const unsigned long long nk = axes[k].size();
            out[k] = axes[k][static_cast<size_t>(idx % nk)];
            idx /= nk;
        }
        return out;
    }
    /// Per-axis nearest grid point (the l1-closest cover element).
    std::vector<double> nearest(const std::vector<double>& theta) const {
        if (theta.size() != axes.size()) throw std::invalid_argument("ProductCover: size mismatch");
        std::vector<double> out(axes.size());
        for (size_t k = 0; k < axes.size(); ++k) {
            const auto& ax = axes[k];
            auto it = std::lower_bound(ax.begin(), ax.end(), theta[k]);
            double best = (it == ax.end()) ? ax.back() : *it;
            if (it != ax.begin()) {
                const double lo = *(it - 1);
                if (std::abs(theta[k] - lo) < std::abs(theta[k] - best)) best = lo;
            }
            out[k] = best;
        }
        return out;
    }
};

inline ProductCover build_product_cover(const SmoothnessClassSpec& spec, double delta,
                                        unsigned long long size_cap = 10000000ULL) {
    detail::require_positive_delta(delta);
    const int g = spec.gamma;
    const double a_step = delta / static_cast<double>(g + 1);  // per-axis radius a_k * delta
    ProductCover cover;
    cover.axes.resize(static_cast<size_t>(g) + 1);
    double fact = 1.0;
    unsigned long long total = 1;
    for (int k = 0; k <= g; ++k) {
        if (k >= 1) fact *= static_cast<double>(k);
        const double r = spec.radii[static_cast<size_t>(k)] / fact;
        // Endpoint-inclusive grid with cells no wider than 2 a_k delta, so
        // every coordinate sits within a_k delta of a grid point.
        const auto cells = std::max<unsigned long long>(
            1, static_cast<unsigned long long>(std::ceil(r / a_step)));
        const unsigned long long nk = cells + 1;
        if (total > size_cap / nk) throw std::length_error("build_product_cover: size exceeds cap");
        total *= nk;
        auto& ax = cover.axes[static_cast<size_t>(k)];
        ax.resize(static_cast<size_t>(nk));
        for (unsigned long long j = 0; j < nk; ++j)
            ax[static_cast<size_t>(j)] =
                -r + 2.0 * r * static_cast<double>(j) / static_cast<double>(cells);
    }
    return cover;
}

}  // namespace phasefit::entropy
