#pragma once

// Monte Carlo harness: data generation under the Gaussian-noise model,
// certified test functions, ISE/SMSE estimation, the KL diagnostic, and the
// phase-transition experiment sweep.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "phasefit/krr.hpp"
#include "phasefit/poly.hpp"
#include "phasefit/quadrature.hpp"
#include "phasefit/regime.hpp"
#include "phasefit/rng.hpp"

namespace phasefit::sim {

// ---------------------------------------------------------------------------
// Test functions, each constructed together with a membership certificate.
// Construction throws if the certificate fails; a truth is never silently
// outside its class.

struct Certificate {
    std::string kind;
    std::string details;
};

/// Order-(k+1) Sobolev norm squared of a polynomial truth:
/// sum_{j<=k} f^{(j)}(0)^2 + int_0^1 (f^{(k+1)})^2, exact.
inline double sobolev_norm_sq(const std::vector<double>& coeffs, int order_k) {
    double acc = 0.0;
    std::vector<double> d = coeffs;
    double fact = 1.0;
    for (int j = 0; j <= order_k; ++j) {
        if (j > 0) fact *= static_cast<double>(j);
        const double v = (static_cast<size_t>(j) < coeffs.size())
                             ? coeffs[static_cast<size_t>(j)] * fact
                             : 0.0;
        acc += v * v;
    }
    for (int j = 0; j <= order_k; ++j) d = poly::derivative(d);
    return acc + poly::integral_sq(d, 0.0, 1.0);
}

class TestFunction {
public:
    double operator()(double x) const {
        if (x < 0.0 || x > 1.0) throw std::domain_error("TestFunction: x must lie in [0,1]");
        if (const auto* p = std::get_if<PolyData>(&impl_)) return poly::eval(p->coeffs, x);
        const auto& e = std::get<CosineData>(impl_);
        double acc = e.theta[0];
        for (size_t m = 1; m < e.theta.size(); ++m)
            acc += e.theta[m] * std::sqrt(2.0) * std::cos(static_cast<double>(m) * M_PI * x);
        return acc;
    }

    const std::string& id() const { return id_; }
    int gamma() const { return gamma_; }
    const Certificate& certificate() const { return cert_; }

    bool is_polynomial() const { return std::holds_alternative<PolyData>(impl_); }
    const std::vector<double>& coeffs() const { return std::get<PolyData>(impl_).coeffs; }

    /// Fixed member of the polynomial star polyhedron: theta_0 = c_bar/6 and
    /// theta_k = c_bar/(6 gamma k!) for k >= 1. Certified against both the
    /// polyhedron bounds and the order-(gamma+1) Sobolev norm <= c_bar.
    static TestFunction poly_star(int gamma, double c_bar) {
        if (gamma < 0 || !(c_bar > 0.0))
            throw std::invalid_argument("poly_star: need gamma >= 0, c_bar > 0");
        std::vector<double> coeffs(static_cast<size_t>(gamma) + 1, 0.0);
        coeffs[0] = c_bar / 6.0;
        double fact = 1.0;
        for (int k = 1; k <= gamma; ++k) {
            fact *= static_cast<double>(k);
            coeffs[static_cast<size_t>(k)] = c_bar / (6.0 * gamma * fact);
        }
        double norm_sq = 0.0;
        double kfact = 1.0;
        for (int k = 0; k <= gamma; ++k) {
            if (k >= 1) kfact *= static_cast<double>(k);
            const double deriv0 = coeffs[static_cast<size_t>(k)] * kfact;
            norm_sq += deriv0 * deriv0;
        }
        if (!(norm_sq <= c_bar * c_bar * (1.0 + 1e-12)))
            throw std::runtime_error("poly_star: Sobolev norm certificate failed");
        TestFunction f;
        f.id_ = "poly_star";
        f.gamma_ = gamma;
        f.impl_ = PolyData{std::move(coeffs)};
        f.cert_ = {"polyhedron+sobolev-norm",
                   "norm_sq=" + std::to_string(norm_sq) + " <= " + std::to_string(c_bar * c_bar)};
        return f;
    }

    /// b x^{gamma+1} (1-x)^{gamma+1} with b the largest value keeping every
    /// derivative up to order gamma+1 within the radii on a 2048-point grid.
    /// All derivatives through order gamma vanish at 0 and 1.
    static TestFunction bump(int gamma, std::vector<double> radii = {}) {
        if (gamma < 0) throw std::invalid_argument("bump: need gamma >= 0");
        if (radii.empty()) radii.assign(static_cast<size_t>(gamma) + 2, 1.0);
        if (radii.size() != static_cast<size_t>(gamma) + 2)
            throw std::invalid_argument("bump: radii must have gamma+2 entries");

        // Coefficients of x^{gamma+1}(1-x)^{gamma+1}.
        std::vector<double> base(static_cast<size_t>(2 * (gamma + 1)) + 1, 0.0);
        double binom = 1.0;
        for (int j = 0; j <= gamma + 1; ++j) {
            if (j > 0) binom *= static_cast<double>(gamma + 2 - j) / static_cast<double>(j);
            base[static_cast<size_t>(gamma + 1 + j)] = ((j % 2 == 0) ? 1.0 : -1.0) * binom;
        }
        const int grid_n = 2048;
        double worst = 0.0;
        std::vector<double> deriv = base;
        for (int k = 0; k <= gamma + 1; ++k) {
            if (k > 0) deriv = poly::derivative(deriv);
            double mx = 0.0;
            for (int i = 0; i <= grid_n; ++i)
                mx = std::max(mx, std::abs(poly::eval(deriv, static_cast<double>(i) / grid_n)));
            worst = std::max(worst, mx / radii[static_cast<size_t>(k)]);
        }
        if (!(worst > 0.0)) throw std::runtime_error("bump: degenerate normalization");
        const double b = 1.0 / worst;
        std::vector<double> coeffs(base.size());
        for (size_t i = 0; i < base.size(); ++i) coeffs[i] = b * base[i];

        // Certificate: re-check the grid bounds and the vanishing derivatives.
        deriv = coeffs;
        for (int k = 0; k <= gamma + 1; ++k) {
            if (k > 0) deriv = poly::derivative(deriv);
            for (int i = 0; i <= grid_n; ++i) {
                const double v = std::abs(poly::eval(deriv, static_cast<double>(i) / grid_n));
                if (!(v <= radii[static_cast<size_t>(k)] * (1.0 + 1e-9)))
                    throw std::runtime_error("bump: derivative bound certificate failed");
            }
            if (k <= gamma) {
                if (std::abs(poly::eval(deriv, 0.0)) > 1e-12 ||
                    std::abs(poly::eval(deriv, 1.0)) > 1e-12)
                    throw std::runtime_error("bump: boundary derivative certificate failed");
            }
        }
        TestFunction f;
        f.id_ = "bump";
        f.gamma_ = gamma;
        f.impl_ = PolyData{std::move(coeffs)};
        f.cert_ = {"grid-derivative-bounds", "b=" + std::to_string(b) + ", grid=2049"};
        return f;
    }

    /// Arbitrary polynomial truth (monomial coefficients), certified against
    /// the order-(gamma+1) Sobolev norm budget c_bar.
    static TestFunction poly(std::vector<double> coeffs, int gamma, double c_bar) {
        if (gamma < 0 || !(c_bar > 0.0) || coeffs.empty())
            throw std::invalid_argument("poly: need gamma >= 0, c_bar > 0, nonempty coeffs");
        const double norm_sq = sobolev_norm_sq(coeffs, gamma);
        if (!(norm_sq <= c_bar * c_bar * (1.0 + 1e-12)))
            throw std::runtime_error("poly: Sobolev norm certificate failed (norm_sq=" +
                                     std::to_string(norm_sq) + ")");
        TestFunction f;
        f.id_ = "poly";
        f.gamma_ = gamma;
        f.impl_ = PolyData{std::move(coeffs)};
        f.cert_ = {"sobolev-norm",
                   "norm_sq=" + std::to_string(norm_sq) + " <= " + std::to_string(c_bar * c_bar)};
        return f;
    }

    /// Ellipsoid member in the cosine basis phi_1 = 1,
    /// phi_m = sqrt(2) cos((m-1) pi x), with theta_m = R sqrt(mu_m / M) s_m
    /// and mu_m = (c m)^{-2(gamma+1)}. The ellipsoid norm is R^2 exactly.
    static TestFunction ellipsoid_member(int gamma, double radius, int m_terms, uint64_t seed,
                                         double eigen_decay_c = 1.0) {
        if (gamma < 0 || !(radius > 0.0) || m_terms < 1 || !(eigen_decay_c > 0.0))
            throw std::invalid_argument("ellipsoid_member: bad parameters");
        rng::Sampler sampler(rng::splitmix64(seed));
        std::vector<double> theta(static_cast<size_t>(m_terms));
        std::vector<double> mus(static_cast<size_t>(m_terms));
        for (int m = 1; m <= m_terms; ++m) {
            const double mu = std::pow(eigen_decay_c * m, -2.0 * (gamma + 1));
            mus[static_cast<size_t>(m - 1)] = mu;
            theta[static_cast<size_t>(m - 1)] =
                radius * std::sqrt(mu / static_cast<double>(m_terms)) * sampler.sign();
        }
        double norm_sq = 0.0;
        for (size_t m = 0; m < theta.size(); ++m) norm_sq += theta[m] * theta[m] / mus[m];
        if (!(std::abs(norm_sq - radius * radius) <= 1e-9 * radius * radius))
            throw std::runtime_error("ellipsoid_member: norm certificate failed");
        TestFunction f;
        f.id_ = "ellipsoid_member";
        f.gamma_ = gamma;
        f.impl_ = CosineData{std::move(theta)};
        f.cert_ = {"ellipsoid-norm", "norm_sq=" + std::to_string(norm_sq) +
                                         " (target R^2=" + std::to_string(radius * radius) + ")"};
        return f;
    }

private:
    struct PolyData {
        std::vector<double> coeffs;
    };
    struct CosineData {
        std::vector<double> theta;  // theta[m-1] multiplies phi_m
    };

    std::string id_;
    int gamma_ = 0;
    Certificate cert_;
    std::variant<PolyData, CosineData> impl_;
};

// ---------------------------------------------------------------------------
// Data generation and error functionals.

struct Dataset {
    std::vector<double> xs;
    std::vector<double> ys;
};

/// Y_i = f(X_i) + sigma eps_i with X_i ~ Uniform[0,1] i.i.d.; the whole draw
/// is determined by the seed (uniforms first, then normals).
template <typename F>
Dataset gen_data(F&& truth, long long n, double sigma, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_data: need n >= 1");
    if (!(sigma >= 0.0)) throw std::invalid_argument("gen_data: need sigma >= 0");
    rng::Sampler sampler(seed);
    Dataset d;
    d.xs.resize(static_cast<size_t>(n));
    d.ys.resize(static_cast<size_t>(n));
    for (auto& x : d.xs) x = sampler.uniform01();
    for (size_t i = 0; i < d.xs.size(); ++i) d.ys[i] = truth(d.xs[i]) + sigma * sampler.normal();
    return d;
}

/// int_0^1 (f - g)^2 dx by 64-panel composite Gauss-Legendre with roughly
/// quad_points nodes in total. Uniform design makes the weighted and
/// unweighted integrals coincide.
template <typename F, typename G>
double ise(F&& f, G&& g, int quad_points = 256) {
    if (quad_points < 8) throw std::invalid_argument("ise: need quad_points >= 8");
    return quad::integrate_points(
        [&](double x) {
            const double d = f(x) - g(x);
            return d * d;
        },
        0.0, 1.0, quad_points);
}

template <typename F, typename G>
double smse(F&& f_hat, G&& f, const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("smse: empty design");
    double acc = 0.0;
    for (double x : xs) {
        const double d = f_hat(x) - f(x);
        acc += d * d;
    }
    return acc / static_cast<double>(xs.size());
}

/// KL divergence between the n-sample Gaussian regression models with mean
/// functions f and g: (n / 2 sigma^2) * int (f-g)^2.
template <typename F, typename G>
double kl_pair(F&& f, G&& g, long long n, double sigma, int quad_points = 256) {
    if (!(sigma > 0.0)) throw std::invalid_argument("kl_pair: need sigma > 0");
    return static_cast<double>(n) / (2.0 * sigma * sigma) * ise(f, g, quad_points);
}

// ---------------------------------------------------------------------------
// Experiment configuration and the sweep.

struct DegreeToken {
    enum class Kind { GammaStar, GammaMax, Heuristic, Fixed };
    Kind kind = Kind::Fixed;
    int fixed = 0;

    std::string str() const {
        switch (kind) {
            case Kind::GammaStar: return "gamma_star";
            case Kind::GammaMax: return "gamma_max";
            case Kind::Heuristic: return "heuristic";
            case Kind::Fixed: return "fixed:" + std::to_string(fixed);
        }
        return "?";
    }
};

struct TruthSpec {
    std::string id = "bump";  // poly_star | bump | poly | ellipsoid_member
    int gamma = 0;
    double c_bar = 6.0;           // poly_star, poly
    std::vector<double> coeffs;   // poly
    double radius = 1.0;          // ellipsoid_member
    int m_terms = 16;             // ellipsoid_member
    uint64_t fn_seed = 1;         // ellipsoid_member sign pattern

    TestFunction build() const {
        if (id == "poly_star") return TestFunction::poly_star(gamma, c_bar);
        if (id == "bump") return TestFunction::bump(gamma);
        if (id == "poly") return TestFunction::poly(coeffs, gamma, c_bar);
        if (id == "ellipsoid_member")
            return TestFunction::ellipsoid_member(gamma, radius, m_terms, fn_seed);
        throw std::invalid_argument("TruthSpec: unknown truth id '" + id + "'");
    }
};

struct ExperimentConfig {
    std::vector<long long> n_grid;
    double sigma = 1.0;
    TruthSpec truth;
    std::vector<DegreeToken> degrees;
    double lambda_multiplier = 1.0;
    int replications = 1;
    int quadrature_points = 256;
    uint64_t seed = 0;
    std::string density = "uniform01";

    void validate() const {
        if (n_grid.empty()) throw std::invalid_argument("config: n_grid must be nonempty");
        for (long long n : n_grid)
            if (n < 1) throw std::invalid_argument("config: n_grid entries must be >= 1");
        if (!(sigma >= 0.0)) throw std::invalid_argument("config: sigma must be >= 0");
        if (degrees.empty()) throw std::invalid_argument("config: degrees must be nonempty");
        if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
        if (quadrature_points < 8)
            throw std::invalid_argument("config: quadrature_points must be >= 8");
        if (density != "uniform01")
            throw std::invalid_argument("config: only the uniform01 density is implemented");
        if (lambda_multiplier <= 0.0)
            throw std::invalid_argument("config: lambda_multiplier must be > 0");
    }
};

struct MiseResult {
    long long n = 0;
    double sigma = 0.0;
    int gamma_true = 0;
    std::string degree_token;
    int degree_used = 0;  // kernel order
    double lambda = 0.0;
    double mise_mean = 0.0;
    double mise_stderr = 0.0;
    double smse_mean = 0.0;
    int replications = 0;
    uint64_t seed = 0;
    int fit_failures = 0;
    bool stderr_degenerate = false;  // single replication
};

/// Kernel order for a degree token at sample size n.
inline int resolve_order(const DegreeToken& token, long long n, const ExperimentConfig& config) {
    switch (token.kind) {
        case DegreeToken::Kind::GammaStar: {
            const double sig = config.sigma > 0.0 ? config.sigma : 1.0;
            return regime::gamma_star(n, sig * sig, config.truth.gamma);
        }
        case DegreeToken::Kind::GammaMax: return config.truth.gamma;
        case DegreeToken::Kind::Heuristic: return regime::heuristic_degree(n) - 1;
        case DegreeToken::Kind::Fixed: return token.fixed;
    }
    return 0;
}

/// Regularization for a cell fitting order k at sample size n:
///   lambda = (k+1)/n v (1/n)^{(2k+2)/(2k+3)},
/// the critical-radius value for the order-k kernel, which reduces to the
/// regime rules at k = gamma* (small n) and k = gamma (large n). Scaled by
/// the config multiplier.
inline double resolve_lambda(long long n, int order, const ExperimentConfig& config) {
    const double nd = static_cast<double>(n);
    const double small_form = (order + 1) / nd;
    const double large_form = std::pow(1.0 / nd, (2.0 * order + 2.0) / (2.0 * order + 3.0));
    return std::max(small_form, large_form) * config.lambda_multiplier;
}

/// Monte Carlo MISE of the order-`order` KRR fit at sample size n.
/// Replication r uses seed mix(seed, n, order, r), so results do not depend
/// on evaluation order. Order-0 fits go through the O(n) spline route (the
/// same estimator; see krr::fit_k0).
inline MiseResult mise_mc(const ExperimentConfig& config, long long n, int order, double lambda,
                          const std::string& token_label = "") {
    config.validate();
    if (order < 0) throw std::invalid_argument("mise_mc: order must be >= 0");
    const TestFunction truth = config.truth.build();
    const int reps = config.replications;

    std::vector<double> ises, smses;
    ises.reserve(static_cast<size_t>(reps));
    int failures = 0;
    for (int r = 1; r <= reps; ++r) {
        const uint64_t seed_r = rng::mix_seed(config.seed, static_cast<uint64_t>(n),
                                              static_cast<uint64_t>(order), static_cast<uint64_t>(r));
        const Dataset data = gen_data(truth, n, config.sigma, seed_r);
        try {
            if (order == 0) {
                const auto model = krr::fit_k0(data.xs, data.ys, lambda);
                ises.push_back(ise([&](double x) { return model.predict(x); }, truth,
                                   config.quadrature_points));
                smses.push_back(smse([&](double x) { return model.predict(x); }, truth, data.xs));
            } else {
                const auto model = krr::fit(order, data.xs, data.ys, lambda);
                ises.push_back(ise([&](double x) { return model.predict(x); }, truth,
                                   config.quadrature_points));
                smses.push_back(smse([&](double x) { return model.predict(x); }, truth, data.xs));
            }
        } catch (const std::exception&) {
            ++failures;
        }
    }
    if (10 * failures > reps)
        throw std::runtime_error("mise_mc: " + std::to_string(failures) + " of " +
                                 std::to_string(reps) + " fits failed");

    const auto mean_of = [](const std::vector<double>& v) {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc / static_cast<double>(v.size());
    };
    MiseResult out;
    out.n = n;
    out.sigma = config.sigma;
    out.gamma_true = config.truth.gamma;
    out.degree_token = token_label;
    out.degree_used = order;
    out.lambda = lambda;
    out.replications = reps;
    out.seed = config.seed;
    out.fit_failures = failures;
    out.mise_mean = mean_of(ises);
    out.smse_mean = mean_of(smses);
    if (ises.size() <= 1) {
        out.mise_stderr = 0.0;
        out.stderr_degenerate = true;
    } else {
        double ss = 0.0;
        for (double v : ises) ss += (v - out.mise_mean) * (v - out.mise_mean);
        const double sd = std::sqrt(ss / static_cast<double>(ises.size() - 1));
        out.mise_stderr = sd / std::sqrt(static_cast<double>(ises.size()));
    }
    return out;
}

/// Cartesian sweep over n_grid x degrees, rows in deterministic (n, degree)
/// order. Cells are independent given their derived seeds, so they may be
/// computed on up to `threads` workers without changing the output.
inline std::vector<MiseResult> sweep(const ExperimentConfig& config, int threads = 1) {
    config.validate();
    struct Cell {
        long long n;
        DegreeToken token;
        int order;
        double lambda;
    };
    std::vector<Cell> cells;
    for (long long n : config.n_grid)
        for (const auto& token : config.degrees) {
            const int order = resolve_order(token, n, config);
            if (order < 0) throw std::invalid_argument("sweep: token resolves to a negative order");
            if (n < order + 1)
                std::fprintf(stderr, "sweep: warning: n=%lld below degree+1 for token %s\n", n,
                             token.str().c_str());
            cells.push_back({n, token, order, resolve_lambda(n, order, config)});
        }

    std::vector<MiseResult> rows(cells.size());
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
    if (workers == 1) {
        for (size_t i = 0; i < cells.size(); ++i)
            rows[i] = mise_mc(config, cells[i].n, cells[i].order, cells[i].lambda,
                              cells[i].token.str());
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w]() {
                try {
                    for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                        rows[i] = mise_mc(config, cells[i].n, cells[i].order, cells[i].lambda,
                                          cells[i].token.str());
                } catch (...) {
                    errors[static_cast<size_t>(w)] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return rows;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_stderr = 0.0;
};

/// OLS of log(mise) on log(n).
inline SlopeFit slope_fit(const std::vector<double>& ns, const std::vector<double>& mises) {
    if (ns.size() != mises.size() || ns.size() < 3)
        throw std::invalid_argument("slope_fit: need >= 3 aligned points");
    const size_t m = ns.size();
    std::vector<double> lx(m), ly(m);
    for (size_t i = 0; i < m; ++i) {
        if (!(ns[i] > 0.0) || !(mises[i] > 0.0))
            throw std::invalid_argument("slope_fit: inputs must be positive");
        lx[i] = std::log(ns[i]);
        ly[i] = std::log(mises[i]);
    }
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < m; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("slope_fit: degenerate n grid");
    SlopeFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss_res = 0.0, ss_tot = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double fitv = out.intercept + out.slope * lx[i];
        ss_res += (ly[i] - fitv) * (ly[i] - fitv);
        ss_tot += (ly[i] - my) * (ly[i] - my);
    }
    out.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    if (m > 2 && ss_res >= 0.0)
        out.slope_stderr = std::sqrt(ss_res / static_cast<double>(m - 2) / sxx);
    return out;
}

// ---------------------------------------------------------------------------
// CSV rendering (17 significant digits, round-trip exact).

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline constexpr const char* kCsvHeader =
    "n,sigma,gamma_true,degree_token,degree_used,lambda,mise_mean,mise_stderr,smse_mean,"
    "replications,seed";

inline std::string to_csv(const std::vector<MiseResult>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.n);
        out += ',';
        out += format_g17(r.sigma);
        out += ',';
        out += std::to_string(r.gamma_true);
        out += ',';
        out += r.degree_token;
        out += ',';
        out += std::to_string(r.degree_used);
        out += ',';
        out += format_g17(r.lambda);
        out += ',';
        out += format_g17(r.mise_mean);
        out += ',';
        out += format_g17(r.mise_stderr);
        out += ',';
        out += format_g17(r.smse_mean);
        out += ',';
        out += std::to_string(r.replications);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

}  // namespace phasefit::sim
