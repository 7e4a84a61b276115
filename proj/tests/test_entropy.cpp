#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "phasefit/entropy.hpp"
#include "phasefit/poly.hpp"
#include "phasefit/quadrature.hpp"

using namespace phasefit;
using entropy::ClassKind;
using entropy::RadiusProfile;
using entropy::SmoothnessClassSpec;

namespace {

SmoothnessClassSpec poly_spec(int gamma, RadiusProfile profile = RadiusProfile::constant(1.0)) {
    return SmoothnessClassSpec::make(ClassKind::PolySub, gamma, profile);
}

}  // namespace

TEST_CASE("make_radii follows the profiles") {
    CHECK(entropy::make_radii(RadiusProfile::constant(1.0), 2) ==
          std::vector<double>{1, 1, 1, 1});
    CHECK(entropy::make_radii(RadiusProfile::factorial(1.0), 3) ==
          std::vector<double>{1, 1, 2, 6, 24});
    CHECK(entropy::make_radii(RadiusProfile::factorial_minus_one(2.0), 2) ==
          std::vector<double>{2, 2, 2, 4});
    CHECK_THROWS_AS(entropy::make_radii(RadiusProfile::explicit_values({1.0, -1.0, 1.0}), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(entropy::make_radii(RadiusProfile::explicit_values({1.0, 1.0}), 3),
                    std::invalid_argument);
}

TEST_CASE("poly_cover_upper branches") {
    auto r = entropy::poly_cover_upper(poly_spec(0), 1.0);
    CHECK(r.branch == "B1bar");
    CHECK(r.value == doctest::Approx(std::log(4.0)).epsilon(1e-14));

    r = entropy::poly_cover_upper(poly_spec(0), 8.0);
    CHECK(r.branch == "B2bar");
    CHECK(r.value == doctest::Approx(-std::log(8.0)).epsilon(1e-14));

    r = entropy::poly_cover_upper(poly_spec(2), 0.1);
    const double expect = std::log(120.0) + std::log(120.0) + std::log(60.0);
    CHECK(r.branch == "B1bar");
    CHECK(r.value == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("poly_pack_lower_B1 values and monotonicity") {
    auto v = entropy::poly_pack_lower_B1(poly_spec(0), 0.5);
    REQUIRE(v.has_value());
    CHECK(*v == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    v = entropy::poly_pack_lower_B1(poly_spec(1), 1.0);
    REQUIRE(v.has_value());
    CHECK(*v == doctest::Approx(-2.0 * std::log(9.0)).epsilon(1e-13));

    double prev = std::numeric_limits<double>::infinity();
    for (double delta = 0.01; delta < 100.0; delta *= 4.0) {
        const auto b = entropy::poly_pack_lower_B1(poly_spec(3), delta);
        REQUIRE(b.has_value());
        CHECK(*b < prev);
        prev = *b;
    }
}

TEST_CASE("poly_pack_B2_feasible arithmetic") {
    auto f = entropy::poly_pack_B2_feasible(poly_spec(0), 0.01);
    CHECK(f.k_tilde == 0);
    CHECK(f.s == doctest::Approx(1.0));
    CHECK(f.m0 == 68);
    CHECK(f.feasible);
    CHECK(f.log_lower == doctest::Approx(std::log(2.0)));

    f = entropy::poly_pack_B2_feasible(poly_spec(0), 1.0);
    CHECK_FALSE(f.feasible);  // 3*delta*S = 3 > 2 R_0

    // delta -> 0 becomes feasible for any gamma
    for (int g : {1, 3, 6}) {
        bool reached = false;
        for (double delta = 0.5; delta > 1e-9; delta *= 0.5)
            if (entropy::poly_pack_B2_feasible(poly_spec(g), delta).feasible) {
                reached = true;
                break;
            }
        CHECK(reached);
    }
}

TEST_CASE("holder_sub_entropy") {
    auto rep = entropy::holder_sub_entropy(
        SmoothnessClassSpec::make(ClassKind::HolderSub, 0, RadiusProfile::constant(1.0)), 0.01);
    CHECK(rep.upper_log == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(*rep.lower_log == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(rep.branch == "holder-sub:R0>=1");

    rep = entropy::holder_sub_entropy(
        SmoothnessClassSpec::make(ClassKind::HolderSub, 1, RadiusProfile::factorial(1.0)), 0.125);
    CHECK(rep.upper_log == doctest::Approx(4.0).epsilon(1e-12));  // R* = 2

    rep = entropy::holder_sub_entropy(
        SmoothnessClassSpec::make(ClassKind::HolderSub, 0,
                                  RadiusProfile::explicit_values({0.25, 1.0})),
        0.25);
    CHECK(rep.branch == "holder-sub:R0<1");
    CHECK(*rep.lower_log == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(entropy::holder_sub_entropy(
                        SmoothnessClassSpec::make(ClassKind::HolderSub, 0,
                                                  RadiusProfile::constant(1.0)),
                        1.0),
                    std::out_of_range);
}

TEST_CASE("ellipsoid_entropy") {
    auto rep = entropy::ellipsoid_entropy(
        SmoothnessClassSpec::make(ClassKind::Ellipsoid, 0, RadiusProfile::constant(1.0)), 0.01);
    CHECK(rep.upper_log == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(*rep.lower_log == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(rep.branch == "ellipsoid:R>=gamma+1");

    rep = entropy::ellipsoid_entropy(
        SmoothnessClassSpec::make(ClassKind::Ellipsoid, 1,
                                  RadiusProfile::explicit_values({1.0, 1.0, 0.5})),
        1.0 / 16.0);
    CHECK(rep.branch == "ellipsoid:R<gamma+1");
    CHECK(rep.upper_log == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(*rep.lower_log == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));

    // delta scaled by 2^{gamma+1} halves both bounds
    for (int g : {0, 1, 3}) {
        const auto spec =
            SmoothnessClassSpec::make(ClassKind::Ellipsoid, g, RadiusProfile::constant(2.0));
        const double delta = 0.01;
        const auto a = entropy::ellipsoid_entropy(spec, delta);
        const auto b = entropy::ellipsoid_entropy(spec, delta * std::pow(2.0, g + 1));
        CHECK(b.upper_log == doctest::Approx(0.5 * a.upper_log).epsilon(1e-12));
        CHECK(*b.lower_log == doctest::Approx(0.5 * *a.lower_log).epsilon(1e-12));
    }
}

TEST_CASE("full_holder_entropy composes the pieces") {
    const auto spec =
        SmoothnessClassSpec::make(ClassKind::HolderFull, 0, RadiusProfile::constant(1.0));
    const auto rep = entropy::full_holder_entropy(spec, 0.01);
    CHECK(rep.upper_log == doctest::Approx(std::log(400.0) + 100.0).epsilon(1e-12));

    // lower is a max over the available components
    const auto b1 = entropy::poly_pack_lower_B1(spec, 0.01);
    const auto f = entropy::poly_pack_B2_feasible(spec, 0.01);
    const auto sub = entropy::holder_sub_entropy(
        SmoothnessClassSpec::make(ClassKind::HolderSub, 0, RadiusProfile::constant(1.0)), 0.01);
    CHECK(*rep.lower_log >= *b1);
    if (f.feasible) CHECK(*rep.lower_log >= f.log_lower);
    CHECK(*rep.lower_log >= *sub.lower_log);

    // upper >= lower across a delta sweep (fixed unit constants)
    for (int g = 0; g <= 4; ++g) {
        const auto s =
            SmoothnessClassSpec::make(ClassKind::HolderFull, g, RadiusProfile::constant(1.0));
        for (int i = 2; i <= 10; ++i) {
            const double delta = std::pow(2.0, -i);
            const auto r = entropy::full_holder_entropy(s, delta);
            CHECK(r.upper_log >= *r.lower_log);
        }
    }
}

TEST_CASE("bound evaluators are non-increasing in delta") {
    for (int g : {0, 2, 4, 6}) {
        const auto holder =
            SmoothnessClassSpec::make(ClassKind::HolderFull, g, RadiusProfile::constant(1.0));
        const auto ellips =
            SmoothnessClassSpec::make(ClassKind::Ellipsoid, g, RadiusProfile::constant(1.0));
        double prev_cover = std::numeric_limits<double>::infinity();
        double prev_full_up = std::numeric_limits<double>::infinity();
        double prev_full_lo = std::numeric_limits<double>::infinity();
        double prev_sub = std::numeric_limits<double>::infinity();
        double prev_ell = std::numeric_limits<double>::infinity();
        for (double delta = 1e-4; delta < 1.0; delta *= 1.7) {
            const double cover = entropy::poly_cover_upper(holder, delta).value;
            CHECK(cover <= prev_cover);
            prev_cover = cover;
            const auto full = entropy::full_holder_entropy(holder, delta);
            CHECK(full.upper_log <= prev_full_up);
            CHECK(*full.lower_log <= prev_full_lo);
            prev_full_up = full.upper_log;
            prev_full_lo = *full.lower_log;
            const auto sub = entropy::holder_sub_entropy(
                SmoothnessClassSpec::make(ClassKind::HolderSub, g, RadiusProfile::constant(1.0)),
                delta);
            CHECK(sub.upper_log <= prev_sub);
            prev_sub = sub.upper_log;
            const auto ell = entropy::ellipsoid_entropy(ellips, delta);
            CHECK(ell.upper_log <= prev_ell);
            prev_ell = ell.upper_log;
        }
    }
}

TEST_CASE("dstar combinatorics") {
    for (int k : {0, 1, 5, 12}) CHECK(entropy::dstar(1, k) == 1);
    CHECK(entropy::dstar(3, 2) == 6);  // C(4,2)
    CHECK(entropy::dstar(2, 8) == 9);
    // Pascal identity
    for (int d = 2; d <= 6; ++d)
        for (int k = 1; k <= 12; ++k)
            CHECK(entropy::dstar(d, k) == entropy::dstar(d - 1, k) + entropy::dstar(d, k - 1));
    // sum_k D*_k >= d^{d+1} once gamma >= 2 d^2
    for (int d : {2, 3}) {
        const int gamma = 2 * d * d;
        unsigned long long sum = 0;
        for (int k = 0; k <= gamma; ++k) sum += entropy::dstar(d, k);
        unsigned long long target = 1;
        for (int i = 0; i <= d; ++i) target *= static_cast<unsigned long long>(d);
        CHECK(sum >= target);
    }
    CHECK_THROWS_AS(entropy::dstar(40, 60), std::overflow_error);
}

TEST_CASE("multivariate entropy") {
    // d = 1 collapses to the univariate bounds (B1bar regime)
    const auto spec = poly_spec(2);
    const double delta = 0.01;
    const auto mono = entropy::poly_cover_upper(spec, delta);
    const auto multi =
        entropy::multivariate_entropy(spec, 1, delta, entropy::MultivariateSub::PolySubD);
    CHECK(multi.upper_log == doctest::Approx(mono.value).epsilon(1e-12));
    CHECK_FALSE(multi.lower_log.has_value());

    const auto hs = entropy::holder_sub_entropy(
        SmoothnessClassSpec::make(ClassKind::HolderSub, 2, RadiusProfile::constant(1.0)), delta);
    const auto hs_d = entropy::multivariate_entropy(
        SmoothnessClassSpec::make(ClassKind::HolderSub, 2, RadiusProfile::constant(1.0)), 1, delta,
        entropy::MultivariateSub::HolderSubD);
    CHECK(hs_d.upper_log == doctest::Approx(hs.upper_log).epsilon(1e-12));

    // d = 2, gamma = 0: d^d * delta^{-d/(gamma+1)} = 4e4
    const auto two = entropy::multivariate_entropy(
        SmoothnessClassSpec::make(ClassKind::HolderSub, 0, RadiusProfile::constant(1.0)), 2, 0.01,
        entropy::MultivariateSub::HolderSubD);
    CHECK(two.upper_log == doctest::Approx(4.0e4).epsilon(1e-12));

    // PolySubD upper non-increasing in delta
    double prev = std::numeric_limits<double>::infinity();
    for (double d2 = 1e-4; d2 < 1.0; d2 *= 2.0) {
        const auto r =
            entropy::multivariate_entropy(poly_spec(3), 2, d2, entropy::MultivariateSub::PolySubD);
        CHECK(r.upper_log <= prev);
        prev = r.upper_log;
    }
}

TEST_CASE("legendre coefficient map") {
    CHECK(entropy::legendre_coeffs({0.0, 1.0}) == std::vector<double>{0.0, 1.0});
    const auto sq = entropy::legendre_coeffs({0.0, 0.0, 2.0});
    CHECK(sq[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(sq[1] == doctest::Approx(0.0));
    CHECK(sq[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(entropy::legendre_coeffs({0.0, 0.0, 0.0}) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("legendre map matches the projection integral and reconstructs") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int gamma = 0; gamma <= 8; ++gamma) {
        std::vector<double> taylor(static_cast<size_t>(gamma) + 1);
        for (auto& t : taylor) t = u(eng);
        const auto theta = entropy::legendre_coeffs(taylor);
        const auto coeffs = poly::from_taylor(taylor);
        // projection oracle: theta_k = (2k+1)/2 int f phi_k
        for (int k = 0; k <= gamma; ++k) {
            const double proj =
                (2.0 * k + 1.0) / 2.0 *
                quad::integrate(
                    [&](double x) { return poly::eval(coeffs, x) * quad::legendre_p(k, x); }, -1.0,
                    1.0, gamma + 2);
            CHECK(theta[static_cast<size_t>(k)] == doctest::Approx(proj).epsilon(1e-8));
        }
        // reconstruction on a grid
        for (int i = 0; i <= 100; ++i) {
            const double x = -1.0 + 2.0 * i / 100.0;
            CHECK(poly::eval_legendre_series(theta, x) ==
                  doctest::Approx(poly::eval(coeffs, x)).epsilon(1e-10));
        }
    }
}

TEST_CASE("legendre_l2_distance") {
    CHECK(entropy::legendre_l2_distance({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(entropy::legendre_l2_distance({1.0}, {0.0}) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(entropy::legendre_l2_distance({1.0}, {1.0, 2.0}), std::invalid_argument);

    std::mt19937_64 eng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(6), b(6);
        for (auto& v : a) v = u(eng);
        for (auto& v : b) v = u(eng);
        const double dist = entropy::legendre_l2_distance(a, b);
        const double quadrature = std::sqrt(quad::integrate(
            [&](double x) {
                const double d = poly::eval_legendre_series(a, x) - poly::eval_legendre_series(b, x);
                return d * d;
            },
            -1.0, 1.0, 8));
        CHECK(dist == doctest::Approx(quadrature).epsilon(1e-10));
    }
}

TEST_CASE("build_packing_set basics") {
    const auto spec = poly_spec(0);
    const auto pack = entropy::build_packing_set(spec, 0.01, 1.0);
    CHECK(pack.members.size() == 68);
    CHECK(pack.m0 == entropy::poly_pack_B2_feasible(spec, 0.01).m0);
    // constants on a grid spanning [-1,1]; adjacent distance = spacing * sqrt(2)
    const double spacing = 2.0 / 67.0;
    const double dist = poly::l2_distance(pack.members[0], pack.members[1], -1.0, 1.0);
    CHECK(dist == doctest::Approx(spacing * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(dist > 0.01);
    CHECK(pack.min_pair_distance > pack.delta);

    CHECK_THROWS_AS(entropy::build_packing_set(spec, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(entropy::build_packing_set(spec, 0.01, 0.5), std::invalid_argument);
}

TEST_CASE("packing members stay in the polyhedron across profiles") {
    for (int gamma : {1, 2, 4}) {
        for (auto profile : {RadiusProfile::constant(1.0), RadiusProfile::factorial(1.0)}) {
            const auto spec = poly_spec(gamma, profile);
            // choose a delta that is feasible but keeps the set small
            double delta = 0.25;
            while (!entropy::poly_pack_B2_feasible(spec, delta).feasible) delta *= 0.5;
            const auto pack = entropy::build_packing_set(spec, delta, 1.0);
            CHECK(pack.members.size() >= (1ULL << (gamma + 1)));
            double fact = 1.0;
            for (int k = 0; k <= gamma; ++k) {
                if (k >= 1) fact *= k;
                for (const auto& m : pack.members)
                    CHECK(std::abs(m[static_cast<size_t>(k)]) <=
                          spec.radii[static_cast<size_t>(k)] / fact * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("build_product_cover covers and counts") {
    const auto spec = poly_spec(0);
    const auto cover = entropy::build_product_cover(spec, 0.5);
    CHECK(cover.axes.size() == 1);
    CHECK(cover.axes[0].size() >= 3);

    std::mt19937_64 eng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::vector<double> theta{u(eng)};
        const auto nearest = cover.nearest(theta);
        CHECK(std::abs(theta[0] - nearest[0]) <= 0.5 + 1e-12);
    }

    // gamma = 1: size is the product of the axis counts
    const auto c2 = entropy::build_product_cover(poly_spec(1), 0.25);
    CHECK(c2.size() == c2.axes[0].size() * c2.axes[1].size());
    const auto first = c2.member(0);
    CHECK(first.size() == 2);

    // log-size against B1bar + (gamma+1) log 2
    for (int gamma = 0; gamma <= 3; ++gamma) {
        for (double delta : {0.5, 0.1}) {
            const auto s = poly_spec(gamma);
            const auto c = entropy::build_product_cover(s, delta);
            const double bound = entropy::poly_cover_upper(s, delta).value +
                                 (gamma + 1) * std::log(2.0);
            CHECK(c.log_size() <= bound);
        }
    }

    CHECK_THROWS_AS(entropy::build_product_cover(poly_spec(3), 1e-5), std::length_error);
}

TEST_CASE("randomized cover check in the l1 coefficient metric") {
    std::mt19937_64 eng(41);
    for (int gamma = 0; gamma <= 3; ++gamma) {
        const auto spec = poly_spec(gamma);
        const auto cover = entropy::build_product_cover(spec, 0.25);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> theta(static_cast<size_t>(gamma) + 1);
            double fact = 1.0;
            for (int k = 0; k <= gamma; ++k) {
                if (k >= 1) fact *= k;
                theta[static_cast<size_t>(k)] = u(eng) / fact;
            }
            const auto nearest = cover.nearest(theta);
            double l1 = 0.0;
            for (size_t i = 0; i < theta.size(); ++i) l1 += std::abs(theta[i] - nearest[i]);
            CHECK(l1 <= 0.25 + 1e-12);
        }
    }
}
