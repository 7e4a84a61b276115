#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "phasefit/complexity.hpp"
#include "phasefit/kernels.hpp"

using namespace phasefit;

TEST_CASE("kernel_complexity basics") {
    CHECK(complexity::kernel_complexity(1.0, {0.0, 0.0}) == 0.0);
    CHECK(complexity::kernel_complexity(2.0, {1.0}) == doctest::Approx(1.0));
    // saturation for large r
    const std::vector<double> mus{2.0, 0.5, 0.125};
    const double sat = std::sqrt((2.0 + 0.5 + 0.125) / 3.0);
    CHECK(complexity::kernel_complexity(100.0, mus) == doctest::Approx(sat).epsilon(1e-12));
    CHECK_THROWS_AS(complexity::kernel_complexity(0.0, mus), std::invalid_argument);
    CHECK_THROWS_AS(complexity::kernel_complexity(1.0, {}), std::invalid_argument);
}

TEST_CASE("closed-form critical radii") {
    CHECK(complexity::critical_radius({1.0}, 0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(complexity::critical_radius({1.0}, 2.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK_THROWS_AS(complexity::critical_radius({0.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("doubling c0 strictly decreases the radius") {
    const std::vector<double> mus{1.0, 0.25, 0.0625, 0.001};
    double prev = std::numeric_limits<double>::infinity();
    for (double c0 : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double r = complexity::critical_radius(mus, c0);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("sigma-scaled form") {
    CHECK(complexity::critical_radius_sigma({1.0}, 1.0, 1.0) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    const std::vector<double> mus{1.0, 0.2, 0.05};
    const double r1 = complexity::critical_radius_sigma(mus, 1.0, 1.0);
    const double r2 = complexity::critical_radius_sigma(mus, 2.0, 1.0);
    CHECK(r2 > r1);
}

TEST_CASE("properties on real kernel spectra") {
    std::mt19937_64 eng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k <= 3; ++k) {
        std::vector<double> xs(60);
        for (auto& x : xs) x = u(eng);
        const auto km = kernels::kernel_matrix(kernels::SobolevKernel(k), xs);
        const auto& mus = km.eigenvalues();

        // complexity(r)/r non-increasing, complexity non-decreasing,
        // complexity(2r) <= 2 complexity(r)
        double prev_ratio = std::numeric_limits<double>::infinity();
        double prev_val = 0.0;
        for (double r = 1e-6; r < 10.0; r *= 1.5) {
            const double c = complexity::kernel_complexity(r, mus);
            CHECK(c / r <= prev_ratio * (1.0 + 1e-12));
            CHECK(c >= prev_val * (1.0 - 1e-12));
            CHECK(complexity::kernel_complexity(2.0 * r, mus) <= 2.0 * c * (1.0 + 1e-12));
            prev_ratio = c / r;
            prev_val = c;
        }

        // the solver meets its residual contract on this spectrum
        const double rstar = complexity::critical_radius(mus, 0.7);
        const double resid =
            std::abs(complexity::kernel_complexity(rstar, mus) - 0.7 * rstar * rstar);
        CHECK(resid <= 1e-10 * (1.0 + 0.7 * rstar * rstar));
    }
}
