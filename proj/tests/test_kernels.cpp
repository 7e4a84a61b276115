#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "phasefit/kernels.hpp"

using namespace phasefit;
using kernels::SobolevKernel;

namespace {

// closed forms for k = 1, 2 obtained by expanding the spline integral
double k2_closed(double x, double y) {
    const double m = std::min(x, y);
    return 1.0 + x * y + m * x * y - m * m * (x + y) / 2.0 + m * m * m / 3.0;
}

double k3_closed(double x, double y) {
    const double m = std::min(x, y);
    const double s = x + y, p = x * y;
    const double integral = p * p * m - p * s * m * m + (s * s + 2.0 * p) * m * m * m / 3.0 -
                            s * m * m * m * m / 2.0 + m * m * m * m * m / 5.0;
    return 1.0 + p + p * p / 4.0 + integral / 4.0;
}

}  // namespace

TEST_CASE("pointwise kernel values") {
    CHECK(SobolevKernel(0)(0.5, 0.25) == doctest::Approx(1.25));
    for (int k : {1, 2, 5})
        CHECK(SobolevKernel(k)(0.37, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(SobolevKernel(1)(1.0, 1.0) == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(SobolevKernel(0)(-0.1, 0.5), std::domain_error);
    CHECK_THROWS_AS(SobolevKernel(0)(0.1, 1.5), std::domain_error);
    CHECK_THROWS_AS(SobolevKernel(-1), std::invalid_argument);
}

TEST_CASE("closed forms at k = 1, 2") {
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = u(eng), y = u(eng);
        CHECK(SobolevKernel(1)(x, y) == doctest::Approx(k2_closed(x, y)).epsilon(1e-12));
        CHECK(SobolevKernel(2)(x, y) == doctest::Approx(k3_closed(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("symmetry and diagonal lower bound") {
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k <= 6; ++k) {
        const SobolevKernel kernel(k);
        for (int trial = 0; trial < 50; ++trial) {
            const double x = u(eng), y = u(eng);
            CHECK(kernel(x, y) == doctest::Approx(kernel(y, x)).epsilon(1e-14));
        }
        for (double x : {0.0, 0.3, 0.99, 1.0}) CHECK(kernel(x, x) >= 1.0);
    }
}

TEST_CASE("k=0 sections look like the reproducing kernel") {
    // g(.) = K_1(., z): g(0) = 1, slope 1 left of z, slope 0 right of z
    const SobolevKernel k0(0);
    const double z = 0.6, h = 1e-6;
    CHECK(k0(0.0, z) == doctest::Approx(1.0));
    const double left_slope = (k0(0.3 + h, z) - k0(0.3 - h, z)) / (2 * h);
    const double right_slope = (k0(0.8 + h, z) - k0(0.8 - h, z)) / (2 * h);
    CHECK(left_slope == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(right_slope == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("kernel matrix assembly") {
    const auto one = kernels::kernel_matrix(SobolevKernel(0), {0.0});
    CHECK(one.size() == 1);
    CHECK(one.entries()(0, 0) == doctest::Approx(1.0));

    const auto two = kernels::kernel_matrix(SobolevKernel(0), {0.0, 1.0});
    CHECK(two.entries()(0, 0) == doctest::Approx(0.5));
    CHECK(two.entries()(0, 1) == doctest::Approx(0.5));
    CHECK(two.entries()(1, 0) == doctest::Approx(0.5));
    CHECK(two.entries()(1, 1) == doctest::Approx(1.0));

    CHECK_THROWS_AS(kernels::kernel_matrix(SobolevKernel(0), {}), std::invalid_argument);
    CHECK_THROWS_AS(kernels::kernel_matrix(SobolevKernel(0), {1.2}), std::domain_error);
}

TEST_CASE("kernel matrices are PSD and traces match") {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k <= 5; ++k) {
        const size_t n = 20 + static_cast<size_t>(eng() % 40);
        std::vector<double> xs(n);
        for (auto& x : xs) x = u(eng);
        const auto km = kernels::kernel_matrix(SobolevKernel(k), xs);
        const auto& eigs = km.eigenvalues();
        CHECK(eigs.size() == n);
        CHECK(std::is_sorted(eigs.rbegin(), eigs.rend()));
        CHECK(eigs.back() >= -1e-9);
        double esum = 0.0;
        for (double v : eigs) esum += v;
        CHECK(esum == doctest::Approx(km.entries().trace()).epsilon(1e-10));
    }
}

TEST_CASE("analytic spectra of tiny kernel matrices") {
    // n=2, k=0, xs = {0, 1}: (1/2)[[1,1],[1,2]] has eigenvalues (3 +- sqrt(5))/4
    const auto km = kernels::kernel_matrix(SobolevKernel(0), {0.0, 1.0});
    const auto& e = km.eigenvalues();
    CHECK(e[0] == doctest::Approx((3.0 + std::sqrt(5.0)) / 4.0).epsilon(1e-12));
    CHECK(e[1] == doctest::Approx((3.0 - std::sqrt(5.0)) / 4.0).epsilon(1e-12));
}

TEST_CASE("rkhs_norm_sq") {
    const auto km = kernels::kernel_matrix(SobolevKernel(0), {0.0});
    CHECK(kernels::rkhs_norm_sq({0.0}, km) == 0.0);
    CHECK(kernels::rkhs_norm_sq({2.0}, km) == doctest::Approx(4.0));
    CHECK_THROWS_AS(kernels::rkhs_norm_sq({1.0, 2.0}, km), std::invalid_argument);

    std::mt19937_64 eng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> xs{0.1, 0.4, 0.55, 0.9};
    const auto km4 = kernels::kernel_matrix(SobolevKernel(2), xs);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> pi(4);
        for (auto& p : pi) p = u(eng);
        double naive = 0.0;
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 4; ++j) naive += pi[i] * pi[j] * km4.entries()(i, j);
        CHECK(kernels::rkhs_norm_sq(pi, km4) ==
              doctest::Approx(std::max(0.0, naive)).epsilon(1e-10));
    }
}
