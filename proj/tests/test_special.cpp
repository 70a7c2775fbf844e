#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nevlab/quadrature.hpp"
#include "nevlab/special.hpp"

#include <cmath>
#include <vector>

using namespace nevlab;

namespace {
constexpr double kEulerGamma = 0.5772156649015329;
}

TEST_CASE("expint_e1 matches tabulated and quadrature values") {
    CHECK(expint_e1(1.0) == doctest::Approx(0.21938393439552027).epsilon(1e-13));
    // Small-x series: E1(x) = -gamma - log x + x - x^2/4 + ...
    double x = 1e-3;
    double series = -kEulerGamma - std::log(x) + x - x * x / 4.0;
    CHECK(expint_e1(x) == doctest::Approx(series).epsilon(1e-10));
    // Direct quadrature of the defining integral.
    for (double a : {0.5, 2.0, 10.0}) {
        auto tail = adapt_semi_inf([](double s) { return std::exp(-s) / s; }, a, 1e-12);
        CHECK(tail.converged);
        CHECK(expint_e1(a) == doctest::Approx(tail.value).epsilon(1e-10));
    }
}

TEST_CASE("upper incomplete gamma at integer order") {
    CHECK(upper_gamma_int(1, 0.7) == doctest::Approx(std::exp(-0.7)).epsilon(1e-14));
    CHECK(upper_gamma_int(2, 1.3) == doctest::Approx((1.0 + 1.3) * std::exp(-1.3)).epsilon(1e-14));
    CHECK(upper_gamma_int(4, 2.0) == doctest::Approx(38.0 * std::exp(-2.0)).epsilon(1e-14));
    CHECK(upper_gamma_int(3, 0.0) == doctest::Approx(2.0).epsilon(1e-14)); // Gamma(3)
}

TEST_CASE("sphere areas and ball volumes") {
    CHECK(unit_sphere_area(2) == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
    CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * M_PI).epsilon(1e-14));
    CHECK(unit_sphere_area(4) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-14));
    CHECK(unit_ball_volume(2) == doctest::Approx(M_PI).epsilon(1e-14));
    CHECK(unit_ball_volume(4) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-14));
    // d/ds volume = area: S^{n-1} area = n * ball volume.
    for (int n = 2; n <= 7; ++n)
        CHECK(unit_sphere_area(n) == doctest::Approx(n * unit_ball_volume(n)).epsilon(1e-13));
}

TEST_CASE("circle heat kernel: mass, symmetry, regimes") {
    double L = 2.0 * M_PI;
    for (double t : {1e-3, 0.5, 3.0, 50.0}) {
        auto mass = trapezoid_periodic(
            [&](double th) {
                double d = std::min(th, L - th);
                return circle_heat_kernel(t, d, L);
            },
            L, 1e-12);
        CHECK(mass.converged);
        CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-10));
    }
    // Short time: indistinguishable from the line kernel.
    double t = 1e-3, d = 1.0;
    double line = std::exp(-d * d / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
    CHECK(circle_heat_kernel(t, d, L) == doctest::Approx(line).epsilon(1e-12));
    // Long time: equilibrium 1/L.
    CHECK(circle_heat_kernel(1e4, 1.0, L) == doctest::Approx(1.0 / L).epsilon(1e-12));
    // Continuity across the image-sum / Fourier switch at t = L^2/(4 pi).
    double ts = L * L / (4.0 * M_PI);
    double below = circle_heat_kernel(ts * (1.0 - 1e-9), 0.8, L);
    double above = circle_heat_kernel(ts * (1.0 + 1e-9), 0.8, L);
    CHECK(below == doctest::Approx(above).epsilon(1e-9));
}

TEST_CASE("projective line heat kernel: mass, equilibrium, flat limit") {
    // Volume element in distance coordinates: A(delta) = pi sin(2 delta).
    for (double t : {5e-3, 0.1, 1.0}) {
        auto mass = adapt_1d(
            [&](double del) {
                return fs_line_heat_kernel(t, del) * M_PI * std::sin(2.0 * del);
            },
            0.0, M_PI / 2.0, 1e-11);
        CHECK(mass.converged);
        CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(fs_line_heat_kernel(50.0, 0.3) == doctest::Approx(1.0 / M_PI).epsilon(1e-12));
    // Short time, small distance: flat 2d Gaussian up to curvature corrections.
    double t = 1e-3, del = 0.05;
    double flat = std::exp(-del * del / (4.0 * t)) / (4.0 * M_PI * t);
    CHECK(fs_line_heat_kernel(t, del) == doctest::Approx(flat).epsilon(5e-3));
    CHECK(fs_line_heat_kernel(0.2, 0.1) > 0.0);
}

TEST_CASE("pairwise_sum is exact on integers and stable on long vectors") {
    std::vector<double> v;
    for (int i = 1; i <= 1000; ++i) v.push_back(i);
    CHECK(pairwise_sum(v) == 500500.0);
    std::vector<double> w(1 << 20, 0.1);
    long double ref = 0.0L;
    for (double x : w) ref += (long double)x;
    CHECK(pairwise_sum(w) == doctest::Approx((double)ref).epsilon(1e-12));
    CHECK(pairwise_sum({}) == 0.0);
}
