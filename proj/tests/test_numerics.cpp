#include <doctest.h>

#include <cmath>
#include <vector>

#include "vortexlab/numerics.hpp"
#include "vortexlab/radial_grid.hpp"

using namespace vortexlab;

TEST_CASE("tridiagonal solver") {
    // 4x4 system with known solution x = (1, 2, 3, 4)
    std::vector<double> lo = {0, 1, 1, 1};
    std::vector<double> di = {4, 4, 4, 4};
    std::vector<double> up = {1, 1, 1, 0};
    std::vector<double> x_ref = {1, 2, 3, 4};
    std::vector<double> rhs(4);
    rhs[0] = 4 * 1 + 2;
    rhs[1] = 1 + 4 * 2 + 3;
    rhs[2] = 2 + 4 * 3 + 4;
    rhs[3] = 3 + 4 * 4;
    auto x = solve_tridiagonal(lo, di, up, rhs);
    for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(x_ref[i]).epsilon(1e-14));
}

TEST_CASE("not-a-knot spline interpolates smooth functions to high accuracy") {
    std::vector<double> x, y;
    for (int k = 0; k <= 400; ++k) {
        const double t = 3.0 * k / 400.0;
        x.push_back(t + 0.2 * std::sin(t)); // nonuniform
        y.push_back(std::exp(-x.back() * x.back() / 4.0));
    }
    CubicSpline sp(x, y);
    double worst = 0.0;
    for (int k = 0; k < 399; ++k) {
        const double t = 0.5 * (x[k] + x[k + 1]);
        worst = std::max(worst, std::abs(sp(t) - std::exp(-t * t / 4.0)));
    }
    CHECK(worst < 2e-9);

    // exact integral of the Gaussian on [0, x_max] via erf
    const double exact =
        std::sqrt(M_PI) * std::erf(x.back() / 2.0); // int e^{-t^2/4} = sqrt(pi) erf(t/2)
    CHECK(sp.integral_to(x.back()) == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("adaptive simpson oracle") {
    CHECK(adaptive_simpson([](double t) { return t * t * t; }, 0, 1) ==
          doctest::Approx(0.25).epsilon(1e-13));
    const double gauss = adaptive_simpson(
        [](double t) { return std::exp(-t * t); }, 0, 10, 1e-14);
    CHECK(gauss == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-12));
}

TEST_CASE("golden section minimum") {
    const double xmin = golden_section_min(
        [](double t) { return (t - 1.3) * (t - 1.3) + 2.0; }, 0.0, 3.0, 1e-12);
    // function comparisons resolve a quadratic minimum to ~sqrt(machine eps)
    CHECK(std::abs(xmin - 1.3) < 1e-6);
}

TEST_CASE("line fits") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(2.5 * v - 0.7);
    auto fit = fit_line(x, y);
    CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-13));
    CHECK(fit.intercept == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-13));

    // scale invariance apart from the intercept
    std::vector<double> nu = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
    std::vector<double> metric;
    for (double v : nu) metric.push_back(3.0 * v);
    auto lf = fit_loglog(nu, metric);
    CHECK(lf.slope == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> scaled = metric;
    for (double& v : scaled) v *= 17.0;
    auto lf2 = fit_loglog(nu, scaled);
    CHECK(lf2.slope == doctest::Approx(lf.slope).epsilon(1e-12));
    CHECK_THROWS_AS(fit_loglog(nu, {1.0, -1.0, 1.0, 1.0}), Error);
}

TEST_CASE("graded radial grid validates cubic interpolation accuracy") {
    auto grid = RadialGrid::default_grid();
    CHECK(grid->size() == 2048);
    CHECK(grid->r_max() == doctest::Approx(20.0));
    CHECK(grid->nodes().front() == 0.0);
    // far too coarse a grid must fail the build-time check
    CHECK_THROWS_AS(RadialGrid::graded(16, 20.0), Error);
}
