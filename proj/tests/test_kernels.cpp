#include <doctest.h>

#include <cmath>

#include "vortexlab/kernels.hpp"
#include "vortexlab/numerics.hpp"

using namespace vortexlab;
using namespace vortexlab::kernels;

TEST_CASE("gauss profile values and unit mass") {
    CHECK(gauss_profile(0.0) == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-15));
    CHECK(gauss_profile(2.0) ==
          doctest::Approx(std::exp(-1.0) / (4.0 * M_PI)).epsilon(1e-15));
    const double mass =
        2.0 * M_PI *
        adaptive_simpson([](double s) { return s * gauss_profile(s); }, 0.0, 40.0, 1e-15);
    CHECK(std::abs(mass - 1.0) < 1e-12);
}

TEST_CASE("oseen velocity: removable singularity, far field, direct value") {
    const Vec2 zero = oseen_velocity({0.0, 0.0});
    CHECK(zero.x1 == 0.0);
    CHECK(zero.x2 == 0.0);

    // far field ~ 1/(2 pi r)
    for (double r : {50.0, 100.0, 400.0}) {
        const Vec2 v = oseen_velocity({r, 0.0});
        CHECK(v.norm() * 2.0 * M_PI * r == doctest::Approx(1.0).epsilon(1e-12));
    }

    const Vec2 v2 = oseen_velocity({2.0, 0.0});
    CHECK(v2.x1 == doctest::Approx(0.0));
    CHECK(v2.x2 ==
          doctest::Approx((1.0 - std::exp(-1.0)) / (4.0 * M_PI)).epsilon(1e-14));
}

TEST_CASE("oseen velocity is azimuthal and continuous across the series switch") {
    // v . xi = 0
    for (double a : {0.3, 1.7, 2.9}) {
        const Vec2 xi{std::cos(a) * (0.5 + a), std::sin(a) * (0.5 + a)};
        CHECK(std::abs(oseen_velocity(xi).dot(xi)) < 1e-16);
    }
    // both branches agree at the threshold r^2 = 1e-2
    const double r_thresh = 0.1;
    auto closed = [](double r) {
        return (1.0 - std::exp(-r * r / 4.0)) / (2.0 * M_PI * r * r);
    };
    for (double r : {r_thresh * (1.0 - 1e-9), r_thresh * (1.0 + 1e-9)}) {
        const Vec2 v = oseen_velocity({r, 0.0});
        CHECK(v.x2 == doctest::Approx(r * closed(r)).epsilon(1e-12));
    }
}

TEST_CASE("phi and h profiles") {
    const auto at0 = phi_h_profiles(0.0);
    CHECK(at0.phi == doctest::Approx(1.0 / (8.0 * M_PI)).epsilon(1e-15));
    CHECK(at0.h == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(phi_h_profiles(1e-4).h == doctest::Approx(1.0).epsilon(1e-8));

    const auto at2 = phi_h_profiles(2.0);
    CHECK(at2.h == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-14));

    // g = 2 phi h as an algebraic identity of the implemented evaluations
    for (double r = 0.0; r <= 40.0; r += 0.37) {
        const auto ph = phi_h_profiles(r);
        CHECK(gauss_profile(r) ==
              doctest::Approx(2.0 * ph.phi * ph.h).epsilon(1e-13));
    }
}

TEST_CASE("peak of r^2 h(r) sits at 2.59") {
    auto neg = [](double r) {
        return -r * r * phi_h_profiles(r).h;
    };
    const double rstar = golden_section_min(neg, 0.5, 10.0, 1e-12);
    const double peak = -neg(rstar);
    CHECK(std::abs(peak - 2.59) < 0.01);
    CHECK(peak < 4.0); // below n^2 for every mode n >= 2
}

TEST_CASE("radial Biot-Savart reproduces the closed-form azimuthal speed") {
    auto grid = RadialGrid::default_grid();
    const RadialProfile g = RadialProfile::sample(grid, gauss_profile);
    const RadialProfile v = biot_savart_radial(g);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid->size(); ++k)
        worst = std::max(worst,
                         std::abs(v.values()[k] - oseen_speed(grid->nodes()[k])));
    CHECK(worst < 1e-8);
}

TEST_CASE("radial Biot-Savart edge cases") {
    auto grid = RadialGrid::default_grid();
    const RadialProfile zero =
        RadialProfile(grid, std::vector<double>(grid->size(), 0.0));
    const RadialProfile v0 = biot_savart_radial(zero);
    for (double x : v0.values()) CHECK(x == 0.0);

    // zero-mean vorticity: circulation vanishes in the far field and the
    // outer form agrees with the inner one
    const RadialProfile wz = RadialProfile::sample(grid, [](double r) {
        return (2.0 - r * r / 2.0) * std::exp(-r * r / 4.0); // d/dr-type, zero mean
    });
    const double total = 2.0 * M_PI *
        adaptive_simpson([&](double s) { return s * wz(s); }, 0.0, 20.0, 1e-13);
    REQUIRE(std::abs(total) < 1e-10);
    const RadialProfile vi = biot_savart_radial(wz);
    const RadialProfile vo = biot_savart_radial_outer(wz);
    CHECK(std::abs(vi.values().back() * grid->r_max()) < 1e-10);
    double gap = 0.0;
    for (std::size_t k = 0; k < grid->size(); ++k)
        gap = std::max(gap, std::abs(vi.values()[k] - vo.values()[k]));
    CHECK(gap < 1e-8);

    // coarse grid triggers the quadrature self-estimate
    auto coarse = std::make_shared<RadialGrid>(std::vector<double>{
        0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0});
    const RadialProfile gc = RadialProfile::sample(coarse, gauss_profile);
    CHECK_THROWS_AS(biot_savart_radial(gc), Error);
}

TEST_CASE("point vortex velocity") {
    // single vortex: tangential speed alpha/(2 pi) on the unit circle
    for (double a : {0.0, 1.1, 4.4}) {
        const Vec2 x{std::cos(a), std::sin(a)};
        const Vec2 u = point_vortex_velocity(x, {{0.0, 0.0}}, {1.0});
        CHECK(u.norm() == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-14));
        CHECK(std::abs(u.dot(x)) < 1e-16);
    }
    // equal pair: midpoint velocity cancels
    const Vec2 mid = point_vortex_velocity({0.0, 0.0}, {{1.0, 0.0}, {-1.0, 0.0}},
                                           {0.7, 0.7});
    CHECK(mid.norm() < 1e-16);
    // alpha = 2 pi at the origin evaluated at (3, 0)
    const Vec2 u3 = point_vortex_velocity({3.0, 0.0}, {{0.0, 0.0}}, {2.0 * M_PI});
    CHECK(u3.x1 == doctest::Approx(0.0));
    CHECK(u3.x2 == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(point_vortex_velocity({1.0, 0.0}, {{1.0, 0.0}}, {1.0}), Error);
}

TEST_CASE("perp map involution and orthogonality") {
    const Vec2 v{0.3, -1.7};
    const Vec2 pp = v.perp().perp();
    CHECK(pp.x1 == doctest::Approx(-v.x1));
    CHECK(pp.x2 == doctest::Approx(-v.x2));
    CHECK(v.perp().dot(v) == 0.0);
}
