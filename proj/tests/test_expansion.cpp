#include <doctest.h>

#include <cmath>
#include <random>

#include "vortexlab/expansion.hpp"
#include "vortexlab/kernels.hpp"
#include "vortexlab/numerics.hpp"

using namespace vortexlab;
using namespace vortexlab::expansion;

namespace {

// Static trajectory with frozen positions, enough for the algebraic fields.
point_vortex::Trajectory frozen(const std::vector<Vec2>& z,
                                const std::vector<double>& alpha) {
    point_vortex::Trajectory traj;
    traj.circulations = alpha;
    traj.times = {0.0, 1.0};
    traj.positions = {z, z};
    traj.velocities = {std::vector<Vec2>(z.size()), std::vector<Vec2>(z.size())};
    double d = 1e300;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j)
            d = std::min(d, (z[i] - z[j]).norm());
    traj.min_separation = z.size() > 1 ? d : 0.0;
    return traj;
}

} // namespace

TEST_CASE("multipole series basics") {
    CHECK(velocity_difference_series({0, 0}, {3, 0}, 8) == 0.0);
    // parallel vectors: every sine vanishes
    CHECK(std::abs(velocity_difference_series({0.5, 0.5}, {2, 2}, 11)) < 1e-15);
    CHECK_THROWS_AS(velocity_difference_series({3, 0}, {1, 0}, 4), Error);
}

TEST_CASE("series truncation error at ratio 0.1") {
    const Vec2 eta{ 2.3, -1.1 };
    const double reta = eta.norm();
    // |xi| = 0.1 |eta|, various angles; 6 terms reach order n = 7
    for (double a : {0.3, 1.2, 2.6, 4.0}) {
        const Vec2 xi = 0.1 * reta * Vec2{std::cos(a), std::sin(a)};
        const double partial = velocity_difference_series(xi, eta, 6);
        const double exact = xi_dot_v1_exact(xi, eta);
        CHECK(std::abs(partial - exact) <= 2.0 * std::pow(0.1, 8));
    }
}

TEST_CASE("geometric tail bound on the series truncation") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double reta = 1.0 + 4.0 * ud(rng);
        const double q = 0.5 * ud(rng);
        const double pe = 2 * M_PI * ud(rng), px = 2 * M_PI * ud(rng);
        const Vec2 eta = reta * Vec2{std::cos(pe), std::sin(pe)};
        const Vec2 xi = q * reta * Vec2{std::cos(px), std::sin(px)};
        for (int terms : {1, 3, 6}) {
            const int order = terms + 1;
            const double tail = std::pow(q, order + 1) / (1.0 - q);
            const double err = std::abs(velocity_difference_series(xi, eta, terms) -
                                        xi_dot_v1_exact(xi, eta));
            CHECK(err <= tail + 1e-15);
        }
    }
}

TEST_CASE("exact velocity-difference identity") {
    std::mt19937 rng(1234);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 200; ++trial) {
        const Vec2 xi{nd(rng), nd(rng)};
        const Vec2 eta{nd(rng) + 3.0, nd(rng)};
        if ((xi + eta).norm() < 1e-3 || eta.norm() < 1e-3) continue;
        const V1V2 split = v1_v2_split(xi, eta);
        const Vec2 lhs = 2.0 * M_PI *
                         (kernels::oseen_velocity(xi + eta) - kernels::oseen_velocity(eta));
        const Vec2 resid = lhs - split.v1 - split.v2;
        CHECK(resid.norm() < 1e-13);
    }

    const V1V2 at0 = v1_v2_split({0, 0}, {1.5, 0.5});
    CHECK(at0.v1.norm() == 0.0);
    CHECK(at0.v2.norm() == 0.0);

    // far-separated: the Gaussian part is exponentially negligible
    const V1V2 far = v1_v2_split({5.0, 0.0}, {0.0, 10.0});
    CHECK(far.v2.norm() < std::exp(-25.0 / 4.0));
}

TEST_CASE("strain counter-term field") {
    CHECK(w_field({0, 0}, {2, 1}).norm() == 0.0);

    // W differs from V1 by a term linear in xi:
    // W - V1 = -xi^perp/|eta|^2 + 2 (xi.eta) eta^perp / |eta|^4
    std::mt19937 rng(99);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 eta{nd(rng) + 4.0, nd(rng)};
        const Vec2 xi{0.5 * nd(rng), 0.5 * nd(rng)};
        const Vec2 lin = -1.0 * xi.perp() / eta.norm_sq() +
                         2.0 * xi.dot(eta) * eta.perp() / (eta.norm_sq() * eta.norm_sq());
        const Vec2 resid = w_field(xi, eta) - (v1_v2_split(xi, eta).v1 + lin);
        CHECK(resid.norm() < 1e-13);
    }

    // |W| <= c |xi|^2/|eta|^3 with c stable under doubling |eta|
    auto fit_c = [](double reta) {
        double c = 0.0;
        for (double a = 0.1; a < 2 * M_PI; a += 0.37)
            for (double rxi = 0.05 * reta; rxi <= 0.5 * reta; rxi += 0.1 * reta) {
                const Vec2 eta{reta, 0.0};
                const Vec2 xi = rxi * Vec2{std::cos(a), std::sin(a)};
                c = std::max(c, w_field(xi, eta).norm() * std::pow(reta, 3) /
                                    (rxi * rxi));
            }
        return c;
    };
    const double c1 = fit_c(8.0), c2 = fit_c(16.0), c3 = fit_c(32.0);
    CHECK(std::abs(c2 - c3) / c3 < 0.3);
    CHECK(c1 < 10.0 * c3);
}

TEST_CASE("residuum terms vanish for a single vortex") {
    auto traj = frozen({{0.0, 0.0}}, {1.0});
    auto terms = residuum_terms(traj, 0, 0.5);
    for (const auto& m : terms.a) CHECK(m.y_norm() == 0.0);
    for (const auto& m : terms.b) CHECK(m.y_norm() == 0.0);
    for (const auto& m : terms.c) CHECK(m.y_norm() == 0.0);
    CHECK(terms.eval_a({1.0, 0.4}) == 0.0);
}

TEST_CASE("trig-reduced modes match the closed vector forms") {
    auto traj = frozen({{0.0, 0.0}, {0.9, 0.7}, {-0.8, 0.4}}, {1.0, -0.7, 1.4});
    auto terms = residuum_terms(traj, 0, 0.5);
    // evaluate at stored nodes so only the trig reduction is under test,
    // not the radial interpolation between nodes
    const RadialGrid& rg = terms.a[0].cos_coeff.grid();
    std::vector<double> radii;
    for (std::size_t k = 40; k < rg.size() && rg[k] <= 8.0; k += 150)
        radii.push_back(rg[k]);
    for (double r : radii) {
        for (double th = 0.0; th < 2 * M_PI; th += 0.53) {
            const Vec2 xi{r * std::cos(th), r * std::sin(th)};
            double a_mode = 0, b_mode = 0, c_mode = 0;
            for (const auto& m : terms.a) a_mode += m.eval(r, th);
            for (const auto& m : terms.b) b_mode += m.eval(r, th);
            for (const auto& m : terms.c) c_mode += m.eval(r, th);
            CHECK(a_mode == doctest::Approx(terms.eval_a(xi)).epsilon(1e-10));
            CHECK(std::abs(b_mode - terms.eval_b(xi)) < 1e-13 + 1e-10 * std::abs(b_mode));
            CHECK(std::abs(c_mode - terms.eval_c(xi)) < 1e-13 + 1e-10 * std::abs(c_mode));
        }
    }
}

TEST_CASE("mode content of the residuum terms") {
    auto traj = frozen({{0.0, 0.0}, {1.1, 0.35}}, {1.0, 0.8});
    auto terms = residuum_terms(traj, 0, 0.5);

    PolarGrid pg = PolarGrid::uniform(96, 8.0, 64);
    ScalarPolarField fa(pg), fb(pg), fc(pg);
    fa.fill([&](double r, double th) {
        return terms.eval_a({r * std::cos(th), r * std::sin(th)});
    });
    fb.fill([&](double r, double th) {
        return terms.eval_b({r * std::cos(th), r * std::sin(th)});
    });
    fc.fill([&](double r, double th) {
        return terms.eval_c({r * std::cos(th), r * std::sin(th)});
    });

    const double sa = fa.project(2).y_norm();
    for (int n : {0, 1, 3, 4, 5})
        CHECK(fa.project(n).y_norm() < 1e-12 * std::max(sa, 1.0));

    const double sb = fb.project(3).y_norm();
    for (int n : {0, 1, 2, 4, 5})
        CHECK(fb.project(n).y_norm() < 1e-12 * std::max(sb, 1.0));
    CHECK(sb > 0.0);

    const double scn = fc.project(4).y_norm();
    for (int n : {0, 1, 2, 3, 5})
        CHECK(fc.project(n).y_norm() < 1e-12 * std::max(scn, 1.0));

    // the A field vanishes along the separation direction
    const Vec2 z01 = traj.separation(0, 1, 0.5);
    const Vec2 dir = z01 / z01.norm();
    CHECK(std::abs(terms.eval_a(2.0 * dir)) < 1e-15);

    // and its maximum sits on the 45-degree diagonals
    double best = 0.0, best_th = 0.0;
    const double th12 = z01.arg();
    for (double th = 0; th < 2 * M_PI; th += 1e-3) {
        const double v = std::abs(terms.eval_a({2.0 * std::cos(th), 2.0 * std::sin(th)}));
        if (v > best) { best = v; best_th = th; }
    }
    const double lobe = std::abs(std::sin(2.0 * (best_th - th12)));
    CHECK(lobe == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("residuum fields are rotation invariant") {
    const double chi = 0.77;
    std::vector<Vec2> z = {{0.0, 0.0}, {1.2, 0.1}, {-0.4, 0.9}};
    std::vector<Vec2> zr;
    for (const Vec2& v : z) zr.push_back(rotate(v, chi));
    auto t1 = residuum_terms(frozen(z, {1.0, 0.6, -0.9}), 0, 0.5);
    auto t2 = residuum_terms(frozen(zr, {1.0, 0.6, -0.9}), 0, 0.5);
    for (double r : {0.7, 2.1, 4.4}) {
        for (double th : {0.2, 1.9, 3.3}) {
            const Vec2 xi{r * std::cos(th), r * std::sin(th)};
            CHECK(t1.eval_a(xi) == doctest::Approx(t2.eval_a(rotate(xi, chi))).epsilon(1e-12));
            CHECK(t1.eval_b(xi) == doctest::Approx(t2.eval_b(rotate(xi, chi))).epsilon(1e-12));
            CHECK(t1.eval_c(xi) == doctest::Approx(t2.eval_c(rotate(xi, chi))).epsilon(1e-12));
        }
    }
}

TEST_CASE("exact naive residuum vanishes at the origin and for one vortex") {
    PolarGrid pg = PolarGrid::uniform(64, 10.0, 32);
    auto single = frozen({{0.2, 0.3}}, {1.0});
    auto f1 = naive_residuum_exact(single, 0, 0.5, 1e-3, pg);
    for (double v : f1.values()) CHECK(v == 0.0);

    auto pair = frozen({{-0.5, 0.0}, {0.5, 0.0}}, {1.0, 1.0});
    auto f2 = naive_residuum_exact(pair, 0, 0.5, 1e-3, pg);
    // the first radius of the polar grid is r = 0
    for (std::size_t m = 0; m < pg.n_angles; ++m) CHECK(f2.at(0, m) == 0.0);
}

TEST_CASE("weighted remainder scales like the 3/2 power") {
    auto traj = frozen({{-0.5, 0.0}, {0.5, 0.0}}, {1.0, 1.0});
    const double t = 0.25;
    PolarGrid pg = PolarGrid::uniform(128, 12.0, 128);
    std::vector<double> eps, sup;
    for (double nu : {6.4e-3, 3.2e-3, 1.6e-3, 8e-4}) {
        eps.push_back(nu * t / (traj.min_separation * traj.min_separation));
        sup.push_back(weighted_remainder_sup(traj, 0, t, nu, 0.9, pg));
    }
    auto fit = fit_loglog(eps, sup);
    CHECK(fit.slope == doctest::Approx(1.5).epsilon(0.07));
}

TEST_CASE("strain field properties") {
    auto single = frozen({{0.4, -0.2}}, {1.0});
    CHECK(strain_field(single, 0, 0.5)({1.0, 2.0}).norm() == 0.0);

    auto traj = frozen({{0.0, 0.0}, {1.0, 0.6}, {-0.7, 0.9}}, {1.0, 0.5, -1.2});
    auto d = strain_field(traj, 0, 0.5);

    // exact homogeneity
    const Vec2 xi{0.7, -1.1};
    CHECK((d(2.0 * xi) - 2.0 * d(xi)).norm() < 1e-15);

    // finite-difference divergence
    std::mt19937 rng(4);
    std::normal_distribution<double> nd;
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const Vec2 p{nd(rng), nd(rng)};
        const double div =
            (d({p.x1 + h, p.x2}).x1 - d({p.x1 - h, p.x2}).x1) / (2 * h) +
            (d({p.x1, p.x2 + h}).x2 - d({p.x1, p.x2 - h}).x2) / (2 * h);
        CHECK(std::abs(div) < 1e-8);
    }
}
