#include <doctest.h>

#include <cmath>

#include "vortexlab/analysis.hpp"
#include "vortexlab/kernels.hpp"
#include "vortexlab/profile_solver.hpp"

using namespace vortexlab;
using namespace vortexlab::analysis;

namespace {

point_vortex::Trajectory frozen(const std::vector<Vec2>& z,
                                const std::vector<double>& alpha) {
    point_vortex::Trajectory traj;
    traj.circulations = alpha;
    traj.times = {0.0, 10.0};
    traj.positions = {z, z};
    traj.velocities = {std::vector<Vec2>(z.size()), std::vector<Vec2>(z.size())};
    double d = 1e300;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j)
            d = std::min(d, (z[i] - z[j]).norm());
    traj.min_separation = z.size() > 1 ? d : 0.0;
    return traj;
}

// Rasterize a self-similar profile w(xi) onto the simulation grid.
template <class F>
ns_sim::VorticityField plant(F&& w, Vec2 center, double alpha, double nu, double t,
                             std::size_t n, double box) {
    ns_sim::VorticityField f;
    f.n = n;
    f.box = box;
    f.nu = nu;
    f.time = t;
    f.circulations = {alpha};
    const double core = std::sqrt(nu * t);
    f.parts.assign(1, std::vector<double>(n * n, 0.0));
    const double dx = box / double(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double ax = double(i) * dx - center.x1;
            double ay = double(j) * dx - center.x2;
            ax -= box * std::round(ax / box);
            ay -= box * std::round(ay / box);
            f.parts[0][i * n + j] =
                alpha / (nu * t) * w(Vec2{ax / core, ay / core});
        }
    f.total = f.parts[0];
    return f;
}

} // namespace

TEST_CASE("extraction reproduces an exact self-similar field") {
    const std::size_t n = 256;
    const double box = 1.0, nu = 1e-3;
    const double t = std::pow(12.0 / double(n), 2) / nu; // core = 12 dx
    const Vec2 center{0.5, 0.5};
    auto field = plant([](Vec2 xi) { return kernels::gauss_profile(xi.norm()); },
                       center, 1.0, nu, t, n, box);
    auto traj = frozen({center}, {1.0});

    RescaledProfile prof = extract_rescaled_profile(field, traj, 0, t);
    double worst = 0.0;
    const PolarGrid& grid = prof.samples.grid();
    for (std::size_t ir = 0; ir < grid.radii.size(); ++ir)
        for (std::size_t m = 0; m < grid.n_angles; ++m)
            worst = std::max(worst, std::abs(prof.samples.at(ir, m) -
                                             kernels::gauss_profile(grid.radii[ir])));
    CHECK(worst < 1e-6);

    // unit mass within the extraction disc
    CHECK(prof.samples.integral() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("component extracted about the wrong center carries no mass") {
    const std::size_t n = 256;
    const double box = 1.0, nu = 1e-3;
    const double t = std::pow(6.0 / double(n), 2) / nu; // compact core = 6 dx
    const Vec2 c1{0.3, 0.5}, c2{0.7, 0.5};
    auto field = plant([](Vec2 xi) { return kernels::gauss_profile(xi.norm()); },
                       c1, 1.0, nu, t, n, box);
    auto traj = frozen({c1, c2}, {1.0, 1.0});

    RescaledProfile right = extract_rescaled_profile(field, traj, 0, t);
    CHECK(right.samples.integral() == doctest::Approx(1.0).epsilon(1e-3));

    // the same component resampled about the second vortex
    ns_sim::VorticityField two = field;
    two.parts.push_back(field.parts[0]);
    two.circulations = {1.0, 1.0};
    RescaledProfile wrong = extract_rescaled_profile(two, traj, 1, t);
    CHECK(std::abs(wrong.samples.integral()) < 1e-4);
}

TEST_CASE("extraction rejects a frame larger than the box") {
    const std::size_t n = 128;
    const double box = 1.0, nu = 1e-2;
    const double t = 0.5; // sqrt(nu t) = 0.07, frame radius 0.7 > box/2
    auto field = plant([](Vec2 xi) { return kernels::gauss_profile(xi.norm()); },
                       {0.5, 0.5}, 1.0, nu, t, n, box);
    auto traj = frozen({{0.5, 0.5}}, {1.0});
    CHECK_THROWS_AS(extract_rescaled_profile(field, traj, 0, t), Error);
}

TEST_CASE("weighted norm against an independent quadrature oracle") {
    PolarGrid grid = default_extraction_grid();
    ScalarPolarField zero(grid);
    CHECK(x_norm(zero, 0.5) == 0.0);

    ScalarPolarField gauss(grid);
    gauss.fill([](double r, double) { return kernels::gauss_profile(r); });
    const double beta = 0.5;
    const double oracle_sq =
        2.0 * M_PI *
        adaptive_simpson(
            [beta](double r) {
                const double g = kernels::gauss_profile(r);
                return g * g * std::exp(beta * r / 4.0) * r;
            },
            0.0, grid.radii.back(), 1e-14);
    CHECK(x_norm(gauss, beta) == doctest::Approx(std::sqrt(oracle_sq)).epsilon(1e-8));

    // monotone in beta
    CHECK(x_norm(gauss, 0.2) <= x_norm(gauss, 0.5));
    CHECK(x_norm(gauss, 0.5) <= x_norm(gauss, 0.9));
    CHECK_THROWS_AS(x_norm(gauss, 1.5), Error);
}

TEST_CASE("angular projections") {
    PolarGrid grid = default_extraction_grid();
    ScalarPolarField gauss(grid);
    gauss.fill([](double r, double) { return kernels::gauss_profile(r); });
    CHECK(gauss.project(0).y_norm() > 0.0);
    CHECK(gauss.project(2).y_norm() < 1e-12);

    // synthetic single-mode input is recovered exactly
    ScalarPolarField synth(grid);
    synth.fill([](double r, double th) {
        return r * std::exp(-r * r / 4.0) * std::cos(2.0 * th);
    });
    const AzimuthalMode p2 = synth.project(2);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.radii.size(); ++k) {
        const double r = grid.radii[k];
        worst = std::max(worst,
                         std::abs(p2.cos_coeff.values()[k] - r * std::exp(-r * r / 4)));
        worst = std::max(worst, std::abs(p2.sin_coeff.values()[k]));
    }
    CHECK(worst < 1e-13);

    // Parseval for a band-limited synthetic field
    ScalarPolarField band(grid);
    band.fill([](double r, double th) {
        const double e = std::exp(-r * r / 4.0);
        return e * (0.7 + r * std::cos(th) - 0.4 * r * r * std::sin(3 * th) +
                    0.2 * r * std::cos(5 * th));
    });
    const double total = band.weighted_l2_sq(0.5);
    double sum = 0.0;
    for (int m = 0; m <= 8; ++m) {
        const AzimuthalMode pm = band.project(m);
        ScalarPolarField rec(grid);
        rec.fill([&](double r, double th) { return pm.eval(r, th); });
        sum += rec.weighted_l2_sq(0.5);
    }
    CHECK(sum == doctest::Approx(total).epsilon(1e-10));
}

TEST_CASE("planted deformation is recovered by extraction and the weighted norm") {
    const std::size_t n = 256;
    const double box = 1.0, nu = 1e-3;
    const double t = std::pow(12.0 / double(n), 2) / nu;
    const Vec2 center{0.5, 0.5};
    const double amp = 0.02, theta0 = 0.6;

    auto op_grid = profile_solver::operator_grid();
    const RadialProfile r2g = RadialProfile::sample(
        op_grid, [](double r) { return r * r * kernels::gauss_profile(r); });
    const RadialProfile omega2 = profile_solver::solve_omega_bvp(2, r2g).vorticity;

    auto field = plant(
        [&](Vec2 xi) {
            const double r = xi.norm();
            return kernels::gauss_profile(r) +
                   amp * omega2(r) * std::cos(2.0 * (xi.arg() - theta0));
        },
        center, 1.0, nu, t, n, box);
    auto traj = frozen({center}, {1.0});
    RescaledProfile prof = extract_rescaled_profile(field, traj, 0, t);

    const double beta = 0.5;
    const double measured = x_norm(subtract_gaussian(prof), beta);
    const double planted = amp * std::sqrt(M_PI * adaptive_simpson(
        [&](double r) {
            return omega2(r) * omega2(r) * std::exp(beta * r / 4.0) * r;
        },
        0.0, 10.0, 1e-14));
    CHECK(std::abs(measured - planted) < 1e-4);

    // the quadrupole fit sees the planted amplitude and phase
    auto pair_traj = frozen({center, {0.8, 0.5}}, {1.0, 1.0});
    QuadrupoleFit fit = quadrupole_fit(prof, pair_traj, 0, t, nu);
    CHECK(fit.amplitude_measured == doctest::Approx(amp).epsilon(1e-3));
    CHECK(std::abs(std::remainder(fit.phase_measured - theta0, M_PI)) < 1e-3);
}

TEST_CASE("quadrupole phase follows a global rotation") {
    const std::size_t n = 256;
    const double box = 1.0, nu = 1e-3;
    const double t = std::pow(12.0 / double(n), 2) / nu;
    const Vec2 center{0.5, 0.5};
    const double amp = 0.02, theta0 = 0.3, chi = 0.9;

    auto op_grid = profile_solver::operator_grid();
    const RadialProfile r2g = RadialProfile::sample(
        op_grid, [](double r) { return r * r * kernels::gauss_profile(r); });
    const RadialProfile omega2 = profile_solver::solve_omega_bvp(2, r2g).vorticity;

    auto make = [&](double phase, Vec2 companion) {
        auto field = plant(
            [&](Vec2 xi) {
                const double r = xi.norm();
                return kernels::gauss_profile(r) +
                       amp * omega2(r) * std::cos(2.0 * (xi.arg() - phase));
            },
            center, 1.0, nu, t, n, box);
        auto traj = frozen({center, companion}, {1.0, 1.0});
        RescaledProfile prof = extract_rescaled_profile(field, traj, 0, t);
        return quadrupole_fit(prof, traj, 0, t, nu);
    };

    const Vec2 comp{0.75, 0.5};
    const Vec2 comp_rot = center + rotate(comp - center, chi);
    QuadrupoleFit base = make(theta0, comp);
    QuadrupoleFit rot = make(theta0 + chi, comp_rot);
    CHECK(std::abs(std::remainder(rot.phase_measured - base.phase_measured - chi,
                                  M_PI)) < 1e-3);
    CHECK(std::abs(std::remainder(rot.phase_predicted - base.phase_predicted - chi,
                                  M_PI)) < 1e-12);
    CHECK(rot.amplitude_measured == doctest::Approx(base.amplitude_measured).epsilon(1e-6));
}

TEST_CASE("grid doubling sharpens the single-vortex profile by 4x or better") {
    const double box = 1.0, nu = 0.01;
    auto measure = [&](std::size_t n) {
        const double dx = box / double(n);
        const double t0 = 9.5 * dx * dx / nu;
        const double T = 2.0 * t0;
        point_vortex::VortexConfiguration cfg;
        cfg.positions = {{0.5, 0.5}};
        cfg.circulations = {1.0};
        cfg.nu = nu;
        cfg.horizon = T;
        ns_sim::VorticityField field = ns_sim::init_oseen_superposition(cfg, t0, n, box);
        ns_sim::Solver solver(n, box);
        solver.advance_to(field, T);
        auto traj = frozen({{0.5, 0.5}}, {1.0});
        RescaledProfile prof = extract_rescaled_profile(field, traj, 0, T);
        return x_norm(subtract_gaussian(prof), 0.5);
    };
    const double coarse = measure(128);
    const double fine = measure(256);
    CHECK(coarse >= 4.0 * fine);
}

TEST_CASE("convergence fit") {
    std::vector<double> nus = {8e-3, 4e-3, 2e-3, 1e-3};
    std::vector<double> metric;
    for (double nu : nus) metric.push_back(3.7 * nu);
    const LineFit fit = convergence_fit(nus, metric);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(convergence_fit({1e-2, 5e-3}, {1.0, 0.5}), Error);
    CHECK_THROWS_AS(convergence_fit({1e-2, 9e-3, 8e-3}, {1.0, 0.9, 0.8}), Error);
    CHECK_THROWS_AS(convergence_fit(nus, {1.0, 0.5, -0.2, 0.1}), Error);
}
