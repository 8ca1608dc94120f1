#include "vortexlab/kernels.hpp"

#include <cmath>

namespace vortexlab {
namespace kernels {

namespace {

constexpr double kSeriesThresholdSq = 1e-2; // switch at r^2 = 1e-2

// (1 - e^{-s/4}) / (2 pi s) as a function of s = r^2; series below the
// threshold where the subtraction cancels.
double phi_of_rsq(double s) {
    if (s < kSeriesThresholdSq) {
        const double x = s / 4.0;
        return (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0) / (8.0 * M_PI);
    }
    return (1.0 - std::exp(-s / 4.0)) / (2.0 * M_PI * s);
}

// x / (e^x - 1) with x = r^2/4.
double h_of_rsq(double s) {
    const double x = s / 4.0;
    if (s < kSeriesThresholdSq) {
        const double x2 = x * x;
        return 1.0 - x / 2.0 + x2 / 12.0 - x2 * x2 / 720.0;
    }
    return x / std::expm1(x);
}

} // namespace

double gauss_profile(double r) {
    return std::exp(-r * r / 4.0) / (4.0 * M_PI);
}

double oseen_speed(double r) {
    return r * phi_of_rsq(r * r);
}

Vec2 oseen_velocity(Vec2 xi) {
    return xi.perp() * phi_of_rsq(xi.norm_sq());
}

PhiH phi_h_profiles(double r) {
    const double s = r * r;
    return {phi_of_rsq(s), h_of_rsq(s)};
}

RadialProfile biot_savart_radial(const RadialProfile& w, double quad_tol) {
    const RadialGrid& grid = w.grid();
    std::vector<double> f(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        f[k] = grid[k] * w.values()[k];
    const std::vector<double> cum = cumulative_integral_checked(grid, f, quad_tol);

    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        v[k] = grid[k] > 0.0 ? cum[k] / grid[k] : 0.0;
    return RadialProfile(w.grid_ptr(), std::move(v));
}

RadialProfile biot_savart_radial_outer(const RadialProfile& w, double quad_tol) {
    const RadialGrid& grid = w.grid();
    std::vector<double> f(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        f[k] = grid[k] * w.values()[k];
    const std::vector<double> cum = cumulative_integral_checked(grid, f, quad_tol);

    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        v[k] = grid[k] > 0.0 ? (cum[k] - cum.back()) / grid[k] : 0.0;
    return RadialProfile(w.grid_ptr(), std::move(v));
}

Vec2 point_vortex_velocity(Vec2 eval_at, const std::vector<Vec2>& centers,
                           const std::vector<double>& circulations) {
    if (centers.size() != circulations.size())
        throw Error("point_vortex_velocity: center/circulation size mismatch");
    Vec2 u;
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const Vec2 dx = eval_at - centers[j];
        const double rsq = dx.norm_sq();
        if (rsq == 0.0)
            throw Error("point_vortex_velocity: evaluation at a vortex center");
        u += dx.perp() * (circulations[j] / (2.0 * M_PI * rsq));
    }
    return u;
}

} // namespace kernels
} // namespace vortexlab
