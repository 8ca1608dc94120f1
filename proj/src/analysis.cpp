#include "vortexlab/analysis.hpp"

#include <cmath>

#include "vortexlab/kernels.hpp"
#include "vortexlab/profile_solver.hpp"

namespace vortexlab {
namespace analysis {

PolarGrid default_extraction_grid() { return PolarGrid::uniform(192, 10.0, 128); }

namespace {

// Catmull-Rom weights for a unit-spaced stencil at offsets -1, 0, 1, 2.
inline void catmull_rom(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}

// periodic bicubic interpolation on an m x m grid of spacing h
double interp_periodic(const std::vector<double>& f, std::size_t m, double h,
                       double x, double y) {
    const double gx = x / h, gy = y / h;
    const long i0 = long(std::floor(gx)), j0 = long(std::floor(gy));
    double wx[4], wy[4];
    catmull_rom(gx - double(i0), wx);
    catmull_rom(gy - double(j0), wy);
    double acc = 0.0;
    for (int a = -1; a <= 2; ++a) {
        const std::size_t i = std::size_t(((i0 + a) % long(m) + long(m)) % long(m));
        double row = 0.0;
        for (int b = -1; b <= 2; ++b) {
            const std::size_t j = std::size_t(((j0 + b) % long(m) + long(m)) % long(m));
            row += wy[b + 1] * f[i * m + j];
        }
        acc += wx[a + 1] * row;
    }
    return acc;
}

} // namespace

RescaledProfile extract_rescaled_profile(const ns_sim::VorticityField& field,
                                         const point_vortex::Trajectory& traj,
                                         std::size_t i, double t,
                                         const PolarGrid& grid) {
    if (i >= field.parts.size())
        throw Error("extract_rescaled_profile: component index out of range");
    if (std::abs(field.time - t) > 1e-9 * std::max(t, 1.0))
        throw Error("extract_rescaled_profile: field snapshot is not at time t");
    const double scale = std::sqrt(field.nu * t);
    if (grid.radii.back() * scale >= field.box / 2)
        throw Error("extract_rescaled_profile: xi-grid exceeds the periodic box");
    const double alpha = traj.circulations[i];

    const std::size_t fine = 2 * field.n;
    const std::vector<double> refined = ns_sim::upsample(field.parts[i], field.n, 2);
    const double h = field.box / double(fine);

    const Vec2 center = traj.position(i, t);
    RescaledProfile out;
    out.vortex = i;
    out.time = t;
    out.nu = field.nu;
    out.center = center;
    out.scale = scale;
    out.samples = ScalarPolarField(grid);
    const double pre = field.nu * t / alpha;
    out.samples.fill([&](double r, double theta) {
        const double x = center.x1 + scale * r * std::cos(theta);
        const double y = center.x2 + scale * r * std::sin(theta);
        return pre * interp_periodic(refined, fine, h, x, y);
    });
    return out;
}

double x_norm(const ScalarPolarField& w, double beta) {
    if (beta <= 0.0 || beta >= 1.0) throw Error("x_norm: beta must be in (0, 1)");
    return std::sqrt(w.weighted_l2_sq(beta));
}

ScalarPolarField subtract_gaussian(const RescaledProfile& profile) {
    ScalarPolarField out = profile.samples;
    const PolarGrid& grid = out.grid();
    for (std::size_t ir = 0; ir < grid.radii.size(); ++ir) {
        const double g = kernels::gauss_profile(grid.radii[ir]);
        for (std::size_t m = 0; m < grid.n_angles; ++m) out.at(ir, m) -= g;
    }
    return out;
}

AzimuthalMode azimuthal_project(const RescaledProfile& profile, int n) {
    return profile.samples.project(n);
}

QuadrupoleFit quadrupole_fit(const RescaledProfile& profile,
                             const point_vortex::Trajectory& traj, std::size_t i,
                             double t, double nu) {
    const AzimuthalMode p2 = profile.samples.project(2);

    // deformation template from the radial boundary-value problem
    auto op_grid = profile_solver::operator_grid();
    const RadialProfile r2g = RadialProfile::sample(
        op_grid, [](double r) { return r * r * kernels::gauss_profile(r); });
    const RadialProfile omega2 = profile_solver::solve_omega_bvp(2, r2g).vorticity;

    // plain r dr least squares on the extraction radii; the Gaussian-weighted
    // product would amplify interpolation noise at the rim
    const std::vector<double>& radii = p2.cos_coeff.grid().nodes();
    double num_c = 0.0, num_s = 0.0, den = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double r = radii[k];
        const double w = omega2(r) * r;
        num_c += p2.cos_coeff.values()[k] * w;
        num_s += p2.sin_coeff.values()[k] * w;
        den += omega2(r) * w;
    }
    const double u = num_c / den, v = num_s / den;

    QuadrupoleFit fit;
    fit.amplitude_measured = std::hypot(u, v);
    fit.phase_measured = std::fmod(0.5 * std::atan2(v, u) + M_PI, M_PI);

    // predicted from the pair geometry: sum_j (a_j/a_i) nu t/(4 pi |z_ij|^2)
    double pc = 0.0, ps = 0.0;
    for (std::size_t j = 0; j < traj.n_vortices(); ++j) {
        if (j == i) continue;
        const Vec2 z = traj.separation(i, j, t);
        const double kappa = traj.circulations[j] / traj.circulations[i];
        const double amp = kappa * nu * t / (4.0 * M_PI * z.norm_sq());
        pc += amp * std::cos(2.0 * z.arg());
        ps += amp * std::sin(2.0 * z.arg());
    }
    fit.amplitude_predicted = std::hypot(pc, ps);
    fit.phase_predicted = std::fmod(0.5 * std::atan2(ps, pc) + M_PI, M_PI);

    const double floor = 1e-12;
    fit.degenerate = fit.amplitude_measured < floor;
    return fit;
}

LineFit convergence_fit(const std::vector<double>& nus,
                        const std::vector<double>& metrics) {
    if (nus.size() < 3) throw Error("convergence_fit: need at least 3 viscosities");
    double lo = nus[0], hi = nus[0];
    for (double v : nus) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi < 4.0 * lo) throw Error("convergence_fit: viscosity range must span 4x");
    for (double m : metrics)
        if (!(m > 0.0)) throw Error("convergence_fit: non-positive metric");
    return fit_loglog(nus, metrics);
}

} // namespace analysis
} // namespace vortexlab
