#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vortexlab/azimuthal.hpp"
#include "vortexlab/ns_sim.hpp"
#include "vortexlab/numerics.hpp"
#include "vortexlab/point_vortex.hpp"

namespace vortexlab {
namespace analysis {

/// Samples of one vortex component in the self-similar frame
/// xi = (x - z_i(t)) / sqrt(nu t), scaled by nu t / alpha_i.
struct RescaledProfile {
    std::size_t vortex = 0;
    double time = 0.0;
    double nu = 0.0;
    Vec2 center;
    double scale = 0.0; // sqrt(nu t)
    ScalarPolarField samples;
};

PolarGrid default_extraction_grid(); // 192 radii on [0, 10], 128 angles

/// Interpolate one component of the gridded vorticity onto the polar
/// self-similar frame centered at the regularized trajectory position.
/// The field is Fourier-refined 2x and then read with a bicubic stencil.
/// Throws when the xi-grid leaves the periodic box.
RescaledProfile extract_rescaled_profile(const ns_sim::VorticityField& field,
                                         const point_vortex::Trajectory& traj,
                                         std::size_t i, double t,
                                         const PolarGrid& grid = default_extraction_grid());

/// Weighted L2 norm (int |w|^2 e^{beta |xi|/4} dxi)^{1/2} by polar quadrature.
double x_norm(const ScalarPolarField& w, double beta);

/// Difference from the Gaussian profile, on the profile's own grid.
ScalarPolarField subtract_gaussian(const RescaledProfile& profile);

/// Angular Fourier projection of the sampled profile.
AzimuthalMode azimuthal_project(const RescaledProfile& profile, int n);

struct QuadrupoleFit {
    double amplitude_measured = 0.0;
    double amplitude_predicted = 0.0;
    double phase_measured = 0.0;  // in [0, pi)
    double phase_predicted = 0.0; // in [0, pi)
    bool degenerate = false;      // quadrupole too weak for a phase
};

/// Least-squares fit of the measured m = 2 content against the deformation
/// template omega(r), compared with the prediction from the trajectory.
QuadrupoleFit quadrupole_fit(const RescaledProfile& profile,
                             const point_vortex::Trajectory& traj, std::size_t i,
                             double t, double nu);

/// Least-squares slope of log(metric) against log(nu). Requires at least 3
/// viscosities spanning a factor of 4 and positive metrics.
LineFit convergence_fit(const std::vector<double>& nus,
                        const std::vector<double>& metrics);

} // namespace analysis
} // namespace vortexlab
