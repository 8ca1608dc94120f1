#pragma once

#include <vector>

#include "vortexlab/planar.hpp"
#include "vortexlab/radial_grid.hpp"

namespace vortexlab {
namespace kernels {

/// Gaussian vortex profile g(r) = e^{-r^2/4} / (4 pi); unit total mass
/// 2 pi \int_0^inf s g(s) ds = 1.
double gauss_profile(double r);

/// Azimuthal speed of the Gaussian vortex, (1 - e^{-r^2/4}) / (2 pi r);
/// equals |oseen_velocity| and r * phi(r).
double oseen_speed(double r);

/// Velocity field of the unit Gaussian vortex,
/// v(xi) = xi^perp (1 - e^{-|xi|^2/4}) / (2 pi |xi|^2).
/// Below r^2 = 1e-2 the scalar factor switches to a series; the subtraction
/// 1 - e^{-r^2/4} loses digits there.
Vec2 oseen_velocity(Vec2 xi);

struct PhiH {
    double phi; // (1 - e^{-r^2/4}) / (2 pi r^2),   phi(0) = 1/(8 pi)
    double h;   // g/(2 phi) = (r^2/4)/(e^{r^2/4} - 1),   h(0) = 1
};
PhiH phi_h_profiles(double r);

/// Azimuthal velocity v_theta(r) = (1/r) \int_0^r s w(s) ds of a radially
/// symmetric vorticity w, by cumulative quadrature on w's grid.
/// Throws when the quadrature self-estimate exceeds its tolerance.
RadialProfile biot_savart_radial(const RadialProfile& w, double quad_tol = 1e-4);

/// Same integral written over the outer range, -(1/r) \int_r^{rmax} s w(s) ds;
/// agrees with the inner form for zero-mean w.
RadialProfile biot_savart_radial_outer(const RadialProfile& w, double quad_tol = 1e-4);

/// Velocity induced at eval_at by point vortices (singular kernel).
/// Throws if eval_at coincides with a center.
Vec2 point_vortex_velocity(Vec2 eval_at, const std::vector<Vec2>& centers,
                           const std::vector<double>& circulations);

} // namespace kernels
} // namespace vortexlab
