#pragma once

#include <vector>

#include "vortexlab/azimuthal.hpp"
#include "vortexlab/planar.hpp"
#include "vortexlab/point_vortex.hpp"

namespace vortexlab {
namespace expansion {

/// Partial sum sum_{n=2}^{terms+1} (-1)^{n-1} (|xi|/|eta|)^n sin(n(theta-phi)),
/// the multipole expansion of xi . V1(xi, eta). Requires |xi| < |eta|.
double velocity_difference_series(Vec2 xi, Vec2 eta, int terms);

struct V1V2 {
    Vec2 v1; // (xi+eta)^perp/|xi+eta|^2 - eta^perp/|eta|^2
    Vec2 v2; // Gaussian-cutoff counterpart; v^G(xi+eta) - v^G(eta) = (v1+v2)/(2 pi)
};
V1V2 v1_v2_split(Vec2 xi, Vec2 eta);

/// xi . V1 evaluated from the exact split, for series-tail comparisons.
double xi_dot_v1_exact(Vec2 xi, Vec2 eta);

/// W(xi, eta) = V1 plus the linear strain counter-term; O(|xi|^2/|eta|^3).
Vec2 w_field(Vec2 xi, Vec2 eta);

/// Leading residuum terms of the Gaussian-superposition ansatz, stored as
/// azimuthal modes. The trig reduction leaves a single nonzero mode in each
/// (n = 2, 3, 4); the companion slots mandated by the data contract are kept
/// and identically zero.
struct ExpansionTerms {
    std::size_t vortex = 0;
    double time = 0.0;
    std::vector<AzimuthalMode> a; // n = 2
    std::vector<AzimuthalMode> b; // n = 1 (zero), n = 3
    std::vector<AzimuthalMode> c; // n = 2 (zero), n = 4

    double eval_a(Vec2 xi) const; // closed vector form of the n=2 term
    double eval_b(Vec2 xi) const;
    double eval_c(Vec2 xi) const;

private:
    friend ExpansionTerms residuum_terms(const point_vortex::Trajectory&, std::size_t,
                                         double, std::shared_ptr<const RadialGrid>);
    std::vector<Vec2> z_;      // z_ij(t), j != i
    std::vector<double> kap_;  // alpha_j / alpha_i
    double d_ = 0.0;
};

ExpansionTerms residuum_terms(const point_vortex::Trajectory& traj, std::size_t i,
                              double t,
                              std::shared_ptr<const RadialGrid> grid = nullptr);

/// Exact naive residuum
/// R_i(xi) = sum_{j != i} (alpha_j/nu) {v^G(xi + z_ij/sqrt(nu t)) -
///           v^G(z_ij/sqrt(nu t))} . grad G(xi)
/// sampled on a polar grid.
ScalarPolarField naive_residuum_exact(const point_vortex::Trajectory& traj,
                                      std::size_t i, double t, double nu,
                                      const PolarGrid& grid);

/// Weighted sup norm of the remainder after subtracting the three leading
/// terms: sup_xi |(d^2/(alpha_i t)) R_i - A - s B - s^2 C| e^{gamma |xi|^2/4}
/// with s = sqrt(nu t)/d.
double weighted_remainder_sup(const point_vortex::Trajectory& traj, std::size_t i,
                              double t, double nu, double gamma,
                              const PolarGrid& grid);

/// Linear strain field of the companion vortices at unit scale.
struct StrainField {
    std::vector<Vec2> z;       // z_ij(t)
    std::vector<double> coef;  // (alpha_j/alpha_i) d^2 / |z_ij|^4
    Vec2 operator()(Vec2 xi) const;
};
StrainField strain_field(const point_vortex::Trajectory& traj, std::size_t i, double t);

} // namespace expansion
} // namespace vortexlab
