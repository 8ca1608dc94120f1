#pragma once

#include <string>
#include <vector>

#include "vortexlab/planar.hpp"

namespace vortexlab {
namespace point_vortex {

/// Which center dynamics to integrate: the singular Helmholtz-Kirchhoff
/// system, or its viscous regularization through the Gaussian-vortex velocity
/// at scale sqrt(nu t).
enum class System { inviscid, viscous };

struct VortexConfiguration {
    std::vector<Vec2> positions;       // initial centers, pairwise distinct
    std::vector<double> circulations;  // all nonzero
    double nu = 0.0;                   // kinematic viscosity
    double horizon = 1.0;              // integration time T

    std::size_t size() const { return positions.size(); }
    double total_circulation_abs() const;
    double min_pair_distance() const;
    void validate() const;
};

/// dz_i/dt = (1/2pi) sum_{j != i} alpha_j (z_i - z_j)^perp / |z_i - z_j|^2.
std::vector<Vec2> rhs_inviscid(const std::vector<Vec2>& z,
                               const std::vector<double>& alpha);

/// dz_i/dt = sum_j (alpha_j / sqrt(eta)) v^G((z_i - z_j)/sqrt(eta)) with
/// eta = nu t; the j = i term vanishes and eta = 0 reduces to rhs_inviscid.
std::vector<Vec2> rhs_viscous(const std::vector<Vec2>& z,
                              const std::vector<double>& alpha, double eta);

struct Trajectory {
    System system = System::inviscid;
    double nu = 0.0;
    std::vector<double> circulations;
    std::vector<double> times;
    std::vector<std::vector<Vec2>> positions;   // [sample][vortex]
    std::vector<std::vector<Vec2>> velocities;  // [sample][vortex]
    double min_separation = 0.0;                // d, refined between samples
    double turnover_time = 0.0;                 // d^2 / sum |alpha_i|
    bool collision = false;

    std::size_t n_vortices() const { return circulations.size(); }
    /// Cubic Hermite interpolation between samples.
    Vec2 position(std::size_t i, double t) const;
    Vec2 separation(std::size_t i, std::size_t j, double t) const;
};

struct IntegratorOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    double collision_guard_fraction = 1e-3; // times initial min separation
};

/// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) over [0, T], sampled
/// at `samples` equispaced times. Truncates with collision flag set when the
/// minimum separation drops below the guard radius.
Trajectory integrate(const VortexConfiguration& config, System system,
                     std::size_t samples, const IntegratorOptions& opt = {});

struct DeviationCurve {
    std::vector<double> times;
    std::vector<double> deviation; // max_i |z_i^nu - z_i| / d
    std::vector<double> envelope;  // k1 * exp(-d^2 / (5 nu t))
    double k1 = 0.0;
};

/// Normalized deviation between the viscous and inviscid trajectories of the
/// same configuration on the same sample times, with the exponential bound
/// envelope fitted at the final time.
DeviationCurve compare_trajectories(const Trajectory& viscous,
                                    const Trajectory& inviscid);

/// Conserved quantities of the center dynamics.
Vec2 weighted_centroid(const std::vector<Vec2>& z, const std::vector<double>& alpha);
double pair_log_energy(const std::vector<Vec2>& z, const std::vector<double>& alpha);

/// CSV with columns t, vortex_index, z1, z2.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

} // namespace point_vortex
} // namespace vortexlab
