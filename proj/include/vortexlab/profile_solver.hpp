#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "vortexlab/azimuthal.hpp"
#include "vortexlab/point_vortex.hpp"
#include "vortexlab/radial_grid.hpp"

namespace vortexlab {
namespace profile_solver {

/// Grid used for the dense mode-operator discretizations. Coarser than the
/// default quadrature grid; dense factorizations at M = 2048 would dominate
/// the runtime without improving the tested tolerances.
std::shared_ptr<const RadialGrid> operator_grid();

/// Homogeneous solutions of the radial operator
///   -(1/r)(r y')' + (n^2/r^2 - h(r)) y = 0
/// normalized by psi_minus ~ r^n at 0 and psi_plus ~ r^{-n} at r_max.
/// psi_plus is singular at r = 0; its value at a leading r = 0 node is NaN.
struct HomogeneousSolutions {
    int n = 0;
    std::shared_ptr<const RadialGrid> grid;
    std::vector<double> psi_minus;
    std::vector<double> psi_plus;
    double w0 = 0.0;           // r * Wronskian, constant across the grid
    double w0_flatness = 0.0;  // max relative deviation of r W(r) on [0.1, rmax]
    double kappa_minus = 0.0;  // psi_minus ~ kappa_minus r^n at infinity
    double kappa_plus = 0.0;   // psi_plus ~ kappa_plus r^{-n} at zero
};

HomogeneousSolutions homogeneous_solutions(int n,
                                           std::shared_ptr<const RadialGrid> grid);

/// Green's-function solution of
///   -(1/r)(r Omega')' + (n^2/r^2 - h) Omega = a/(n phi)
/// decaying as r^n at 0 and r^{-n} at infinity, plus the vorticity profile
/// omega = h Omega + a/(n phi).
struct BvpSolution {
    RadialProfile stream;    // Omega
    RadialProfile vorticity; // omega
};
BvpSolution solve_omega_bvp(int n, const RadialProfile& a);
BvpSolution solve_omega_bvp(int n, const RadialProfile& a,
                            const HomogeneousSolutions& hom);

/// Solution of the mode-n stream equation -(1/r)(r S')' + (n^2/r^2) S = f
/// with decay selected at both ends (exact power-law kernel).
std::vector<double> stream_mode_solve(int n, const RadialGrid& grid,
                                      const std::vector<double>& f);

/// Linearized advection about the Gaussian vortex applied to one azimuthal
/// mode; radial modes (n = 0) are in the kernel and return zero.
AzimuthalMode apply_lambda(const AzimuthalMode& w);

/// Dense discretization of one angular sector of the linearized operators in
/// the Gaussian-weighted space. Assembled in a frame where 1 - L is exactly
/// symmetric positive definite and the advection part exactly skew, so the
/// resolvent bounds hold discretely to round-off.
class ModeOperator {
public:
    ModeOperator(int n, std::shared_ptr<const RadialGrid> grid = operator_grid());

    int mode() const { return n_; }
    const RadialGrid& grid() const { return *grid_; }

    /// Solve [eps (1 - L) + Lambda] w = z for eps != 0.
    AzimuthalMode solve_regularized(double eps, const AzimuthalMode& z) const;

    /// Solve Lambda w = z (n >= 2; the discrete advection matrix is
    /// invertible there).
    AzimuthalMode solve_lambda(const AzimuthalMode& z) const;

    AzimuthalMode apply(const AzimuthalMode& w) const;

    /// |<Lambda u, u>_Y| / ||u||_Y^2 for a supplied mode, using the dense
    /// discretization.
    double skew_defect(const AzimuthalMode& u) const;

    /// Rough 1-norm condition estimate of the regularized matrix.
    double condition_estimate(double eps) const;

    /// Discrete Y-norm matching the operator's inner product.
    double y_norm(const AzimuthalMode& w) const;

private:
    int n_;
    std::shared_ptr<const RadialGrid> grid_;
    std::size_t m_;                    // interior size
    std::vector<double> sqrt_rho_;     // orthonormal-frame scaling, interior
    std::vector<double> gauss_half_;   // e^{-r^2/8}, interior
    std::vector<double> shat_diag_, shat_off_; // 1 + Shat, tridiagonal sym
    // dense symmetric advection matrix in the orthonormal frame
    std::vector<double> that_; // row-major m x m

    std::vector<std::complex<double>> to_frame(const AzimuthalMode& z) const;
    AzimuthalMode from_frame(const std::vector<std::complex<double>>& x) const;
};

/// First-order deformation profiles of one vortex at one time.
struct DeformationProfiles {
    std::size_t vortex = 0;
    double time = 0.0;
    double nu = 0.0;
    double alpha = 0.0;  // circulation of this vortex
    double d = 0.0;      // minimal separation of the trajectory
    AzimuthalMode f_zero;           // n = 2, inviscid-limit deformation
    AzimuthalMode f_visc;           // n = 2, regularized deformation
    AzimuthalMode f_bar;            // n = 0, slow radial correction
    std::vector<AzimuthalMode> h;   // n = 1 slot (zero) and n = 3
    double f_visc_deviation = 0.0;  // ||f_visc - f_zero||_Y
    double mass_drift = 0.0;        // largest f_bar mass correction applied
};

struct FbarOptions {
    double dtau = 1e-2;            // log-time step
    double start_fraction = 1e-3;  // integration starts at this fraction of t
};

/// Deformation profiles along a trajectory at several times; the radial
/// correction is integrated once over the shared history.
std::vector<DeformationProfiles> build_deformation_series(
    const point_vortex::Trajectory& traj, std::size_t i,
    const std::vector<double>& times, double nu, const FbarOptions& opt = {});

DeformationProfiles build_deformation(const point_vortex::Trajectory& traj,
                                      std::size_t i, double t, double nu,
                                      const FbarOptions& opt = {});

/// Radial correction profiles at the requested times (n = 0 modes), exposed
/// separately for the linear-parabolic-evolution tests.
std::vector<AzimuthalMode> evolve_fbar(const point_vortex::Trajectory& traj,
                                       std::size_t i, double nu,
                                       const std::vector<double>& times,
                                       const FbarOptions& opt = {},
                                       double* mass_drift = nullptr);

/// Angular average of (V^F + D) . grad F driving the radial correction,
/// without the -alpha_i t/d^2 prefactor. Diagnostic / test surface.
RadialProfile radial_source_p0(const point_vortex::Trajectory& traj, std::size_t i,
                               double nu, double t);

enum class WappOrder { first, three_halves };

/// Evaluable approximate vorticity profile
///   G + (nu t/d^2)(f_bar + f_visc) [+ (nu t/d^2)^{3/2} h].
class ApproximateProfile {
public:
    ApproximateProfile(DeformationProfiles profiles, double nu_t_over_d2,
                       WappOrder order);

    double operator()(Vec2 xi) const;
    double eval_polar(double r, double theta) const;
    ScalarPolarField sample(const PolarGrid& grid) const;

    /// Number of evaluations beyond the profile grid (clamped to G).
    std::size_t clamp_count() const { return clamp_count_; }
    const DeformationProfiles& profiles() const { return p_; }

private:
    DeformationProfiles p_;
    double s_;
    WappOrder order_;
    mutable std::size_t clamp_count_ = 0;
};

ApproximateProfile assemble_wapp(DeformationProfiles profiles, double nu_t_over_d2,
                                 WappOrder order);

/// Dump every stored profile of a deformation set as CSV rows
/// r, mode_n, cos_coeff, sin_coeff.
void write_profiles_csv(const DeformationProfiles& p, const std::string& path);

} // namespace profile_solver
} // namespace vortexlab
