#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vortexlab/point_vortex.hpp"

namespace vortexlab {
namespace ns_sim {

/// Doubly periodic gridded vorticity: the total field plus one passively
/// advected component per vortex, all transported by the total velocity.
struct VorticityField {
    std::size_t n = 0;   // grid points per side, power of two
    double box = 1.0;    // side length
    double time = 0.0;
    double nu = 0.0;
    std::vector<double> circulations;
    std::vector<double> total;               // row-major n*n
    std::vector<std::vector<double>> parts;  // one per vortex

    double dx() const { return box / double(n); }
    double cell_area() const { return dx() * dx(); }
    double integral(const std::vector<double>& f) const;
    double enstrophy() const;
};

/// Superposition of Gaussian vortices of core size sqrt(nu t0), periodized by
/// nearest image. Fails when a core is unresolved (sqrt(nu t0) < 3 dx) or a
/// center sits within box/4 of the boundary.
VorticityField init_oseen_superposition(const point_vortex::VortexConfiguration& config,
                                        double t0, std::size_t n, double box);

/// Same geometry checks and scaling, but each component carries a caller
/// supplied self-similar profile w_i(xi) in place of the Gaussian.
VorticityField init_profile_superposition(
    const point_vortex::VortexConfiguration& config, double t0, std::size_t n,
    double box, const std::vector<std::function<double(Vec2)>>& profiles);

/// Pseudospectral stepper: 2/3-dealiased advection under explicit RK4 with an
/// exact integrating factor for diffusion. Owns the FFT plans and scratch.
class Solver {
public:
    Solver(std::size_t n, double box);
    ~Solver();
    Solver(const Solver&) = delete;
    Solver& operator=(const Solver&) = delete;

    /// Maximum pointwise speed of the field's velocity.
    double max_speed(const VorticityField& field);

    /// One step of size dt; all component fields advance with the velocity
    /// of the total field. Throws on CFL violation (dt > 0.5 dx / max|u|).
    void step(VorticityField& field, double dt);

    /// Advance to t_end with a fixed step chosen from the CFL bound and the
    /// relative-time constraint dt <= 0.1 t at the interval start; the step
    /// is re-chosen (rejected and re-split) if the CFL bound tightens.
    void advance_to(VorticityField& field, double t_end);

    struct Limits {
        double cfl_safety = 0.4;
        double max_time_fraction = 0.1; // dt <= fraction * t
    };
    Limits limits;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct DecomposeReport {
    double worst_undershoot = 0.0;     // max over i of max(0, -sign(a_i) w_i)
    double undershoot_scale = 0.0;     // max over i of max |w_i|
    std::vector<double> masses;        // integral of each component
    double sum_residual = 0.0;         // max |sum_i w_i - w|
};

DecomposeReport decompose_check(const VorticityField& field);

/// Flat binary snapshot: magic, n, box, t, nu, N, then the total field and
/// the N components as row-major 64-bit floats.
void write_snapshot(const VorticityField& field, const std::string& path);
VorticityField read_snapshot(const std::string& path);

/// Fourier interpolation of a periodic n x n field onto a (factor n)^2 grid.
std::vector<double> upsample(const std::vector<double>& f, std::size_t n,
                             std::size_t factor);

} // namespace ns_sim
} // namespace vortexlab
