#pragma once

#include <cstddef>
#include <vector>

#include "vortexlab/radial_grid.hpp"

namespace vortexlab {

/// One angular Fourier mode of a planar scalar field:
/// w(r, theta) = cos_coeff(r) cos(n theta) + sin_coeff(r) sin(n theta).
struct AzimuthalMode {
    int n = 0;
    RadialProfile cos_coeff;
    RadialProfile sin_coeff; // identically zero when n = 0

    double eval(double r, double theta) const;

    /// Squared norm in the Gaussian-weighted space:
    /// pi * int (c^2 + s^2) e^{r^2/4} r dr  (2 pi for n = 0).
    double y_norm_sq() const;
    double y_norm() const;

    static AzimuthalMode zero(int n, std::shared_ptr<const RadialGrid> grid);
};

/// Polar evaluation grid: radii x uniformly spaced angles.
struct PolarGrid {
    std::vector<double> radii;
    std::size_t n_angles = 0;

    static PolarGrid uniform(std::size_t n_radii, double r_max, std::size_t n_angles);
    double angle(std::size_t m) const;
    std::size_t size() const { return radii.size() * n_angles; }
};

/// Scalar samples on a PolarGrid, indexed [radius][angle].
class ScalarPolarField {
public:
    ScalarPolarField() = default;
    explicit ScalarPolarField(PolarGrid grid);

    const PolarGrid& grid() const { return grid_; }
    double& at(std::size_t ir, std::size_t m) { return v_[ir * grid_.n_angles + m]; }
    double at(std::size_t ir, std::size_t m) const { return v_[ir * grid_.n_angles + m]; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    template <class F>
    void fill(F&& f) { // f(r, theta)
        for (std::size_t ir = 0; ir < grid_.radii.size(); ++ir)
            for (std::size_t m = 0; m < grid_.n_angles; ++m)
                at(ir, m) = f(grid_.radii[ir], grid_.angle(m));
    }

    /// Angular Fourier projection P_n by trapezoid quadrature over the
    /// uniform angles; exact for mode content below n_angles/2.
    /// Throws on aliasing (n_angles < 4n).
    AzimuthalMode project(int n) const;

    /// sup over nodes of |w| e^{gamma r^2 / 4}.
    double sup_weighted_gaussian(double gamma) const;

    /// int |w|^2 e^{beta r / 4} dxi by polar quadrature (trapezoid in both
    /// directions).
    double weighted_l2_sq(double beta) const;

    /// int w dxi.
    double integral() const;

    ScalarPolarField& operator-=(const ScalarPolarField& o);
    ScalarPolarField& operator+=(const ScalarPolarField& o);
    ScalarPolarField& operator*=(double c);

private:
    PolarGrid grid_;
    std::vector<double> v_;
};

} // namespace vortexlab
