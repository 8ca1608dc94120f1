#include "vortexlab/azimuthal.hpp"

#include <cmath>

namespace vortexlab {

double AzimuthalMode::eval(double r, double theta) const {
    double v = cos_coeff(r) * std::cos(n * theta);
    if (n > 0 && !sin_coeff.empty()) v += sin_coeff(r) * std::sin(n * theta);
    return v;
}

double AzimuthalMode::y_norm_sq() const {
    const RadialGrid& grid = cos_coeff.grid();
    const std::vector<double>& w = grid.trapezoid_weights();
    double acc = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = grid[k];
        double m = cos_coeff.values()[k] * cos_coeff.values()[k];
        if (n > 0 && !sin_coeff.empty())
            m += sin_coeff.values()[k] * sin_coeff.values()[k];
        acc += w[k] * m * std::exp(r * r / 4.0) * r;
    }
    return (n == 0 ? 2.0 * M_PI : M_PI) * acc;
}

double AzimuthalMode::y_norm() const { return std::sqrt(y_norm_sq()); }

AzimuthalMode AzimuthalMode::zero(int n, std::shared_ptr<const RadialGrid> grid) {
    AzimuthalMode m;
    m.n = n;
    std::vector<double> zeros(grid->size(), 0.0);
    m.cos_coeff = RadialProfile(grid, zeros);
    m.sin_coeff = RadialProfile(std::move(grid), std::move(zeros));
    return m;
}

PolarGrid PolarGrid::uniform(std::size_t n_radii, double r_max, std::size_t n_angles) {
    PolarGrid g;
    g.radii.resize(n_radii);
    for (std::size_t k = 0; k < n_radii; ++k)
        g.radii[k] = r_max * double(k) / double(n_radii - 1);
    g.n_angles = n_angles;
    return g;
}

double PolarGrid::angle(std::size_t m) const {
    return 2.0 * M_PI * double(m) / double(n_angles);
}

ScalarPolarField::ScalarPolarField(PolarGrid grid)
    : grid_(std::move(grid)), v_(grid_.size(), 0.0) {}

AzimuthalMode ScalarPolarField::project(int n) const {
    const std::size_t M = grid_.n_angles;
    if (M < std::size_t(4 * std::max(n, 1)))
        throw Error("project: angle count too small for mode " + std::to_string(n));
    auto rgrid = std::make_shared<RadialGrid>(grid_.radii);
    std::vector<double> c(grid_.radii.size(), 0.0), s(grid_.radii.size(), 0.0);
    const double norm = (n == 0 ? 1.0 : 2.0) / double(M);
    for (std::size_t ir = 0; ir < grid_.radii.size(); ++ir) {
        double ac = 0.0, as = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const double theta = grid_.angle(m);
            ac += at(ir, m) * std::cos(n * theta);
            as += at(ir, m) * std::sin(n * theta);
        }
        c[ir] = norm * ac;
        s[ir] = n == 0 ? 0.0 : norm * as;
    }
    AzimuthalMode mode;
    mode.n = n;
    mode.cos_coeff = RadialProfile(rgrid, std::move(c));
    mode.sin_coeff = RadialProfile(rgrid, std::move(s));
    return mode;
}

double ScalarPolarField::sup_weighted_gaussian(double gamma) const {
    double sup = 0.0;
    for (std::size_t ir = 0; ir < grid_.radii.size(); ++ir) {
        const double w = std::exp(gamma * grid_.radii[ir] * grid_.radii[ir] / 4.0);
        for (std::size_t m = 0; m < grid_.n_angles; ++m)
            sup = std::max(sup, std::abs(at(ir, m)) * w);
    }
    return sup;
}

double ScalarPolarField::weighted_l2_sq(double beta) const {
    // trapezoid in the angle (spectrally exact), cubic in the radius
    const double dtheta = 2.0 * M_PI / double(grid_.n_angles);
    std::vector<double> radial(grid_.radii.size());
    for (std::size_t ir = 0; ir < grid_.radii.size(); ++ir) {
        const double r = grid_.radii[ir];
        double s = 0.0;
        for (std::size_t m = 0; m < grid_.n_angles; ++m) s += at(ir, m) * at(ir, m);
        radial[ir] = s * std::exp(beta * r / 4.0) * r * dtheta;
    }
    CubicSpline sp(grid_.radii, radial);
    return sp.integral_to(grid_.radii.back());
}

double ScalarPolarField::integral() const {
    const double dtheta = 2.0 * M_PI / double(grid_.n_angles);
    std::vector<double> radial(grid_.radii.size());
    for (std::size_t ir = 0; ir < grid_.radii.size(); ++ir) {
        double s = 0.0;
        for (std::size_t m = 0; m < grid_.n_angles; ++m) s += at(ir, m);
        radial[ir] = s * grid_.radii[ir] * dtheta;
    }
    CubicSpline sp(grid_.radii, radial);
    return sp.integral_to(grid_.radii.back());
}

ScalarPolarField& ScalarPolarField::operator-=(const ScalarPolarField& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}

ScalarPolarField& ScalarPolarField::operator+=(const ScalarPolarField& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}

ScalarPolarField& ScalarPolarField::operator*=(double c) {
    for (auto& v : v_) v *= c;
    return *this;
}

} // namespace vortexlab
