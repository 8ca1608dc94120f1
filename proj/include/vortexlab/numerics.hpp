#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortexlab {

/// Generic runtime failure with a diagnostic message.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Solve a tridiagonal system in place. `lower[i]` multiplies x[i-1] in row i,
/// `upper[i]` multiplies x[i+1]. Rows 0..m-1.
std::vector<double> solve_tridiagonal(std::vector<double> lower,
                                      std::vector<double> diag,
                                      std::vector<double> upper,
                                      std::vector<double> rhs);

/// Not-a-knot cubic spline through (x_k, y_k), x strictly increasing.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;

    /// Integral of the spline from x.front() to x, exact per segment.
    double integral_to(double x) const;
    /// Cumulative integral at every node.
    const std::vector<double>& node_integrals() const { return cum_; }

    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_, y_, b_, c_, d_; // y + b t + c t^2 + d t^3, t = x - x_k
    std::vector<double> cum_;
    std::size_t find_segment(double x) const;
};

/// Adaptive Simpson quadrature; independent oracle for integrals in tests
/// and reference values.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 60);

/// Golden-section minimization of a unimodal function on [a, b].
double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least-squares straight line through (x_k, y_k).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares slope of log(y) against log(x); y must be positive.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

} // namespace vortexlab
