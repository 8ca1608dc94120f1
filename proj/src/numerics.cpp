#include "vortexlab/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace vortexlab {

std::vector<double> solve_tridiagonal(std::vector<double> lower,
                                      std::vector<double> diag,
                                      std::vector<double> upper,
                                      std::vector<double> rhs) {
    const std::size_t m = diag.size();
    if (lower.size() != m || upper.size() != m || rhs.size() != m)
        throw Error("solve_tridiagonal: inconsistent sizes");
    for (std::size_t i = 1; i < m; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[m - 1] /= diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    return rhs;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 4) throw Error("CubicSpline: need at least 4 nodes");
    if (y_.size() != n) throw Error("CubicSpline: size mismatch");
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        if (h[i] <= 0.0) throw Error("CubicSpline: abscissae not increasing");
        del[i] = (y_[i + 1] - y_[i]) / h[i];
    }

    // Slope unknowns s_k; the not-a-knot end conditions are folded against
    // the neighbouring interior row, which keeps the diagonal pivots nonzero
    // for any node spacing (the second-derivative formulation does not).
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        lo[i] = 1.0 / h[i - 1];
        di[i] = 2.0 * (1.0 / h[i - 1] + 1.0 / h[i]);
        up[i] = 1.0 / h[i];
        rhs[i] = 3.0 * (del[i - 1] / h[i - 1] + del[i] / h[i]);
    }
    {
        const double h0 = h[0], h1 = h[1];
        di[0] = (h1 + h0) / (h0 * h0 * h1);
        up[0] = (1.0 / (h0 * h0) - 1.0 / (h1 * h1)) + 2.0 * (h0 + h1) / (h1 * h1 * h0);
        rhs[0] = 2.0 * del[0] / (h0 * h0) - 2.0 * del[1] / (h1 * h1) +
                 3.0 * (h1 * del[0] + h0 * del[1]) / (h1 * h1 * h0);

        const double ha = h[n - 3], hb = h[n - 2];
        lo[n - 1] = (1.0 / (ha * ha) - 1.0 / (hb * hb)) - 2.0 * (ha + hb) / (ha * ha * hb);
        di[n - 1] = -(ha + hb) / (hb * hb * ha);
        rhs[n - 1] = 2.0 * del[n - 3] / (ha * ha) - 2.0 * del[n - 2] / (hb * hb) -
                     3.0 * (hb * del[n - 3] + ha * del[n - 2]) / (ha * ha * hb);
    }
    std::vector<double> s = solve_tridiagonal(lo, di, up, rhs);

    b_.resize(n - 1);
    c_.resize(n - 1);
    d_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        b_[i] = s[i];
        c_[i] = (3.0 * del[i] - 2.0 * s[i] - s[i + 1]) / h[i];
        d_[i] = (s[i] + s[i + 1] - 2.0 * del[i]) / (h[i] * h[i]);
    }

    cum_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = h[i];
        cum_[i + 1] = cum_[i] + t * (y_[i] + t * (b_[i] / 2 + t * (c_[i] / 3 + t * d_[i] / 4)));
    }
}

std::size_t CubicSpline::find_segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = (it == x_.begin()) ? 0 : std::size_t(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double CubicSpline::operator()(double x) const {
    const std::size_t i = find_segment(x);
    const double t = x - x_[i];
    return y_[i] + t * (b_[i] + t * (c_[i] + t * d_[i]));
}

double CubicSpline::derivative(double x) const {
    const std::size_t i = find_segment(x);
    const double t = x - x_[i];
    return b_[i] + t * (2.0 * c_[i] + 3.0 * t * d_[i]);
}

double CubicSpline::integral_to(double x) const {
    const std::size_t i = find_segment(x);
    const double t = x - x_[i];
    return cum_[i] + t * (y_[i] + t * (b_[i] / 2 + t * (c_[i] / 3 + t * d_[i] / 4)));
}

namespace {
double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw Error("fit_line: need >= 2 points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error("fit_line: degenerate abscissae");
    LineFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return out;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) throw Error("fit_loglog: non-positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

} // namespace vortexlab
