#include "vortexlab/profile_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>

#include "vortexlab/kernels.hpp"
#include "vortexlab/numerics.hpp"

namespace vortexlab {
namespace profile_solver {

using complexd = std::complex<double>;

std::shared_ptr<const RadialGrid> operator_grid() {
    static std::shared_ptr<const RadialGrid> grid = RadialGrid::graded(512, 20.0);
    return grid;
}

namespace {

double h_profile(double r) { return kernels::phi_h_profiles(r).h; }

// Unchecked cumulative spline integral of nodal values.
std::vector<double> cum_integral(const RadialGrid& grid, const std::vector<double>& f) {
    CubicSpline sp(grid.nodes(), f);
    return sp.node_integrals();
}

struct OdeState {
    double y;
    double yp;
};

// y'' = -y'/r + (n^2/r^2 - h) y
OdeState ode_rhs(int n, double r, OdeState s) {
    return {s.yp, -s.yp / r + (double(n) * n / (r * r) - h_profile(r)) * s.y};
}

OdeState rk4_march(int n, double r0, double r1, OdeState s, double hmax,
                   bool scale_by_radius) {
    const double span = r1 - r0;
    const double dir = span >= 0 ? 1.0 : -1.0;
    double r = r0;
    while (dir * (r1 - r) > 1e-15 * std::abs(r1)) {
        double h = hmax;
        if (scale_by_radius) h = std::min(h, 0.02 * std::min(std::abs(r), std::abs(r1)) + 1e-6);
        h = std::min(h, dir * (r1 - r)) * dir;
        const OdeState k1 = ode_rhs(n, r, s);
        const OdeState k2 = ode_rhs(n, r + h / 2, {s.y + h / 2 * k1.y, s.yp + h / 2 * k1.yp});
        const OdeState k3 = ode_rhs(n, r + h / 2, {s.y + h / 2 * k2.y, s.yp + h / 2 * k2.yp});
        const OdeState k4 = ode_rhs(n, r + h, {s.y + h * k3.y, s.yp + h * k3.yp});
        s.y += h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
        s.yp += h / 6 * (k1.yp + 2 * k2.yp + 2 * k3.yp + k4.yp);
        r += h;
    }
    return s;
}

// Power-series coefficients of psi_minus = r^n (1 + c1 r^2 + c2 r^4 + c3 r^6)
// from the expansion h(r) = 1 - r^2/8 + r^4/192 + 0 r^6 - ...
std::array<double, 4> frobenius_coeffs(int n) {
    const double h0 = 1.0, h1 = -1.0 / 8.0, h2 = 1.0 / 192.0;
    std::array<double, 4> c{1.0, 0.0, 0.0, 0.0};
    c[1] = -(h0 * c[0]) / (4.0 * 1 * (n + 1));
    c[2] = -(h1 * c[0] + h0 * c[1]) / (4.0 * 2 * (n + 2));
    c[3] = -(h2 * c[0] + h1 * c[1] + h0 * c[2]) / (4.0 * 3 * (n + 3));
    return c;
}

OdeState series_eval(int n, const std::array<double, 4>& c, double r) {
    const double r2 = r * r;
    const double poly = c[0] + r2 * (c[1] + r2 * (c[2] + r2 * c[3]));
    const double dpoly = 2 * c[1] + r2 * (4 * c[2] + r2 * 6 * c[3]);
    const double rn = std::pow(r, n);
    return {rn * poly, n * rn / r * poly + rn * r * dpoly};
}

} // namespace

HomogeneousSolutions homogeneous_solutions(int n,
                                           std::shared_ptr<const RadialGrid> grid) {
    if (n < 2) throw Error("homogeneous_solutions: mode must be >= 2");
    if (!grid) grid = RadialGrid::default_grid();
    const std::vector<double>& r = grid->nodes();
    const std::size_t m = r.size();
    const double r_series = 0.05;

    HomogeneousSolutions out;
    out.n = n;
    out.grid = grid;
    out.psi_minus.assign(m, 0.0);
    out.psi_plus.assign(m, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> dminus(m, 0.0), dplus(m, 0.0);

    const auto coeffs = frobenius_coeffs(n);

    // psi_minus: series inside r_series, outward march beyond.
    std::size_t k_start = 0;
    for (std::size_t k = 0; k < m; ++k) {
        if (r[k] <= r_series || k == 0) {
            if (r[k] > 0.0) {
                const OdeState s = series_eval(n, coeffs, r[k]);
                out.psi_minus[k] = s.y;
                dminus[k] = s.yp;
            }
            k_start = k;
        }
    }
    OdeState s = r[k_start] > 0.0 ? OdeState{out.psi_minus[k_start], dminus[k_start]}
                                  : series_eval(n, coeffs, r_series);
    double r_cur = r[k_start] > 0.0 ? r[k_start] : r_series;
    for (std::size_t k = k_start + 1; k < m; ++k) {
        s = rk4_march(n, r_cur, r[k], s, 5e-4, false);
        r_cur = r[k];
        out.psi_minus[k] = s.y;
        dminus[k] = s.yp;
    }

    // psi_plus: inward march from the pure power at r_max (the h-induced
    // correction there is below e^{-r_max^2/4}).
    OdeState p{std::pow(r.back(), -n), -n * std::pow(r.back(), -n - 1)};
    out.psi_plus[m - 1] = p.y;
    dplus[m - 1] = p.yp;
    for (std::size_t k = m - 1; k-- > 1;) {
        p = rk4_march(n, r[k + 1], r[k], p, 5e-4, true);
        out.psi_plus[k] = p.y;
        dplus[k] = p.yp;
    }

    // r W(r) must be flat; its value gives w0.
    std::vector<double> rw;
    for (std::size_t k = 0; k < m; ++k) {
        if (r[k] < 0.1) continue;
        rw.push_back(r[k] * (out.psi_plus[k] * dminus[k] - out.psi_minus[k] * dplus[k]));
    }
    std::vector<double> sorted = rw;
    std::sort(sorted.begin(), sorted.end());
    out.w0 = sorted[sorted.size() / 2];
    double flat = 0.0;
    for (double v : rw) flat = std::max(flat, std::abs(v - out.w0));
    out.w0_flatness = flat / std::abs(out.w0);
    if (out.w0_flatness > 1e-6)
        throw Error("homogeneous_solutions: Wronskian not constant, relative spread " +
                    std::to_string(out.w0_flatness));

    // kappa_minus by least squares against {r^n, r^{-n}} in the far field,
    // where the h-induced corrections are Gaussian-small; the outward march
    // picks up a decaying-branch admixture that a single-point read misses.
    {
        double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
        for (std::size_t k = 0; k < m; ++k) {
            const double rk = r[k];
            if (rk < 10.0 || rk > 16.0) continue;
            const double p = std::pow(rk / 12.0, n), q = std::pow(rk / 12.0, -n);
            a11 += p * p;
            a12 += p * q;
            a22 += q * q;
            b1 += p * out.psi_minus[k];
            b2 += q * out.psi_minus[k];
        }
        const double det = a11 * a22 - a12 * a12;
        const double coef = (a22 * b1 - a12 * b2) / det;
        out.kappa_minus = coef / std::pow(12.0, n);
    }
    // kappa_plus by least squares of psi_plus r^n against even powers near 0.
    {
        std::vector<std::size_t> idx;
        for (std::size_t k = 1; k < m; ++k)
            if (r[k] >= r[1] && r[k] <= 0.4) idx.push_back(k);
        Eigen::MatrixXd a(idx.size(), 4);
        Eigen::VectorXd b(idx.size());
        for (std::size_t q = 0; q < idx.size(); ++q) {
            const double rr = r[idx[q]], r2 = rr * rr;
            a(q, 0) = 1.0;
            a(q, 1) = r2;
            a(q, 2) = r2 * r2;
            a(q, 3) = r2 * r2 * r2;
            b(q) = out.psi_plus[idx[q]] * std::pow(rr, n);
        }
        Eigen::Vector4d sol = (a.transpose() * a).ldlt().solve(a.transpose() * b);
        out.kappa_plus = sol(0);
    }
    return out;
}

namespace {
const HomogeneousSolutions& cached_homogeneous(int n,
                                               std::shared_ptr<const RadialGrid> grid) {
    static std::mutex mu;
    static std::map<std::pair<int, const RadialGrid*>,
                    std::unique_ptr<HomogeneousSolutions>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, grid.get());
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto sol = std::make_unique<HomogeneousSolutions>(homogeneous_solutions(n, grid));
        it = cache.emplace(key, std::move(sol)).first;
    }
    return *it->second;
}
} // namespace

BvpSolution solve_omega_bvp(int n, const RadialProfile& a) {
    return solve_omega_bvp(n, a, cached_homogeneous(n, a.grid_ptr()));
}

BvpSolution solve_omega_bvp(int n, const RadialProfile& a,
                            const HomogeneousSolutions& hom) {
    if (n < 2) throw Error("solve_omega_bvp: mode must be >= 2");
    const RadialGrid& grid = a.grid();
    if (hom.grid.get() != &grid) throw Error("solve_omega_bvp: grid mismatch");
    const std::vector<double>& r = grid.nodes();
    const std::size_t m = r.size();

    std::vector<double> atil(m, 0.0), fi(m, 0.0), fj(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const double phi = kernels::phi_h_profiles(r[k]).phi;
        atil[k] = a.values()[k] / (double(n) * phi);
        if (k > 0) {
            fi[k] = r[k] * hom.psi_minus[k] * atil[k] / hom.w0;
            fj[k] = r[k] * hom.psi_plus[k] * atil[k] / hom.w0;
        }
    }
    const std::vector<double> ci = cum_integral(grid, fi);
    const std::vector<double> cj = cum_integral(grid, fj);
    const double cj_total = cj.back();

    std::vector<double> omega_big(m, 0.0), omega(m, 0.0);
    for (std::size_t k = 1; k < m; ++k)
        omega_big[k] = hom.psi_plus[k] * ci[k] + hom.psi_minus[k] * (cj_total - cj[k]);
    for (std::size_t k = 0; k < m; ++k)
        omega[k] = h_profile(r[k]) * omega_big[k] + atil[k];

    BvpSolution out;
    out.stream = RadialProfile(a.grid_ptr(), std::move(omega_big));
    out.vorticity = RadialProfile(a.grid_ptr(), std::move(omega));
    return out;
}

std::vector<double> stream_mode_solve(int n, const RadialGrid& grid,
                                      const std::vector<double>& f) {
    if (n < 1) throw Error("stream_mode_solve: mode must be >= 1");
    const std::vector<double>& r = grid.nodes();
    const std::size_t m = r.size();
    std::vector<double> gi(m, 0.0), gj(m, 0.0);
    for (std::size_t k = 1; k < m; ++k) {
        gi[k] = std::pow(r[k], n + 1) * f[k] / (2.0 * n);
        gj[k] = std::pow(r[k], 1 - n) * f[k] / (2.0 * n);
    }
    if (n == 1) gj[0] = f[0] / 2.0;
    const std::vector<double> ci = cum_integral(grid, gi);
    const std::vector<double> cj = cum_integral(grid, gj);
    std::vector<double> s(m, 0.0);
    for (std::size_t k = 1; k < m; ++k)
        s[k] = std::pow(r[k], -n) * ci[k] + std::pow(r[k], n) * (cj.back() - cj[k]);
    return s;
}

namespace {
// Stream profile plus derivative: S' = -n r^{-n-1} C1 + n r^{n-1} C2.
struct StreamSol {
    std::vector<double> s, sp;
};
StreamSol stream_mode_solve_d(int n, const RadialGrid& grid,
                              const std::vector<double>& f) {
    const std::vector<double>& r = grid.nodes();
    const std::size_t m = r.size();
    std::vector<double> gi(m, 0.0), gj(m, 0.0);
    for (std::size_t k = 1; k < m; ++k) {
        gi[k] = std::pow(r[k], n + 1) * f[k] / (2.0 * n);
        gj[k] = std::pow(r[k], 1 - n) * f[k] / (2.0 * n);
    }
    if (n == 1) gj[0] = f[0] / 2.0;
    const std::vector<double> ci = cum_integral(grid, gi);
    const std::vector<double> cj = cum_integral(grid, gj);
    StreamSol out;
    out.s.assign(m, 0.0);
    out.sp.assign(m, 0.0);
    for (std::size_t k = 1; k < m; ++k) {
        const double rmn = std::pow(r[k], -n), rn = std::pow(r[k], n);
        out.s[k] = rmn * ci[k] + rn * (cj.back() - cj[k]);
        out.sp[k] = -n * rmn / r[k] * ci[k] + n * rn / r[k] * (cj.back() - cj[k]);
    }
    return out;
}
} // namespace

AzimuthalMode apply_lambda(const AzimuthalMode& w) {
    const int n = w.n;
    auto grid = w.cos_coeff.grid_ptr();
    if (n == 0) return AzimuthalMode::zero(0, grid);

    const std::vector<double> sc = stream_mode_solve(n, *grid, w.cos_coeff.values());
    const std::vector<double> ss = stream_mode_solve(n, *grid, w.sin_coeff.values());
    const std::vector<double>& r = grid->nodes();
    std::vector<double> oc(r.size()), os(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double phi = kernels::phi_h_profiles(r[k]).phi;
        const double g = kernels::gauss_profile(r[k]);
        oc[k] = n * phi * w.sin_coeff.values()[k] - 0.5 * n * g * ss[k];
        os[k] = -n * phi * w.cos_coeff.values()[k] + 0.5 * n * g * sc[k];
    }
    AzimuthalMode out;
    out.n = n;
    out.cos_coeff = RadialProfile(grid, std::move(oc));
    out.sin_coeff = RadialProfile(grid, std::move(os));
    return out;
}

ModeOperator::ModeOperator(int n, std::shared_ptr<const RadialGrid> grid)
    : n_(n), grid_(std::move(grid)) {
    if (n_ < 1) throw Error("ModeOperator: mode must be >= 1");
    const std::vector<double>& r = grid_->nodes();
    const std::vector<double>& mu = grid_->trapezoid_weights();
    const std::size_t M = r.size();
    m_ = M - 2; // interior nodes; Dirichlet at r = 0 and r = r_max

    sqrt_rho_.resize(m_);
    gauss_half_.resize(m_);
    for (std::size_t k = 0; k < m_; ++k) {
        const double rk = r[k + 1];
        sqrt_rho_[k] = std::sqrt(rk * mu[k + 1]);
        gauss_half_[k] = std::exp(-rk * rk / 8.0);
    }

    // 1 + Shat with Shat = -(conjugated L) discretized conservatively:
    // row_k = -(1/rho_k)[r_{k+1/2}(u_{k+1}-u_k)/h_k - r_{k-1/2}(u_k-u_{k-1})/h_{k-1}]
    //         + (n^2/r^2 + r^2/16 - 1/2) u_k,   rho_k = r_k mu_k.
    shat_diag_.assign(m_, 0.0);
    shat_off_.assign(m_ - 1, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
        const std::size_t g = k + 1; // grid index
        const double rk = r[g];
        const double hl = r[g] - r[g - 1], hr = r[g + 1] - r[g];
        const double rl = 0.5 * (r[g] + r[g - 1]), rr = 0.5 * (r[g] + r[g + 1]);
        const double rho = rk * mu[g];
        shat_diag_[k] = 1.0 + (rr / hr + rl / hl) / rho + double(n_) * n_ / (rk * rk) +
                        rk * rk / 16.0 - 0.5;
        if (k + 1 < m_) shat_off_[k] = -rr / (hr * std::sqrt(rho * (r[g + 1] * mu[g + 1])));
    }

    // Advection matrix in the same frame. Nothing differentiates here: the
    // angular derivative became the factor n and the stream inversion is the
    // exact power-law kernel, so the entries are
    //   sqrt(rho_k) e^{rk^2/8} [n phi_k delta_kl - (n/2) g_k B_kl]
    //   e^{-rl^2/8} / sqrt(rho_l),
    // with B the quadrature of the stream kernel. Symmetrize afterwards to
    // kill last-ulp asymmetry.
    that_.assign(m_ * m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
        const double rk = r[k + 1];
        const double gk = kernels::gauss_profile(rk);
        for (std::size_t l = 0; l < m_; ++l) {
            const double rl = r[l + 1];
            const double ratio = std::pow(std::min(rk, rl) / std::max(rk, rl), n_);
            const double kernel = mu[l + 1] * rl / (2.0 * n_) * ratio;
            that_[k * m_ + l] = -0.5 * n_ * gk * kernel * (sqrt_rho_[k] / sqrt_rho_[l]) *
                                std::exp((rk * rk - rl * rl) / 8.0);
        }
        that_[k * m_ + k] += n_ * kernels::phi_h_profiles(rk).phi;
    }
    for (std::size_t k = 0; k < m_; ++k)
        for (std::size_t l = k + 1; l < m_; ++l) {
            const double sym = 0.5 * (that_[k * m_ + l] + that_[l * m_ + k]);
            that_[k * m_ + l] = sym;
            that_[l * m_ + k] = sym;
        }
}

std::vector<complexd> ModeOperator::to_frame(const AzimuthalMode& z) const {
    std::vector<complexd> out(m_);
    for (std::size_t k = 0; k < m_; ++k) {
        const double c = z.cos_coeff.values()[k + 1];
        const double s = z.sin_coeff.empty() ? 0.0 : z.sin_coeff.values()[k + 1];
        out[k] = complexd(c, s) * (sqrt_rho_[k] / gauss_half_[k]);
    }
    return out;
}

AzimuthalMode ModeOperator::from_frame(const std::vector<complexd>& x) const {
    std::vector<double> c(grid_->size(), 0.0), s(grid_->size(), 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
        const complexd w = x[k] * (gauss_half_[k] / sqrt_rho_[k]);
        c[k + 1] = w.real();
        s[k + 1] = w.imag();
    }
    AzimuthalMode out;
    out.n = n_;
    out.cos_coeff = RadialProfile(grid_, std::move(c));
    out.sin_coeff = RadialProfile(grid_, std::move(s));
    return out;
}

AzimuthalMode ModeOperator::solve_regularized(double eps, const AzimuthalMode& z) const {
    if (eps == 0.0) throw Error("solve_regularized: eps must be nonzero");
    if (z.n != n_) throw Error("solve_regularized: mode mismatch");
    Eigen::MatrixXcd a(m_, m_);
    for (std::size_t k = 0; k < m_; ++k)
        for (std::size_t l = 0; l < m_; ++l)
            a(k, l) = complexd(0.0, -that_[k * m_ + l]);
    for (std::size_t k = 0; k < m_; ++k) {
        a(k, k) += eps * shat_diag_[k];
        if (k + 1 < m_) {
            a(k, k + 1) += eps * shat_off_[k];
            a(k + 1, k) += eps * shat_off_[k];
        }
    }
    const std::vector<complexd> zf = to_frame(z);
    Eigen::VectorXcd b(m_);
    for (std::size_t k = 0; k < m_; ++k) b(k) = zf[k];
    Eigen::VectorXcd x = a.partialPivLu().solve(b);
    std::vector<complexd> xs(m_);
    for (std::size_t k = 0; k < m_; ++k) xs[k] = x(k);
    return from_frame(xs);
}

AzimuthalMode ModeOperator::solve_lambda(const AzimuthalMode& z) const {
    if (n_ < 2)
        throw Error("solve_lambda: advection matrix is singular for n < 2");
    if (z.n != n_) throw Error("solve_lambda: mode mismatch");
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        that(that_.data(), m_, m_);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(that);
    const std::vector<complexd> zf = to_frame(z);
    Eigen::VectorXd re(m_), im(m_);
    for (std::size_t k = 0; k < m_; ++k) {
        re(k) = zf[k].real();
        im(k) = zf[k].imag();
    }
    // -i That x = z  =>  x = i That^{-1} z
    Eigen::VectorXd yr = lu.solve(re), yi = lu.solve(im);
    std::vector<complexd> xs(m_);
    for (std::size_t k = 0; k < m_; ++k) xs[k] = complexd(-yi(k), yr(k));
    return from_frame(xs);
}

AzimuthalMode ModeOperator::apply(const AzimuthalMode& w) const {
    if (w.n != n_) throw Error("ModeOperator::apply: mode mismatch");
    const std::vector<complexd> wf = to_frame(w);
    std::vector<complexd> out(m_, complexd(0.0, 0.0));
    for (std::size_t k = 0; k < m_; ++k) {
        complexd acc(0.0, 0.0);
        for (std::size_t l = 0; l < m_; ++l) acc += that_[k * m_ + l] * wf[l];
        out[k] = complexd(0.0, -1.0) * acc;
    }
    return from_frame(out);
}

double ModeOperator::skew_defect(const AzimuthalMode& u) const {
    const std::vector<complexd> x = to_frame(u);
    complexd quad(0.0, 0.0);
    double nrm = 0.0;
    for (std::size_t k = 0; k < m_; ++k) {
        complexd acc(0.0, 0.0);
        for (std::size_t l = 0; l < m_; ++l) acc += that_[k * m_ + l] * x[l];
        quad += std::conj(x[k]) * complexd(0.0, -1.0) * acc;
        nrm += std::norm(x[k]);
    }
    // <Lambda u, u>_Y = pi Re(quad); exact skewness makes it vanish.
    return nrm > 0.0 ? std::abs(quad.real()) / nrm : 0.0;
}

double ModeOperator::condition_estimate(double eps) const {
    Eigen::MatrixXcd a(m_, m_);
    for (std::size_t k = 0; k < m_; ++k)
        for (std::size_t l = 0; l < m_; ++l)
            a(k, l) = complexd(0.0, -that_[k * m_ + l]);
    for (std::size_t k = 0; k < m_; ++k) {
        a(k, k) += eps * shat_diag_[k];
        if (k + 1 < m_) {
            a(k, k + 1) += eps * shat_off_[k];
            a(k + 1, k) += eps * shat_off_[k];
        }
    }
    double norm1 = 0.0;
    for (std::size_t l = 0; l < m_; ++l) {
        double col = 0.0;
        for (std::size_t k = 0; k < m_; ++k) col += std::abs(a(k, l));
        norm1 = std::max(norm1, col);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    std::mt19937 rng(12345);
    std::normal_distribution<double> nd;
    double inv_est = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        Eigen::VectorXcd b(m_);
        double b1 = 0.0;
        for (std::size_t k = 0; k < m_; ++k) {
            b(k) = complexd(nd(rng), nd(rng));
            b1 += std::abs(b(k));
        }
        Eigen::VectorXcd x = lu.solve(b);
        double x1 = 0.0;
        for (std::size_t k = 0; k < m_; ++k) x1 += std::abs(x(k));
        inv_est = std::max(inv_est, x1 / b1);
    }
    return norm1 * inv_est;
}

double ModeOperator::y_norm(const AzimuthalMode& w) const {
    const std::vector<complexd> x = to_frame(w);
    double acc = 0.0;
    for (const complexd& v : x) acc += std::norm(v);
    return std::sqrt(M_PI * acc);
}

namespace {

complexd pair_sum(const point_vortex::Trajectory& traj, std::size_t i, double t,
                  int n) {
    complexd acc(0.0, 0.0);
    for (std::size_t j = 0; j < traj.n_vortices(); ++j) {
        if (j == i) continue;
        const Vec2 z = traj.separation(i, j, t);
        const double znorm = z.norm();
        const double kappa = traj.circulations[j] / traj.circulations[i];
        acc += kappa * std::exp(complexd(0.0, n * z.arg())) / std::pow(znorm, n);
    }
    return acc;
}

// Base data for the regularized deformation solve: the radial shape r^2 g is
// time independent; the pair geometry only scales it by a complex factor.
struct ViscousBase {
    AzimuthalMode w;            // solve of [eps(1-L) + Lambda] w = r^2 g * (unit data)
    std::vector<double> wc, ws; // node values
    std::vector<double> wcp, wsp; // spline derivatives at nodes
    StreamSol stream_c, stream_s;
};

ViscousBase viscous_base(const ModeOperator& op, double eps) {
    auto gp = operator_grid();
    RadialProfile rho = RadialProfile::sample(
        gp, [](double r) { return r * r * kernels::gauss_profile(r); });
    AzimuthalMode z;
    z.n = 2;
    z.cos_coeff = rho;
    z.sin_coeff = RadialProfile(gp, std::vector<double>(gp->size(), 0.0));
    ViscousBase base;
    base.w = op.solve_regularized(eps, z);
    const std::size_t m = gp->size();
    base.wc = base.w.cos_coeff.values();
    base.ws = base.w.sin_coeff.values();
    base.wcp.resize(m);
    base.wsp.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double r = gp->nodes()[k];
        base.wcp[k] = base.w.cos_coeff.derivative(r);
        base.wsp[k] = base.w.sin_coeff.derivative(r);
    }
    base.stream_c = stream_mode_solve_d(2, *gp, base.wc);
    base.stream_s = stream_mode_solve_d(2, *gp, base.ws);
    return base;
}

// P0 of (V^F + D) . grad F on the grid nodes, for the deformation profile
// F = gamma * base and the strain with complex pair coefficient sigma.
std::vector<double> p0_product_source(const RadialGrid& grid, const ViscousBase& base,
                                      complexd sigma, double d) {
    constexpr std::size_t n_ang = 64;
    static const auto tables = [] {
        std::array<std::array<double, n_ang>, 2> t{};
        for (std::size_t q = 0; q < n_ang; ++q) {
            const double th = 2.0 * M_PI * double(q) / double(n_ang);
            t[0][q] = std::cos(2.0 * th);
            t[1][q] = std::sin(2.0 * th);
        }
        return t;
    }();
    const auto& c2t = tables[0];
    const auto& s2t = tables[1];

    const complexd gamma = complexd(0.0, -1.0) * (d * d / (4.0 * M_PI)) * sigma;
    const double dcoef = -d * d / (2.0 * M_PI);
    const std::vector<double>& r = grid.nodes();
    std::vector<double> q0(r.size(), 0.0);
    for (std::size_t k = 1; k < r.size(); ++k) {
        const double rk = r[k];
        const double fc = gamma.real() * base.wc[k] - gamma.imag() * base.ws[k];
        const double fs = gamma.real() * base.ws[k] + gamma.imag() * base.wc[k];
        const double fcp = gamma.real() * base.wcp[k] - gamma.imag() * base.wsp[k];
        const double fsp = gamma.real() * base.wsp[k] + gamma.imag() * base.wcp[k];
        const double sc = gamma.real() * base.stream_c.s[k] - gamma.imag() * base.stream_s.s[k];
        const double ss = gamma.real() * base.stream_s.s[k] + gamma.imag() * base.stream_c.s[k];
        const double scp = gamma.real() * base.stream_c.sp[k] - gamma.imag() * base.stream_s.sp[k];
        const double ssp = gamma.real() * base.stream_s.sp[k] + gamma.imag() * base.stream_c.sp[k];
        double acc = 0.0;
        for (std::size_t q = 0; q < n_ang; ++q) {
            const double fr = fcp * c2t[q] + fsp * s2t[q];
            const double ft = 2.0 / rk * (-fc * s2t[q] + fs * c2t[q]);
            const double vr = 2.0 / rk * (-sc * s2t[q] + ss * c2t[q]);
            const double vt = -(scp * c2t[q] + ssp * s2t[q]);
            const double dr = dcoef * rk * (s2t[q] * sigma.real() - c2t[q] * sigma.imag());
            const double dt = dcoef * rk * (c2t[q] * sigma.real() + s2t[q] * sigma.imag());
            acc += (vr + dr) * fr + (vt + dt) * ft;
        }
        q0[k] = acc / double(n_ang);
    }
    return q0;
}

} // namespace

RadialProfile radial_source_p0(const point_vortex::Trajectory& traj, std::size_t i,
                               double nu, double t) {
    auto grid = operator_grid();
    if (traj.n_vortices() == 1)
        return RadialProfile(grid, std::vector<double>(grid->size(), 0.0));
    const ModeOperator op2(2, grid);
    const ViscousBase base = viscous_base(op2, nu / traj.circulations[i]);
    const complexd sigma = pair_sum(traj, i, t, 2);
    return RadialProfile(grid,
                         p0_product_source(*grid, base, sigma, traj.min_separation));
}

std::vector<AzimuthalMode> evolve_fbar(const point_vortex::Trajectory& traj,
                                       std::size_t i, double nu,
                                       const std::vector<double>& times,
                                       const FbarOptions& opt, double* mass_drift) {
    auto grid = operator_grid();
    const std::vector<double>& r = grid->nodes();
    const std::vector<double>& mu = grid->trapezoid_weights();
    const std::size_t M = r.size();
    const double alpha_i = traj.circulations[i];
    const double d = traj.min_separation;

    for (std::size_t q = 0; q + 1 < times.size(); ++q)
        if (times[q + 1] <= times[q]) throw Error("evolve_fbar: times not increasing");
    if (times.empty()) throw Error("evolve_fbar: no output times");
    if (times.front() <= 0.0) throw Error("evolve_fbar: times must be positive");

    if (traj.n_vortices() == 1) {
        if (mass_drift) *mass_drift = 0.0;
        std::vector<AzimuthalMode> out;
        for (std::size_t q = 0; q < times.size(); ++q)
            out.push_back(AzimuthalMode::zero(0, grid));
        return out;
    }

    // Radial correction sources need the regularized deformation; one dense
    // solve serves the whole history (scaled per time by the pair geometry).
    const ModeOperator op2(2, grid);
    const ViscousBase base = viscous_base(op2, nu / alpha_i);

    // Hatted frame: u = e^{r^2/8} fbar; implicit Euler rows for
    // (1 + dtau (1 + Shat0)) u_new = u_old + dtau * source_hat.
    std::vector<double> rho(M - 1);
    for (std::size_t k = 0; k + 1 < M; ++k)
        rho[k] = k == 0 ? (r[1] - r[0]) * (r[1] - r[0]) / 8.0 : r[k] * mu[k];

    const std::size_t unknowns = M - 1; // Dirichlet at r_max only
    auto build_step = [&](double dtau, std::vector<double>& lo, std::vector<double>& di,
                          std::vector<double>& up) {
        lo.assign(unknowns, 0.0);
        di.assign(unknowns, 0.0);
        up.assign(unknowns, 0.0);
        for (std::size_t k = 0; k < unknowns; ++k) {
            const double rk = r[k];
            double diag = rk * rk / 16.0 - 0.5;
            double offl = 0.0, offr = 0.0;
            if (k + 1 < M) {
                const double hr = r[k + 1] - r[k];
                const double rr = 0.5 * (r[k + 1] + r[k]);
                diag += (rr / hr) / rho[k];
                offr = -(rr / hr) / rho[k];
            }
            if (k > 0) {
                const double hl = r[k] - r[k - 1];
                const double rl = 0.5 * (r[k] + r[k - 1]);
                diag += (rl / hl) / rho[k];
                offl = -(rl / hl) / rho[k];
            }
            di[k] = 1.0 + dtau * (1.0 + diag);
            lo[k] = dtau * offl;
            up[k] = k + 1 < unknowns ? dtau * offr : 0.0;
        }
    };

    std::vector<double> u(unknowns, 0.0); // hatted fbar
    double worst_mass = 0.0;

    auto take_substep = [&](std::vector<double> state, double tau_new,
                            double dtau) -> std::vector<double> {
        std::vector<double> lo, di, up;
        build_step(dtau, lo, di, up);
        const double s_time = std::exp(tau_new);
        const complexd sigma = pair_sum(traj, i, s_time, 2);
        const std::vector<double> q0 = p0_product_source(*grid, base, sigma, d);
        const double pre = -alpha_i * s_time / (d * d);
        std::vector<double> rhs(unknowns);
        for (std::size_t k = 0; k < unknowns; ++k)
            rhs[k] = state[k] + dtau * pre * q0[k] * std::exp(r[k] * r[k] / 8.0);
        return solve_tridiagonal(lo, di, up, rhs);
    };

    std::vector<AzimuthalMode> out;
    double tau = std::log(opt.start_fraction * times.front());
    std::size_t next = 0;
    while (next < times.size()) {
        const double tau_target = std::log(times[next]);
        double dtau = std::min(opt.dtau, tau_target - tau);
        if (dtau > 1e-14) {
            // one full step vs two half steps, Richardson-combined
            std::vector<double> full = take_substep(u, tau + dtau, dtau);
            std::vector<double> half = take_substep(u, tau + dtau / 2, dtau / 2);
            half = take_substep(half, tau + dtau, dtau / 2);
            for (std::size_t k = 0; k < unknowns; ++k) u[k] = 2.0 * half[k] - full[k];
            tau += dtau;

            // enforce zero mass: the continuum operator and the projected
            // divergence source both preserve it
            double mass = 0.0;
            for (std::size_t k = 0; k < unknowns; ++k)
                mass += mu[k] * r[k] * u[k] * std::exp(-r[k] * r[k] / 8.0);
            mass *= 2.0 * M_PI;
            worst_mass = std::max(worst_mass, std::abs(mass));
            for (std::size_t k = 0; k < unknowns; ++k)
                u[k] -= mass * kernels::gauss_profile(r[k]) * std::exp(r[k] * r[k] / 8.0);
        }
        if (tau >= tau_target - 1e-14) {
            std::vector<double> fb(M, 0.0);
            for (std::size_t k = 0; k < unknowns; ++k)
                fb[k] = u[k] * std::exp(-r[k] * r[k] / 8.0);
            AzimuthalMode mode;
            mode.n = 0;
            mode.cos_coeff = RadialProfile(grid, std::move(fb));
            mode.sin_coeff = RadialProfile(grid, std::vector<double>(M, 0.0));
            out.push_back(std::move(mode));
            ++next;
        }
    }
    if (mass_drift) *mass_drift = worst_mass;
    return out;
}

std::vector<DeformationProfiles> build_deformation_series(
    const point_vortex::Trajectory& traj, std::size_t i,
    const std::vector<double>& times, double nu, const FbarOptions& opt) {
    if (i >= traj.n_vortices()) throw Error("build_deformation: index out of range");
    auto grid = operator_grid();
    const double alpha_i = traj.circulations[i];
    const double d = traj.min_separation;

    std::vector<DeformationProfiles> out;

    if (traj.n_vortices() == 1) {
        for (double t : times) {
            DeformationProfiles p;
            p.vortex = i;
            p.time = t;
            p.nu = nu;
            p.alpha = alpha_i;
            p.d = d;
            p.f_zero = AzimuthalMode::zero(2, grid);
            p.f_visc = AzimuthalMode::zero(2, grid);
            p.f_bar = AzimuthalMode::zero(0, grid);
            p.h.push_back(AzimuthalMode::zero(1, grid));
            p.h.push_back(AzimuthalMode::zero(3, grid));
            out.push_back(std::move(p));
        }
        return out;
    }

    const RadialProfile r2g = RadialProfile::sample(
        grid, [](double r) { return r * r * kernels::gauss_profile(r); });
    const RadialProfile r3g = RadialProfile::sample(
        grid, [](double r) { return r * r * r * kernels::gauss_profile(r); });
    const RadialProfile omega2 = solve_omega_bvp(2, r2g).vorticity;
    const RadialProfile omega3 = solve_omega_bvp(3, r3g).vorticity;

    const ModeOperator op2(2, grid);
    const ViscousBase base = viscous_base(op2, nu / alpha_i);

    double mass_drift = 0.0;
    std::vector<AzimuthalMode> fbars = evolve_fbar(traj, i, nu, times, opt, &mass_drift);

    for (std::size_t q = 0; q < times.size(); ++q) {
        const double t = times[q];
        DeformationProfiles p;
        p.vortex = i;
        p.time = t;
        p.nu = nu;
        p.alpha = alpha_i;
        p.d = d;

        const complexd sigma2 = pair_sum(traj, i, t, 2);
        const complexd sigma3 = pair_sum(traj, i, t, 3);
        const complexd gamma = complexd(0.0, -1.0) * (d * d / (4.0 * M_PI)) * sigma2;

        // f_zero = (d^2/4pi) omega2 * Re/Im(sigma2) phases
        {
            RadialProfile c = omega2, s = omega2;
            c *= d * d / (4.0 * M_PI) * sigma2.real();
            s *= d * d / (4.0 * M_PI) * sigma2.imag();
            p.f_zero.n = 2;
            p.f_zero.cos_coeff = std::move(c);
            p.f_zero.sin_coeff = std::move(s);
        }
        // f_visc = gamma-scaled base solve
        {
            std::vector<double> c(grid->size()), s(grid->size());
            for (std::size_t k = 0; k < grid->size(); ++k) {
                c[k] = gamma.real() * base.wc[k] - gamma.imag() * base.ws[k];
                s[k] = gamma.real() * base.ws[k] + gamma.imag() * base.wc[k];
            }
            p.f_visc.n = 2;
            p.f_visc.cos_coeff = RadialProfile(grid, std::move(c));
            p.f_visc.sin_coeff = RadialProfile(grid, std::move(s));
        }
        // h: zero n = 1 slot plus the n = 3 profile
        p.h.push_back(AzimuthalMode::zero(1, grid));
        {
            RadialProfile c = omega3, s = omega3;
            c *= -std::pow(d, 3) / (4.0 * M_PI) * sigma3.real();
            s *= -std::pow(d, 3) / (4.0 * M_PI) * sigma3.imag();
            AzimuthalMode h3;
            h3.n = 3;
            h3.cos_coeff = std::move(c);
            h3.sin_coeff = std::move(s);
            p.h.push_back(std::move(h3));
        }
        p.f_bar = fbars[q];
        p.mass_drift = mass_drift;

        AzimuthalMode diff = p.f_visc;
        for (std::size_t k = 0; k < grid->size(); ++k) {
            diff.cos_coeff.values()[k] -= p.f_zero.cos_coeff.values()[k];
            diff.sin_coeff.values()[k] -= p.f_zero.sin_coeff.values()[k];
        }
        p.f_visc_deviation = diff.y_norm();
        out.push_back(std::move(p));
    }
    return out;
}

DeformationProfiles build_deformation(const point_vortex::Trajectory& traj,
                                      std::size_t i, double t, double nu,
                                      const FbarOptions& opt) {
    return build_deformation_series(traj, i, {t}, nu, opt).front();
}

ApproximateProfile::ApproximateProfile(DeformationProfiles profiles,
                                       double nu_t_over_d2, WappOrder order)
    : p_(std::move(profiles)), s_(nu_t_over_d2), order_(order) {
    if (s_ < 0.0) throw Error("assemble_wapp: nu t / d^2 must be >= 0");
}

double ApproximateProfile::eval_polar(double r, double theta) const {
    const double base = kernels::gauss_profile(r);
    if (s_ == 0.0) return base;
    if (r > p_.f_visc.cos_coeff.grid().r_max()) {
        ++clamp_count_;
        return base;
    }
    double corr = p_.f_bar.cos_coeff(r) + p_.f_visc.eval(r, theta);
    double out = base + s_ * corr;
    if (order_ == WappOrder::three_halves) {
        double hsum = 0.0;
        for (const AzimuthalMode& m : p_.h) hsum += m.eval(r, theta);
        out += std::pow(s_, 1.5) * hsum;
    }
    return out;
}

double ApproximateProfile::operator()(Vec2 xi) const {
    return eval_polar(xi.norm(), xi.arg());
}

ScalarPolarField ApproximateProfile::sample(const PolarGrid& grid) const {
    ScalarPolarField f(grid);
    f.fill([this](double r, double theta) { return eval_polar(r, theta); });
    return f;
}

ApproximateProfile assemble_wapp(DeformationProfiles profiles, double nu_t_over_d2,
                                 WappOrder order) {
    return ApproximateProfile(std::move(profiles), nu_t_over_d2, order);
}

void write_profiles_csv(const DeformationProfiles& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_profiles_csv: cannot open " + path);
    out.precision(16);
    out << "r,mode_n,cos_coeff,sin_coeff,profile\n";
    auto dump = [&](const AzimuthalMode& m, const char* tag) {
        const RadialGrid& grid = m.cos_coeff.grid();
        for (std::size_t k = 0; k < grid.size(); ++k)
            out << grid[k] << ',' << m.n << ',' << m.cos_coeff.values()[k] << ','
                << (m.sin_coeff.empty() ? 0.0 : m.sin_coeff.values()[k]) << ',' << tag
                << '\n';
    };
    dump(p.f_bar, "f_bar");
    dump(p.f_visc, "f_visc");
    for (const AzimuthalMode& m : p.h) dump(m, "h");
    dump(p.f_zero, "f_zero");
}

} // namespace profile_solver
} // namespace vortexlab
