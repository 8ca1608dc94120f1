#include "vortexlab/expansion.hpp"

#include <cmath>

#include "vortexlab/kernels.hpp"
#include "vortexlab/numerics.hpp"

namespace vortexlab {
namespace expansion {

double velocity_difference_series(Vec2 xi, Vec2 eta, int terms) {
    const double rxi = xi.norm(), reta = eta.norm();
    if (rxi >= reta)
        throw Error("velocity_difference_series: requires |xi| < |eta|");
    if (rxi == 0.0) return 0.0;
    const double q = rxi / reta;
    const double psi = xi.arg() - eta.arg();
    double sum = 0.0;
    double qn = q; // q^1
    for (int n = 2; n <= terms + 1; ++n) {
        qn *= q;
        const double sign = (n % 2 == 0) ? -1.0 : 1.0; // (-1)^{n-1}
        sum += sign * qn * std::sin(n * psi);
    }
    return sum;
}

V1V2 v1_v2_split(Vec2 xi, Vec2 eta) {
    const Vec2 sum = xi + eta;
    const double ssq = sum.norm_sq(), esq = eta.norm_sq();
    if (ssq == 0.0 || esq == 0.0)
        throw Error("v1_v2_split: singular point (xi + eta = 0 or eta = 0)");
    V1V2 out;
    out.v1 = sum.perp() / ssq - eta.perp() / esq;
    out.v2 = eta.perp() * (std::exp(-esq / 4.0) / esq) -
             sum.perp() * (std::exp(-ssq / 4.0) / ssq);
    return out;
}

double xi_dot_v1_exact(Vec2 xi, Vec2 eta) {
    return xi.dot(v1_v2_split(xi, eta).v1);
}

Vec2 w_field(Vec2 xi, Vec2 eta) {
    const Vec2 sum = xi + eta;
    const double ssq = sum.norm_sq(), esq = eta.norm_sq();
    if (ssq == 0.0 || esq == 0.0)
        throw Error("w_field: singular point");
    return sum.perp() / ssq - sum.perp() / esq +
           eta.perp() * (2.0 * xi.dot(eta) / (esq * esq));
}

namespace {

struct PairData {
    std::vector<Vec2> z;
    std::vector<double> kappa;
};

PairData pair_data(const point_vortex::Trajectory& traj, std::size_t i, double t) {
    const std::size_t n = traj.n_vortices();
    if (i >= n) throw Error("residuum: vortex index out of range");
    if (t < traj.times.front() - 1e-12 || t > traj.times.back() + 1e-12)
        throw Error("residuum: time outside trajectory span");
    PairData out;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        out.z.push_back(traj.separation(i, j, t));
        out.kappa.push_back(traj.circulations[j] / traj.circulations[i]);
    }
    return out;
}

} // namespace

double ExpansionTerms::eval_a(Vec2 xi) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < z_.size(); ++j) {
        const double zsq = z_[j].norm_sq();
        acc += kap_[j] * xi.dot(z_[j]) * xi.dot(z_[j].perp()) / (zsq * zsq);
    }
    return d_ * d_ / (2.0 * M_PI) * acc * kernels::gauss_profile(xi.norm());
}

double ExpansionTerms::eval_b(Vec2 xi) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < z_.size(); ++j) {
        const double zsq = z_[j].norm_sq();
        const double dot = xi.dot(z_[j]);
        acc += kap_[j] * xi.dot(z_[j].perp()) *
               (xi.norm_sq() * zsq - 4.0 * dot * dot) / (zsq * zsq * zsq);
    }
    return std::pow(d_, 3) / (4.0 * M_PI) * acc * kernels::gauss_profile(xi.norm());
}

double ExpansionTerms::eval_c(Vec2 xi) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < z_.size(); ++j) {
        const double zsq = z_[j].norm_sq();
        const double dot = xi.dot(z_[j]);
        acc += kap_[j] * dot * xi.dot(z_[j].perp()) *
               (2.0 * dot * dot - xi.norm_sq() * zsq) / (zsq * zsq * zsq * zsq);
    }
    return std::pow(d_, 4) / M_PI * acc * kernels::gauss_profile(xi.norm());
}

ExpansionTerms residuum_terms(const point_vortex::Trajectory& traj, std::size_t i,
                              double t, std::shared_ptr<const RadialGrid> grid) {
    if (!grid) grid = RadialGrid::default_grid();
    const PairData pd = pair_data(traj, i, t);
    const double d = traj.min_separation;

    ExpansionTerms terms;
    terms.vortex = i;
    terms.time = t;
    terms.z_ = pd.z;
    terms.kap_ = pd.kappa;
    terms.d_ = d;

    // sin(n(theta - theta_ij)) = cos(n theta_ij) sin(n theta)
    //                          - sin(n theta_ij) cos(n theta)
    double a_c = 0.0, a_s = 0.0, b_c = 0.0, b_s = 0.0, c_c = 0.0, c_s = 0.0;
    for (std::size_t j = 0; j < pd.z.size(); ++j) {
        const double znorm = pd.z[j].norm();
        const double th = pd.z[j].arg();
        const double amp2 = d * d / (4.0 * M_PI) * pd.kappa[j] / (znorm * znorm);
        const double amp3 = amp2 * d / znorm;
        const double amp4 = amp3 * d / znorm;
        a_c += amp2 * -std::sin(2.0 * th);
        a_s += amp2 * std::cos(2.0 * th);
        b_c -= amp3 * -std::sin(3.0 * th);
        b_s -= amp3 * std::cos(3.0 * th);
        c_c += amp4 * -std::sin(4.0 * th);
        c_s += amp4 * std::cos(4.0 * th);
    }

    auto shape = [&](int power) {
        return RadialProfile::sample(grid, [power](double r) {
            return std::pow(r, power) * kernels::gauss_profile(r);
        });
    };
    auto scaled_mode = [&](int n, const RadialProfile& base, double cc, double ss) {
        AzimuthalMode m;
        m.n = n;
        m.cos_coeff = base;
        m.cos_coeff *= cc;
        m.sin_coeff = base;
        m.sin_coeff *= ss;
        return m;
    };

    const RadialProfile r2g = shape(2), r3g = shape(3), r4g = shape(4);
    terms.a.push_back(scaled_mode(2, r2g, a_c, a_s));
    terms.b.push_back(AzimuthalMode::zero(1, grid));
    terms.b.push_back(scaled_mode(3, r3g, b_c, b_s));
    terms.c.push_back(AzimuthalMode::zero(2, grid));
    terms.c.push_back(scaled_mode(4, r4g, c_c, c_s));
    return terms;
}

ScalarPolarField naive_residuum_exact(const point_vortex::Trajectory& traj,
                                      std::size_t i, double t, double nu,
                                      const PolarGrid& grid) {
    if (nu <= 0.0) throw Error("naive_residuum_exact: nu must be positive");
    if (t <= 0.0) throw Error("naive_residuum_exact: t must be positive");
    const PairData pd = pair_data(traj, i, t);
    const double root = std::sqrt(nu * t);
    const double alpha_i = traj.circulations[i];

    ScalarPolarField field(grid);
    field.fill([&](double r, double theta) {
        const Vec2 xi{r * std::cos(theta), r * std::sin(theta)};
        const Vec2 grad_g = xi * (-0.5 * kernels::gauss_profile(r));
        double acc = 0.0;
        for (std::size_t j = 0; j < pd.z.size(); ++j) {
            const Vec2 eta = pd.z[j] / root;
            const Vec2 dv = kernels::oseen_velocity(xi + eta) -
                            kernels::oseen_velocity(eta);
            acc += pd.kappa[j] * dv.dot(grad_g);
        }
        return acc * alpha_i / nu;
    });
    return field;
}

double weighted_remainder_sup(const point_vortex::Trajectory& traj, std::size_t i,
                              double t, double nu, double gamma,
                              const PolarGrid& grid) {
    const ScalarPolarField r0 = naive_residuum_exact(traj, i, t, nu, grid);
    const ExpansionTerms terms = residuum_terms(traj, i, t);
    const double d = traj.min_separation;
    const double s = std::sqrt(nu * t) / d;
    const double pre = d * d / (traj.circulations[i] * t);

    double sup = 0.0;
    for (std::size_t ir = 0; ir < grid.radii.size(); ++ir) {
        const double r = grid.radii[ir];
        const double w = std::exp(gamma * r * r / 4.0);
        for (std::size_t m = 0; m < grid.n_angles; ++m) {
            const double theta = grid.angle(m);
            const Vec2 xi{r * std::cos(theta), r * std::sin(theta)};
            const double rem = pre * r0.at(ir, m) - terms.eval_a(xi) -
                               s * terms.eval_b(xi) - s * s * terms.eval_c(xi);
            sup = std::max(sup, std::abs(rem) * w);
        }
    }
    return sup;
}

StrainField strain_field(const point_vortex::Trajectory& traj, std::size_t i,
                         double t) {
    const PairData pd = pair_data(traj, i, t);
    const double d = traj.min_separation;
    StrainField f;
    f.z = pd.z;
    f.coef.resize(pd.z.size());
    for (std::size_t j = 0; j < pd.z.size(); ++j) {
        const double zsq = pd.z[j].norm_sq();
        f.coef[j] = pd.kappa[j] * d * d / (zsq * zsq);
    }
    return f;
}

Vec2 StrainField::operator()(Vec2 xi) const {
    Vec2 out;
    for (std::size_t j = 0; j < z.size(); ++j)
        out += coef[j] * (xi.perp() * z[j].norm_sq() -
                          2.0 * xi.dot(z[j]) * z[j].perp());
    return out / (2.0 * M_PI);
}

} // namespace expansion
} // namespace vortexlab
