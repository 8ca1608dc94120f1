#include "vortexlab/point_vortex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include "vortexlab/kernels.hpp"
#include "vortexlab/numerics.hpp"

namespace vortexlab {
namespace point_vortex {

double VortexConfiguration::total_circulation_abs() const {
    double s = 0.0;
    for (double a : circulations) s += std::abs(a);
    return s;
}

double VortexConfiguration::min_pair_distance() const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            d = std::min(d, (positions[i] - positions[j]).norm());
    return d;
}

void VortexConfiguration::validate() const {
    if (positions.empty()) throw Error("VortexConfiguration: no vortices");
    if (positions.size() != circulations.size())
        throw Error("VortexConfiguration: positions/circulations size mismatch");
    for (double a : circulations)
        if (a == 0.0) throw Error("VortexConfiguration: zero circulation");
    if (positions.size() > 1 && min_pair_distance() == 0.0)
        throw Error("VortexConfiguration: coincident initial positions");
    if (!(horizon > 0.0)) throw Error("VortexConfiguration: horizon must be positive");
    if (nu < 0.0) throw Error("VortexConfiguration: negative viscosity");
}

std::vector<Vec2> rhs_inviscid(const std::vector<Vec2>& z,
                               const std::vector<double>& alpha) {
    const std::size_t n = z.size();
    std::vector<Vec2> dz(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const Vec2 dx = z[i] - z[j];
            const double rsq = dx.norm_sq();
            if (rsq == 0.0) throw Error("rhs_inviscid: coincident centers");
            dz[i] += dx.perp() * (alpha[j] / (2.0 * M_PI * rsq));
        }
    }
    return dz;
}

std::vector<Vec2> rhs_viscous(const std::vector<Vec2>& z,
                              const std::vector<double>& alpha, double eta) {
    // (alpha_j/sqrt(eta)) v^G(z_ij/sqrt(eta)) collapses to the singular kernel
    // times 1 - e^{-|z_ij|^2/(4 eta)}; no 1/sqrt(eta) appears explicitly, so
    // eta = 0 is regular and reproduces rhs_inviscid.
    if (eta < 0.0) throw Error("rhs_viscous: negative eta");
    const std::size_t n = z.size();
    std::vector<Vec2> dz(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const Vec2 dx = z[i] - z[j];
            const double rsq = dx.norm_sq();
            if (rsq == 0.0) throw Error("rhs_viscous: coincident centers");
            const double cutoff = eta > 0.0 ? -std::expm1(-rsq / (4.0 * eta)) : 1.0;
            dz[i] += dx.perp() * (alpha[j] * cutoff / (2.0 * M_PI * rsq));
        }
    }
    return dz;
}

namespace {

using State = std::vector<Vec2>;

State axpy(const State& y, double c, const State& k) {
    State out = y;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * k[i];
    return out;
}

double min_pair_dist(const State& z) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j)
            d = std::min(d, (z[i] - z[j]).norm());
    return d;
}

Vec2 hermite(double t0, double t1, Vec2 z0, Vec2 z1, Vec2 v0, Vec2 v1, double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return z0 * (2 * s3 - 3 * s2 + 1) + z1 * (-2 * s3 + 3 * s2) +
           v0 * (h * (s3 - 2 * s2 + s)) + v1 * (h * (s3 - s2));
}

// Dormand-Prince 5(4) with FSAL.
struct Dopri5 {
    std::function<State(double, const State&)> f;
    double rtol, atol;

    double error_norm(const State& e, const State& y0, const State& y1) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double scale =
                atol + rtol * std::max({std::abs(y0[i].x1), std::abs(y1[i].x1),
                                        std::abs(y0[i].x2), std::abs(y1[i].x2), 1.0});
            acc += (e[i].x1 * e[i].x1 + e[i].x2 * e[i].x2) / (scale * scale);
        }
        return std::sqrt(acc / (2.0 * e.size()));
    }

    // One attempted step from (t, y, k1 = f(t, y)); on acceptance returns
    // true and fills y_new, k_new, err_ratio.
    bool step(double t, const State& y, const State& k1, double h, State& y_new,
              State& k_new, double& err) const {
        const State k2 = f(t + h / 5, axpy(y, h / 5, k1));
        State tmp = y;
        for (std::size_t i = 0; i < y.size(); ++i)
            tmp[i] += h * (3.0 / 40 * k1[i] + 9.0 / 40 * k2[i]);
        const State k3 = f(t + 3 * h / 10, tmp);
        tmp = y;
        for (std::size_t i = 0; i < y.size(); ++i)
            tmp[i] += h * (44.0 / 45 * k1[i] - 56.0 / 15 * k2[i] + 32.0 / 9 * k3[i]);
        const State k4 = f(t + 4 * h / 5, tmp);
        tmp = y;
        for (std::size_t i = 0; i < y.size(); ++i)
            tmp[i] += h * (19372.0 / 6561 * k1[i] - 25360.0 / 2187 * k2[i] +
                           64448.0 / 6561 * k3[i] - 212.0 / 729 * k4[i]);
        const State k5 = f(t + 8 * h / 9, tmp);
        tmp = y;
        for (std::size_t i = 0; i < y.size(); ++i)
            tmp[i] += h * (9017.0 / 3168 * k1[i] - 355.0 / 33 * k2[i] +
                           46732.0 / 5247 * k3[i] + 49.0 / 176 * k4[i] -
                           5103.0 / 18656 * k5[i]);
        const State k6 = f(t + h, tmp);

        y_new = y;
        for (std::size_t i = 0; i < y.size(); ++i)
            y_new[i] += h * (35.0 / 384 * k1[i] + 500.0 / 1113 * k3[i] +
                             125.0 / 192 * k4[i] - 2187.0 / 6784 * k5[i] +
                             11.0 / 84 * k6[i]);
        k_new = f(t + h, y_new); // k7, reused as next k1

        State e(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            e[i] = h * ((35.0 / 384 - 5179.0 / 57600) * k1[i] +
                        (500.0 / 1113 - 7571.0 / 16695) * k3[i] +
                        (125.0 / 192 - 393.0 / 640) * k4[i] +
                        (-2187.0 / 6784 + 92097.0 / 339200) * k5[i] +
                        (11.0 / 84 - 187.0 / 2100) * k6[i] - 1.0 / 40 * k_new[i]);
        err = error_norm(e, y, y_new);
        return err <= 1.0;
    }
};

} // namespace

Trajectory integrate(const VortexConfiguration& config, System system,
                     std::size_t samples, const IntegratorOptions& opt) {
    config.validate();
    if (samples < 2) throw Error("integrate: need at least 2 samples");

    const std::vector<double>& alpha = config.circulations;
    const double T = config.horizon;
    const double nu = system == System::viscous ? config.nu : 0.0;
    const double guard = config.size() > 1
                             ? opt.collision_guard_fraction * config.min_pair_distance()
                             : 0.0;

    Dopri5 stepper;
    stepper.rtol = opt.rel_tol;
    stepper.atol = opt.abs_tol;
    stepper.f = [&](double t, const State& z) {
        return system == System::viscous ? rhs_viscous(z, alpha, nu * t)
                                         : rhs_inviscid(z, alpha);
    };

    Trajectory traj;
    traj.system = system;
    traj.nu = config.nu;
    traj.circulations = alpha;

    State y = config.positions;
    State k1 = stepper.f(0.0, y);
    double t = 0.0;
    double h = T / 1024.0;
    double dmin = config.size() > 1 ? config.min_pair_distance()
                                    : std::numeric_limits<double>::infinity();

    auto record = [&](double ts, const State& zs, const State& vs) {
        traj.times.push_back(ts);
        traj.positions.push_back(zs);
        traj.velocities.push_back(vs);
    };
    record(0.0, y, k1);

    std::size_t next_sample = 1;
    bool done = false;
    while (!done) {
        const double t_target = T * double(next_sample) / double(samples - 1);
        h = std::min(h, t_target - t);
        if (h < 1e-14 * std::max(T, 1.0))
            throw Error("integrate: step size underflow at t = " + std::to_string(t));

        State y_new, k_new;
        double err = 0.0;
        const bool ok = stepper.step(t, y, k1, h, y_new, k_new, err);
        const double fac =
            std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
        if (!ok) {
            h *= fac;
            continue;
        }

        const double t_new = t + h;
        if (config.size() > 1) {
            // Guard against near-collision: check the step end and midpoint.
            double dstep = min_pair_dist(y_new);
            State mid(y.size());
            for (std::size_t i = 0; i < y.size(); ++i)
                mid[i] = hermite(t, t_new, y[i], y_new[i], k1[i], k_new[i],
                                 0.5 * (t + t_new));
            dstep = std::min(dstep, min_pair_dist(mid));
            dmin = std::min(dmin, dstep);
            if (dstep < guard) {
                record(t_new, y_new, k_new);
                traj.collision = true;
                break;
            }
        }

        t = t_new;
        y = std::move(y_new);
        k1 = std::move(k_new);
        h = std::min(h * fac, T);

        if (std::abs(t - t_target) <= 1e-13 * std::max(T, 1.0)) {
            record(t_target, y, k1);
            if (next_sample + 1 == samples)
                done = true;
            else
                ++next_sample;
        }
    }

    // Refine the minimal pair separation with golden-section search on the
    // Hermite interpolant between samples.
    if (config.size() > 1) {
        for (std::size_t s = 0; s + 1 < traj.times.size(); ++s) {
            const double t0 = traj.times[s], t1 = traj.times[s + 1];
            for (std::size_t i = 0; i < config.size(); ++i) {
                for (std::size_t j = i + 1; j < config.size(); ++j) {
                    auto dist = [&](double tt) {
                        const Vec2 zi = hermite(t0, t1, traj.positions[s][i],
                                                traj.positions[s + 1][i],
                                                traj.velocities[s][i],
                                                traj.velocities[s + 1][i], tt);
                        const Vec2 zj = hermite(t0, t1, traj.positions[s][j],
                                                traj.positions[s + 1][j],
                                                traj.velocities[s][j],
                                                traj.velocities[s + 1][j], tt);
                        return (zi - zj).norm();
                    };
                    const double tt =
                        golden_section_min(dist, t0, t1, 1e-10 * std::max(T, 1.0));
                    dmin = std::min(dmin, dist(tt));
                }
            }
        }
    }
    traj.min_separation = config.size() > 1 ? dmin : 0.0;
    const double atot = config.total_circulation_abs();
    traj.turnover_time = config.size() > 1 && atot > 0.0
                             ? traj.min_separation * traj.min_separation / atot
                             : 0.0;
    return traj;
}

Vec2 Trajectory::position(std::size_t i, double t) const {
    if (times.empty()) throw Error("Trajectory: empty");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t s = (it == times.begin()) ? 0 : std::size_t(it - times.begin()) - 1;
    s = std::min(s, times.size() - 2);
    return hermite(times[s], times[s + 1], positions[s][i], positions[s + 1][i],
                   velocities[s][i], velocities[s + 1][i], t);
}

Vec2 Trajectory::separation(std::size_t i, std::size_t j, double t) const {
    return position(i, t) - position(j, t);
}

DeviationCurve compare_trajectories(const Trajectory& viscous,
                                    const Trajectory& inviscid) {
    if (viscous.times.size() != inviscid.times.size() ||
        viscous.n_vortices() != inviscid.n_vortices())
        throw Error("compare_trajectories: mismatched sampling");
    for (std::size_t k = 0; k < viscous.times.size(); ++k)
        if (std::abs(viscous.times[k] - inviscid.times[k]) >
            1e-12 * std::max(1.0, inviscid.times.back()))
            throw Error("compare_trajectories: mismatched sample times");

    const double d = inviscid.min_separation;
    DeviationCurve curve;
    curve.times = inviscid.times;
    curve.deviation.resize(curve.times.size());
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
        double dev = 0.0;
        for (std::size_t i = 0; i < inviscid.n_vortices(); ++i)
            dev = std::max(dev,
                           (viscous.positions[k][i] - inviscid.positions[k][i]).norm());
        curve.deviation[k] = dev / d;
    }

    const double nu = viscous.nu;
    const double tf = curve.times.back();
    if (nu > 0.0 && tf > 0.0) {
        const double decay = std::exp(-d * d / (5.0 * nu * tf));
        curve.k1 = decay > 0.0 ? curve.deviation.back() / decay : 0.0;
    }
    curve.envelope.resize(curve.times.size());
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
        const double t = curve.times[k];
        curve.envelope[k] =
            (nu > 0.0 && t > 0.0) ? curve.k1 * std::exp(-d * d / (5.0 * nu * t)) : 0.0;
    }
    return curve;
}

Vec2 weighted_centroid(const std::vector<Vec2>& z, const std::vector<double>& alpha) {
    Vec2 c;
    for (std::size_t i = 0; i < z.size(); ++i) c += alpha[i] * z[i];
    return c;
}

double pair_log_energy(const std::vector<Vec2>& z, const std::vector<double>& alpha) {
    double e = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j)
            e += alpha[i] * alpha[j] * std::log((z[i] - z[j]).norm());
    return e;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_trajectory_csv: cannot open " + path);
    out.precision(16);
    out << "t,vortex_index,z1,z2\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        for (std::size_t i = 0; i < traj.n_vortices(); ++i)
            out << traj.times[k] << ',' << i << ',' << traj.positions[k][i].x1 << ','
                << traj.positions[k][i].x2 << '\n';
}

} // namespace point_vortex
} // namespace vortexlab
