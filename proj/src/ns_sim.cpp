#include "vortexlab/ns_sim.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <cstring>
#include <fstream>
#include <mutex>

#include "vortexlab/kernels.hpp"
#include "vortexlab/numerics.hpp"

namespace vortexlab {
namespace ns_sim {

namespace {
std::mutex& plan_mutex() {
    static std::mutex mu; // FFTW plan creation is not thread safe
    return mu;
}
} // namespace

double VorticityField::integral(const std::vector<double>& f) const {
    double s = 0.0;
    for (double v : f) s += v;
    return s * cell_area();
}

double VorticityField::enstrophy() const {
    double s = 0.0;
    for (double v : total) s += v * v;
    return s * cell_area();
}

VorticityField init_profile_superposition(
    const point_vortex::VortexConfiguration& config, double t0, std::size_t n,
    double box, const std::vector<std::function<double(Vec2)>>& profiles) {
    config.validate();
    if (profiles.size() != config.size())
        throw Error("init_profile_superposition: one profile per vortex required");
    if (t0 <= 0.0 || config.nu <= 0.0)
        throw Error("init_profile_superposition: needs nu > 0 and t0 > 0");
    const double core = std::sqrt(config.nu * t0);
    const double dx = box / double(n);
    if (core < 3.0 * dx)
        throw Error("init_profile_superposition: unresolved core, sqrt(nu t0) = " +
                    std::to_string(core) + " < 3 dx = " + std::to_string(3 * dx));
    for (const Vec2& x : config.positions) {
        if (x.x1 < box / 4 || x.x1 > 3 * box / 4 || x.x2 < box / 4 || x.x2 > 3 * box / 4)
            throw Error("init_profile_superposition: vortex center within box/4 of "
                        "the boundary");
    }

    VorticityField f;
    f.n = n;
    f.box = box;
    f.time = t0;
    f.nu = config.nu;
    f.circulations = config.circulations;
    f.total.assign(n * n, 0.0);
    f.parts.assign(config.size(), std::vector<double>(n * n, 0.0));

    for (std::size_t v = 0; v < config.size(); ++v) {
        const Vec2 center = config.positions[v];
        const double pre = config.circulations[v] / (config.nu * t0);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = double(i) * dx;
            double dxc = x - center.x1;
            dxc -= box * std::round(dxc / box);
            for (std::size_t j = 0; j < n; ++j) {
                const double y = double(j) * dx;
                double dyc = y - center.x2;
                dyc -= box * std::round(dyc / box);
                f.parts[v][i * n + j] = pre * profiles[v]({dxc / core, dyc / core});
            }
        }
        for (std::size_t k = 0; k < n * n; ++k) f.total[k] += f.parts[v][k];
    }
    return f;
}

VorticityField init_oseen_superposition(const point_vortex::VortexConfiguration& config,
                                        double t0, std::size_t n, double box) {
    std::vector<std::function<double(Vec2)>> profiles(
        config.size(), [](Vec2 xi) { return kernels::gauss_profile(xi.norm()); });
    return init_profile_superposition(config, t0, n, box, profiles);
}

struct Solver::Impl {
    std::size_t n;
    double box;
    std::size_t nc;             // n * (n/2 + 1)
    std::vector<double> kx, ky; // wavenumbers by index
    std::vector<unsigned char> keep; // 2/3 dealias mask on spectral layout
    fftw_plan fwd = nullptr, bwd = nullptr;
    std::vector<double> real_buf;
    std::vector<std::complex<double>> cplx_buf;

    // scratch
    std::vector<double> u1, u2, gx, gy, prod;

    Impl(std::size_t n_, double box_) : n(n_), box(box_), nc(n_ * (n_ / 2 + 1)) {
        if (n < 8 || (n & (n - 1)) != 0)
            throw Error("Solver: grid size must be a power of two >= 8");
        kx.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const long s = long(i) <= long(n) / 2 ? long(i) : long(i) - long(n);
            kx[i] = 2.0 * M_PI / box * double(s);
        }
        ky = kx;
        keep.assign(nc, 0);
        const long cut = long(n) / 3;
        for (std::size_t i = 0; i < n; ++i) {
            const long si = long(i) <= long(n) / 2 ? long(i) : long(i) - long(n);
            for (std::size_t j = 0; j <= n / 2; ++j) {
                if (std::labs(si) < cut && long(j) < cut) keep[i * (n / 2 + 1) + j] = 1;
            }
        }
        real_buf.resize(n * n);
        cplx_buf.resize(nc);
        u1.resize(n * n);
        u2.resize(n * n);
        gx.resize(n * n);
        gy.resize(n * n);
        prod.resize(n * n);
        std::lock_guard<std::mutex> lock(plan_mutex());
        fwd = fftw_plan_dft_r2c_2d(int(n), int(n), real_buf.data(),
                                   reinterpret_cast<fftw_complex*>(cplx_buf.data()),
                                   FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(int(n), int(n),
                                   reinterpret_cast<fftw_complex*>(cplx_buf.data()),
                                   real_buf.data(), FFTW_ESTIMATE);
    }
    ~Impl() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }

    // physical -> spectral (normalized so that c2r returns physical values)
    std::vector<std::complex<double>> to_spectral(const std::vector<double>& f) {
        std::memcpy(real_buf.data(), f.data(), sizeof(double) * n * n);
        fftw_execute(fwd);
        std::vector<std::complex<double>> out(cplx_buf.begin(), cplx_buf.end());
        const double scale = 1.0 / double(n * n);
        for (auto& c : out) c *= scale;
        return out;
    }

    void to_real(const std::vector<std::complex<double>>& c, std::vector<double>& f) {
        std::memcpy(cplx_buf.data(), c.data(), sizeof(std::complex<double>) * nc);
        fftw_execute(bwd);
        f.assign(real_buf.begin(), real_buf.end());
    }

    void mask(std::vector<std::complex<double>>& c) const {
        for (std::size_t k = 0; k < nc; ++k)
            if (!keep[k]) c[k] = 0.0;
    }

    // velocity of a (masked) spectral vorticity
    void velocity(const std::vector<std::complex<double>>& omega) {
        std::vector<std::complex<double>> a(nc), b(nc);
        const std::size_t w = n / 2 + 1;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                const std::size_t k = i * w + j;
                const double ksq = kx[i] * kx[i] + ky[j] * ky[j];
                if (ksq == 0.0 || !keep[k]) {
                    a[k] = b[k] = 0.0;
                    continue;
                }
                // u = grad^perp psi with -lap psi = omega (zero mean flow)
                const std::complex<double> psi = omega[k] / ksq;
                a[k] = std::complex<double>(0.0, ky[j]) * psi;  // u_x = d_y psi ... sign below
                b[k] = std::complex<double>(0.0, -kx[i]) * psi; // u_y
            }
        }
        to_real(a, u1);
        to_real(b, u2);
    }

    // advection tendency N(f) = -(u . grad f), dealiased; u must be current
    void advect(const std::vector<std::complex<double>>& f,
                std::vector<std::complex<double>>& out) {
        std::vector<std::complex<double>> t(nc);
        const std::size_t w = n / 2 + 1;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < w; ++j) {
                const std::size_t k = i * w + j;
                t[k] = keep[k] ? std::complex<double>(0.0, kx[i]) * f[k]
                               : std::complex<double>(0.0, 0.0);
            }
        to_real(t, gx);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < w; ++j) {
                const std::size_t k = i * w + j;
                t[k] = keep[k] ? std::complex<double>(0.0, ky[j]) * f[k]
                               : std::complex<double>(0.0, 0.0);
            }
        to_real(t, gy);
        for (std::size_t k = 0; k < n * n; ++k)
            prod[k] = -(u1[k] * gx[k] + u2[k] * gy[k]);
        out = to_spectral(prod);
        mask(out);
    }
};

Solver::Solver(std::size_t n, double box) : impl_(std::make_unique<Impl>(n, box)) {}
Solver::~Solver() = default;

double Solver::max_speed(const VorticityField& field) {
    auto omega = impl_->to_spectral(field.total);
    impl_->velocity(omega);
    double m = 0.0;
    for (std::size_t k = 0; k < field.n * field.n; ++k)
        m = std::max(m, std::hypot(impl_->u1[k], impl_->u2[k]));
    return m;
}

void Solver::step(VorticityField& field, double dt) {
    if (field.n != impl_->n || field.box != impl_->box)
        throw Error("Solver::step: field/solver geometry mismatch");
    const std::size_t nf = field.parts.size() + 1;
    const std::size_t nc = impl_->nc;

    // gather spectral states: slot 0 is the total
    std::vector<std::vector<std::complex<double>>> w(nf);
    w[0] = impl_->to_spectral(field.total);
    for (std::size_t p = 0; p + 1 < nf; ++p)
        w[p + 1] = impl_->to_spectral(field.parts[p]);

    // CFL check on the entering state
    impl_->velocity(w[0]);
    double umax = 0.0;
    for (std::size_t k = 0; k < field.n * field.n; ++k)
        umax = std::max(umax, std::hypot(impl_->u1[k], impl_->u2[k]));
    if (umax * dt > 0.5 * field.dx())
        throw Error("Solver::step: CFL violation, dt = " + std::to_string(dt) +
                    " vs bound " + std::to_string(0.5 * field.dx() / umax));

    // integrating factors for the diffusion part
    const std::size_t wdt = impl_->n / 2 + 1;
    std::vector<double> ehalf(nc), efull(nc);
    for (std::size_t i = 0; i < impl_->n; ++i)
        for (std::size_t j = 0; j < wdt; ++j) {
            const std::size_t k = i * wdt + j;
            const double ksq = impl_->kx[i] * impl_->kx[i] + impl_->ky[j] * impl_->ky[j];
            ehalf[k] = std::exp(-field.nu * ksq * dt / 2);
            efull[k] = ehalf[k] * ehalf[k];
        }
    // classical integrating-factor RK4; every stage velocity comes from the
    // total field's stage value so the components see the same transport
    std::vector<std::vector<std::complex<double>>> k1(nf), k2(nf), k3(nf), k4(nf);
    for (std::size_t p = 0; p < nf; ++p) impl_->advect(w[p], k1[p]); // u is current

    auto stage_velocity = [&](const std::vector<std::complex<double>>& total_state) {
        impl_->velocity(total_state);
    };

    std::vector<std::vector<std::complex<double>>> tmp(nf);
    for (std::size_t p = 0; p < nf; ++p) {
        tmp[p].resize(nc);
        for (std::size_t k = 0; k < nc; ++k)
            tmp[p][k] = ehalf[k] * (w[p][k] + dt / 2.0 * k1[p][k]);
    }
    stage_velocity(tmp[0]);
    for (std::size_t p = 0; p < nf; ++p) impl_->advect(tmp[p], k2[p]);

    for (std::size_t p = 0; p < nf; ++p)
        for (std::size_t k = 0; k < nc; ++k)
            tmp[p][k] = ehalf[k] * w[p][k] + dt / 2.0 * k2[p][k];
    stage_velocity(tmp[0]);
    for (std::size_t p = 0; p < nf; ++p) impl_->advect(tmp[p], k3[p]);

    for (std::size_t p = 0; p < nf; ++p)
        for (std::size_t k = 0; k < nc; ++k)
            tmp[p][k] = efull[k] * w[p][k] + dt * ehalf[k] * k3[p][k];
    stage_velocity(tmp[0]);
    for (std::size_t p = 0; p < nf; ++p) impl_->advect(tmp[p], k4[p]);

    for (std::size_t p = 0; p < nf; ++p) {
        for (std::size_t k = 0; k < nc; ++k) {
            w[p][k] = efull[k] * w[p][k] +
                      dt / 6.0 *
                          (efull[k] * k1[p][k] +
                           2.0 * ehalf[k] * (k2[p][k] + k3[p][k]) + k4[p][k]);
        }
    }

    impl_->to_real(w[0], field.total);
    for (std::size_t p = 0; p + 1 < nf; ++p) impl_->to_real(w[p + 1], field.parts[p]);
    field.time += dt;
}

void Solver::advance_to(VorticityField& field, double t_end) {
    if (t_end <= field.time) return;
    while (field.time < t_end - 1e-14 * t_end) {
        const double span = t_end - field.time;
        const double umax = max_speed(field);
        double dt = limits.cfl_safety * field.dx() / std::max(umax, 1e-300);
        dt = std::min(dt, limits.max_time_fraction * field.time);
        const std::size_t steps = std::size_t(std::ceil(span / dt));
        dt = span / double(steps);
        // fixed-step run over the interval; re-split on a CFL rejection
        try {
            for (std::size_t s = 0; s < steps; ++s) step(field, dt);
        } catch (const Error&) {
            continue; // step was rejected, recompute dt from the current state
        }
    }
}

DecomposeReport decompose_check(const VorticityField& field) {
    DecomposeReport rep;
    rep.masses.resize(field.parts.size());
    for (std::size_t p = 0; p < field.parts.size(); ++p) {
        rep.masses[p] = field.integral(field.parts[p]);
        const double sign = field.circulations[p] >= 0.0 ? 1.0 : -1.0;
        for (double v : field.parts[p]) {
            rep.worst_undershoot = std::max(rep.worst_undershoot, -sign * v);
            rep.undershoot_scale = std::max(rep.undershoot_scale, std::abs(v));
        }
    }
    for (std::size_t k = 0; k < field.total.size(); ++k) {
        double s = 0.0;
        for (const auto& part : field.parts) s += part[k];
        rep.sum_residual = std::max(rep.sum_residual, std::abs(s - field.total[k]));
    }
    return rep;
}

namespace {
constexpr char kMagic[8] = {'V', 'L', 'S', 'N', 'A', 'P', '0', '1'};
}

void write_snapshot(const VorticityField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_snapshot: cannot open " + path);
    out.write(kMagic, 8);
    const std::int64_t n = std::int64_t(field.n);
    const std::int64_t nparts = std::int64_t(field.parts.size());
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&field.box), 8);
    out.write(reinterpret_cast<const char*>(&field.time), 8);
    out.write(reinterpret_cast<const char*>(&field.nu), 8);
    out.write(reinterpret_cast<const char*>(&nparts), 8);
    out.write(reinterpret_cast<const char*>(field.total.data()),
              std::streamsize(sizeof(double) * field.total.size()));
    for (const auto& part : field.parts)
        out.write(reinterpret_cast<const char*>(part.data()),
                  std::streamsize(sizeof(double) * part.size()));
    if (!out) throw Error("write_snapshot: write failed for " + path);
}

std::vector<double> upsample(const std::vector<double>& f, std::size_t n,
                             std::size_t factor) {
    if (f.size() != n * n) throw Error("upsample: size mismatch");
    if (factor == 1) return f;
    const std::size_t m = n * factor;
    std::vector<std::complex<double>> coarse(n * (n / 2 + 1));
    std::vector<std::complex<double>> fine(m * (m / 2 + 1), 0.0);
    std::vector<double> buf(f);
    std::vector<double> out(m * m);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_plan p = fftw_plan_dft_r2c_2d(int(n), int(n), buf.data(),
                                           reinterpret_cast<fftw_complex*>(coarse.data()),
                                           FFTW_ESTIMATE);
        fftw_execute(p);
        fftw_destroy_plan(p);
    }
    const double scale = 1.0 / double(n * n);
    // place coarse modes into the fine layout (positive ky half only)
    for (std::size_t i = 0; i < n; ++i) {
        const long si = long(i) <= long(n) / 2 ? long(i) : long(i) - long(n);
        const std::size_t it = si >= 0 ? std::size_t(si) : m - std::size_t(-si);
        for (std::size_t j = 0; j <= n / 2; ++j) {
            std::complex<double> c = coarse[i * (n / 2 + 1) + j] * scale;
            // halve the shared Nyquist rows so the embedded spectrum stays
            // consistent with a real signal on the fine grid
            if (std::size_t(std::labs(si)) == n / 2) c *= 0.5;
            if (j == n / 2) c *= 0.5;
            fine[it * (m / 2 + 1) + j] += c;
            if (std::size_t(std::labs(si)) == n / 2) {
                const std::size_t im = si >= 0 ? m - std::size_t(si) : std::size_t(-si);
                fine[im * (m / 2 + 1) + j] += c;
            }
        }
    }
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_plan p = fftw_plan_dft_c2r_2d(int(m), int(m),
                                           reinterpret_cast<fftw_complex*>(fine.data()),
                                           out.data(), FFTW_ESTIMATE);
        fftw_execute(p);
        fftw_destroy_plan(p);
    }
    return out;
}

VorticityField read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("read_snapshot: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw Error("read_snapshot: bad magic in " + path);
    std::int64_t n = 0, nparts = 0;
    VorticityField f;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&f.box), 8);
    in.read(reinterpret_cast<char*>(&f.time), 8);
    in.read(reinterpret_cast<char*>(&f.nu), 8);
    in.read(reinterpret_cast<char*>(&nparts), 8);
    f.n = std::size_t(n);
    // circulations are not part of the snapshot schema; callers restore them
    // from the experiment configuration
    f.total.resize(f.n * f.n);
    in.read(reinterpret_cast<char*>(f.total.data()),
            std::streamsize(sizeof(double) * f.total.size()));
    f.parts.assign(std::size_t(nparts), std::vector<double>(f.n * f.n));
    for (auto& part : f.parts)
        in.read(reinterpret_cast<char*>(part.data()),
                std::streamsize(sizeof(double) * part.size()));
    if (!in) throw Error("read_snapshot: truncated file " + path);
    return f;
}

} // namespace ns_sim
} // namespace vortexlab
