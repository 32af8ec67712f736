#include "tsmu/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tsmu/errors.hpp"

namespace tsmu {

namespace {

/// Cell-centred Dirichlet wall: the ghost value is -psi, which raises the
/// end diagonal of -(1/2) d^2 from 1/h^2 to 3/(2 h^2).
double wall_factor(std::size_t k, std::size_t n) { return (k == 0 || k + 1 == n) ? 1.5 : 1.0; }

/// Forward-elimination factors of (1 + i tau T) for one tridiagonal line with
/// real diagonal `diag(k)` and constant real off-diagonal `off`.
template <class DiagAt>
void factor_line(std::size_t n, double tau, double off, DiagAt diag, Complex *cp, Complex *inv,
                 std::size_t stride) {
    const Complex b{0.0, tau * off};
    Complex prev_cp{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        const Complex a{1.0, tau * diag(k)};
        const Complex den = (k == 0) ? a : a - b * prev_cp;
        const Complex r = 1.0 / den;
        inv[k * stride] = r;
        prev_cp = b * r;
        cp[k * stride] = prev_cp;
    }
}

double time_tolerance(double dt) { return 1e-9 * dt; }

} // namespace

PotentialField free_potential(const GridSpec &grid) {
    PotentialField v;
    v.values.assign(grid.spatial_size(), 0.0);
    return v;
}

PotentialField build_potential(const GridSpec &grid, const ScreenSpec &screen) {
    if (!(screen.barrier_height > 0.0)) {
        throw ConfigError("screen.V0", "barrier height must be positive");
    }
    if (!(screen.thickness > 0.0)) {
        throw ConfigError("screen.thickness", "must be positive");
    }
    PotentialField v;
    v.values.assign(grid.spatial_size(), 0.0);
    v.barrier_height = screen.barrier_height;
    v.apertures = screen.apertures;
    v.profile = screen.profile;

    std::size_t lo = grid.nx;
    std::size_t hi = 0;
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const double x = grid.x_center(i);
        if (x >= screen.x_start && x < screen.x_start + screen.thickness) {
            lo = std::min(lo, i);
            hi = std::max(hi, i + 1);
        }
    }
    if (lo >= hi || lo == 0 || hi >= grid.nx) {
        throw ConfigError("screen.x", "screen must cover at least one interior column");
    }
    v.screen_col_lo = lo;
    v.screen_col_hi = hi;

    if (!screen.closed) {
        for (std::size_t s = 0; s < 2; ++s) {
            const Aperture &a = screen.apertures[s];
            if (!(a.width > 0.0)) {
                throw ConfigError("screen.slit_width", "must be positive");
            }
            if (a.center - 3.0 * a.width <= 0.0 || a.center + 3.0 * a.width >= grid.ly) {
                throw ConfigError("screen.slit_centers", "slit aperture leaves the box height");
            }
        }
        if (!(screen.apertures[0].center > screen.apertures[1].center)) {
            throw ConfigError("screen.slit_separation", "upper slit must lie above lower slit");
        }
    }

    const double v0 = screen.barrier_height;
    std::vector<double> column(grid.ny, v0);
    if (!screen.closed) {
        for (std::size_t j = 0; j < grid.ny; ++j) {
            const double y = grid.y_center(j);
            double best = v0;
            for (const Aperture &a : screen.apertures) {
                const double u = y - a.center;
                if (screen.profile == ApertureProfile::Hard) {
                    if (std::abs(u) < std::sqrt(3.0) * a.width) {
                        best = 0.0;
                    }
                } else {
                    const double omega = 1.0 / (2.0 * a.width * a.width);
                    best = std::min(best, 0.5 * omega * omega * u * u);
                }
            }
            column[j] = best;
        }
    }
    const bool offset = !screen.closed && screen.profile == ApertureProfile::Gaussian &&
                        screen.channel_offset != 0.0;
    if (offset && (screen.offset_ramp < 0.0 || 2.0 * screen.offset_ramp > screen.thickness)) {
        throw ConfigError("screen.offset_ramp", "ramps must fit inside the screen thickness");
    }
    for (std::size_t i = lo; i < hi; ++i) {
        double c = 0.0;
        if (offset) {
            const double x = grid.x_center(i);
            const double depth =
                std::min(x - screen.x_start, screen.x_start + screen.thickness - x);
            double ramp = 1.0;
            if (screen.offset_ramp > 0.0 && depth < screen.offset_ramp) {
                const double s = std::sin(0.5 * std::numbers::pi * depth / screen.offset_ramp);
                ramp = s * s;
            }
            c = screen.channel_offset * ramp;
        }
        for (std::size_t j = 0; j < grid.ny; ++j) {
            v.values[i * grid.ny + j] = std::min(v0, column[j] + c);
        }
    }
    return v;
}

WaveFunction initial_state(const GridSpec &grid, const PacketSpec &packet, double t0) {
    if (!(packet.sigma_x > 0.0)) {
        throw ConfigError("packet.sigma_x", "must be positive");
    }
    if (packet.focus_time < 0.0) {
        throw ConfigError("packet.focus_time", "must be non-negative");
    }
    if (packet.y_taper < 0.0 || 2.0 * packet.y_taper >= grid.ly) {
        throw ConfigError("packet.y_taper", "must lie in [0, ly/2)");
    }
    std::vector<double> profile(grid.ny, 1.0);
    if (packet.y_taper > 0.0) {
        for (std::size_t j = 0; j < grid.ny; ++j) {
            const double y = grid.y_center(j);
            const double edge = std::min(y, grid.ly - y);
            if (edge < packet.y_taper) {
                const double s = std::sin(0.5 * std::numbers::pi * edge / packet.y_taper);
                profile[j] = s * s;
            }
        }
    }
    WaveFunction psi(grid, t0);
    auto ch = psi.channel(0);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const double u = grid.x_center(i) - packet.x0;
        const Complex spread{1.0, -packet.focus_time / (2.0 * packet.sigma_x * packet.sigma_x)};
        const Complex phi = std::exp(-u * u / (4.0 * packet.sigma_x * packet.sigma_x * spread)) *
                            std::polar(1.0, packet.k_x * grid.x_center(i));
        for (std::size_t j = 0; j < grid.ny; ++j) {
            ch[i * grid.ny + j] = phi * profile[j];
        }
    }
    const double scale = 1.0 / std::sqrt(norm_sq(psi));
    for (auto &z : ch) {
        z *= scale;
    }
    return psi;
}

void Schedule::validate() const {
    if (!(dt > 0.0)) {
        throw ScheduleError("dt must be positive");
    }
    if (!(t0 < tS && tS < tD)) {
        throw ScheduleError("schedule requires t0 < tS < tD");
    }
    (void)step_count(t0, tS, dt);
    (void)step_count(tS, tD, dt);
}

std::size_t step_count(double t_from, double t_to, double dt) {
    if (!(dt > 0.0)) {
        throw ScheduleError("dt must be positive");
    }
    const double span = t_to - t_from;
    if (span < -time_tolerance(dt)) {
        throw ScheduleError("cannot propagate backwards in time");
    }
    const double n = std::round(span / dt);
    if (std::abs(n * dt - span) > time_tolerance(dt) * std::max(1.0, n)) {
        throw ScheduleError("interval is not a whole multiple of dt");
    }
    return static_cast<std::size_t>(std::max(0.0, n));
}

void DetectorCoupling::validate() const {
    if (!(theta >= 0.0 && theta <= std::numbers::pi / 2.0 + 1e-12)) {
        throw ConfigError("coupling.theta", "must lie in [0, pi/2]");
    }
    if (upper_window.empty() || lower_window.empty()) {
        throw ConfigError("coupling.windows", "detector windows must be non-empty");
    }
    if (upper_window.overlaps(lower_window)) {
        throw ConfigError("coupling.windows", "detector windows overlap");
    }
}

WaveFunction detector_rotation(const DetectorCoupling &coupling, double angle,
                               const WaveFunction &psi) {
    if (coupling.upper_window.overlaps(coupling.lower_window)) {
        throw ConfigError("coupling.windows", "detector windows overlap");
    }
    WaveFunction out = psi;
    if (angle == 0.0) {
        return out;
    }
    double c = std::cos(angle);
    double s = std::sin(angle);
    // Exact zeros at the record endpoints keep untouched levels identically zero.
    if (std::abs(c) < 1e-15) {
        c = 0.0;
    }
    if (std::abs(s) < 1e-15) {
        s = 0.0;
    }
    const GridSpec &g = psi.grid();
    auto rotate = [&](const CellWindow &w, std::size_t level) {
        auto ground = out.channel(0);
        auto excited = out.channel(level);
        for (std::size_t i = w.x_lo; i < std::min(w.x_hi, g.nx); ++i) {
            for (std::size_t j = w.y_lo; j < std::min(w.y_hi, g.ny); ++j) {
                const std::size_t k = i * g.ny + j;
                const Complex a0 = ground[k];
                const Complex a1 = excited[k];
                ground[k] = c * a0 - s * a1;
                excited[k] = s * a0 + c * a1;
            }
        }
    };
    rotate(coupling.upper_window, 1);
    rotate(coupling.lower_window, 2);
    return out;
}

WaveFunction detector_kick(const DetectorCoupling &coupling, const WaveFunction &psi) {
    coupling.validate();
    return detector_rotation(coupling, coupling.theta, psi);
}

PropagatorPlan::PropagatorPlan(const GridSpec &grid, const PotentialField &potential, double dt)
    : grid_(grid), dt_(dt) {
    grid.validate();
    if (potential.values.size() != grid.spatial_size()) {
        throw ShapeError("potential does not match grid");
    }
    if (!(dt > 0.0)) {
        throw ScheduleError("dt must be positive");
    }
    const std::size_t nx = grid.nx;
    const std::size_t ny = grid.ny;
    const double hx2 = grid.dx() * grid.dx();
    const double hy2 = grid.dy() * grid.dy();
    const double tau = 0.5 * dt;
    off_x_ = -0.5 / hx2;
    off_y_ = -0.5 / hy2;

    diag_x_.resize(nx * ny);
    diag_y_.resize(nx * ny);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const double half_v = 0.5 * potential.values[i * ny + j];
            diag_x_[i * ny + j] = wall_factor(i, nx) / hx2 + half_v;
            diag_y_[i * ny + j] = wall_factor(j, ny) / hy2 + half_v;
        }
    }

    cp_x_.resize(nx * ny);
    inv_x_.resize(nx * ny);
    cp_y_.resize(nx * ny);
    inv_y_.resize(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        factor_line(
            nx, tau, off_x_, [&](std::size_t i) { return diag_x_[i * ny + j]; }, cp_x_.data() + j,
            inv_x_.data() + j, ny);
    }
    for (std::size_t i = 0; i < nx; ++i) {
        factor_line(
            ny, tau, off_y_, [&](std::size_t j) { return diag_y_[i * ny + j]; },
            cp_y_.data() + i * ny, inv_y_.data() + i * ny, 1);
    }
}

// Lines along x are strided by ny; the recursion over i runs with all ny
// lines advanced together so the inner loop is contiguous.
void PropagatorPlan::sweep_x(std::span<Complex> psi, std::vector<Complex> &scratch) const {
    const std::size_t nx = grid_.nx;
    const std::size_t ny = grid_.ny;
    const double tau = 0.5 * dt_;
    const double off = off_x_;
    const double beta = tau * off;
    Complex *d = scratch.data();
    Complex *p = psi.data();
    for (std::size_t i = 0; i < nx; ++i) {
        const Complex *prev = i > 0 ? p + (i - 1) * ny : nullptr;
        const Complex *next = i + 1 < nx ? p + (i + 1) * ny : nullptr;
        const Complex *cur = p + i * ny;
        const double *diag = diag_x_.data() + i * ny;
        const Complex *inv = inv_x_.data() + i * ny;
        const Complex *dprev = i > 0 ? d + (i - 1) * ny : nullptr;
        Complex *dcur = d + i * ny;
        for (std::size_t j = 0; j < ny; ++j) {
            double nr = 0.0;
            double ni = 0.0;
            if (prev != nullptr) {
                nr += prev[j].real();
                ni += prev[j].imag();
            }
            if (next != nullptr) {
                nr += next[j].real();
                ni += next[j].imag();
            }
            const double sr = diag[j] * cur[j].real() + off * nr;
            const double si = diag[j] * cur[j].imag() + off * ni;
            // r = (1 - i tau A) psi
            double rr = cur[j].real() + tau * si;
            double ri = cur[j].imag() - tau * sr;
            if (dprev != nullptr) {
                // r -= (i beta) d_prev
                rr += beta * dprev[j].imag();
                ri -= beta * dprev[j].real();
            }
            const double vr = inv[j].real();
            const double vi = inv[j].imag();
            dcur[j] = Complex{rr * vr - ri * vi, rr * vi + ri * vr};
        }
    }
    std::copy(d + (nx - 1) * ny, d + nx * ny, p + (nx - 1) * ny);
    for (std::size_t i = nx - 1; i-- > 0;) {
        const Complex *cp = cp_x_.data() + i * ny;
        const Complex *xnext = p + (i + 1) * ny;
        const Complex *dcur = d + i * ny;
        Complex *xcur = p + i * ny;
        for (std::size_t j = 0; j < ny; ++j) {
            const double cr = cp[j].real();
            const double ci = cp[j].imag();
            const double xr = xnext[j].real();
            const double xi = xnext[j].imag();
            xcur[j] = Complex{dcur[j].real() - (cr * xr - ci * xi),
                              dcur[j].imag() - (cr * xi + ci * xr)};
        }
    }
}

void PropagatorPlan::sweep_y(std::span<Complex> psi, std::vector<Complex> &scratch) const {
    const std::size_t nx = grid_.nx;
    const std::size_t ny = grid_.ny;
    const double tau = 0.5 * dt_;
    const double off = off_y_;
    const double beta = tau * off;
    Complex *d = scratch.data();
    for (std::size_t i = 0; i < nx; ++i) {
        Complex *line = psi.data() + i * ny;
        const double *diag = diag_y_.data() + i * ny;
        const Complex *inv = inv_y_.data() + i * ny;
        const Complex *cp = cp_y_.data() + i * ny;
        double dr_prev = 0.0;
        double di_prev = 0.0;
        for (std::size_t j = 0; j < ny; ++j) {
            double nr = 0.0;
            double ni = 0.0;
            if (j > 0) {
                nr += line[j - 1].real();
                ni += line[j - 1].imag();
            }
            if (j + 1 < ny) {
                nr += line[j + 1].real();
                ni += line[j + 1].imag();
            }
            const double sr = diag[j] * line[j].real() + off * nr;
            const double si = diag[j] * line[j].imag() + off * ni;
            const double rr = line[j].real() + tau * si + beta * di_prev;
            const double ri = line[j].imag() - tau * sr - beta * dr_prev;
            const double vr = inv[j].real();
            const double vi = inv[j].imag();
            dr_prev = rr * vr - ri * vi;
            di_prev = rr * vi + ri * vr;
            d[j] = Complex{dr_prev, di_prev};
        }
        line[ny - 1] = d[ny - 1];
        for (std::size_t j = ny - 1; j-- > 0;) {
            const double cr = cp[j].real();
            const double ci = cp[j].imag();
            const double xr = line[j + 1].real();
            const double xi = line[j + 1].imag();
            line[j] = Complex{d[j].real() - (cr * xr - ci * xi), d[j].imag() - (cr * xi + ci * xr)};
        }
    }
}

void PropagatorPlan::advance_channel(std::span<Complex> channel, std::size_t steps) const {
    if (channel.size() != grid_.spatial_size()) {
        throw ShapeError("channel size does not match plan grid");
    }
    std::vector<Complex> scratch(std::max(grid_.spatial_size(), grid_.ny));
    for (std::size_t s = 0; s < steps; ++s) {
        sweep_x(channel, scratch);
        sweep_y(channel, scratch);
    }
}

PropagatorPlan build_propagator(const GridSpec &grid, const PotentialField &potential,
                                double dt) {
    return PropagatorPlan(grid, potential, dt);
}

WaveFunction propagate(const PropagatorPlan &plan, const WaveFunction &psi, double t_from,
                       double t_to) {
    if (!(psi.grid() == plan.grid())) {
        throw ShapeError("propagate: state grid differs from plan grid");
    }
    const std::size_t steps = step_count(t_from, t_to, plan.dt());
    WaveFunction out = psi;
    out.set_time_tag(t_to);
    if (steps == 0) {
        return out;
    }
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        if (!out.channel_is_zero(m)) {
            plan.advance_channel(out.channel(m), steps);
        }
    }
    return out;
}

WaveFunction evolve_with_kick(const PropagatorPlan &plan, const DetectorCoupling &coupling,
                              const Schedule &schedule, const WaveFunction &psi, double t_from,
                              double t_to) {
    const double tol = time_tolerance(schedule.dt);
    if (t_from < schedule.tS - tol && t_to > schedule.tS - tol) {
        WaveFunction at_slits = propagate(plan, psi, t_from, schedule.tS);
        WaveFunction kicked = detector_kick(coupling, at_slits);
        return propagate(plan, kicked, schedule.tS, t_to);
    }
    return propagate(plan, psi, t_from, t_to);
}

TsmuRun run_tsmu(const PropagatorPlan &plan, const DetectorCoupling &coupling,
                 const Schedule &schedule, const WaveFunction &initial) {
    schedule.validate();
    TsmuRun run;
    run.psi_tS_minus = propagate(plan, initial, schedule.t0, schedule.tS);
    run.psi_tS_plus = detector_kick(coupling, run.psi_tS_minus);
    run.psi_tD = propagate(plan, run.psi_tS_plus, schedule.tS, schedule.tD);
    return run;
}

double mean_x(const WaveFunction &psi) {
    const GridSpec &g = psi.grid();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < g.ny; ++j) {
                row += std::norm(psi.at(m, i, j));
            }
            num += row * g.x_center(i);
            den += row;
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

double spread_x(const WaveFunction &psi) {
    const GridSpec &g = psi.grid();
    const double mu = mean_x(psi);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < g.ny; ++j) {
                row += std::norm(psi.at(m, i, j));
            }
            const double u = g.x_center(i) - mu;
            num += row * u * u;
            den += row;
        }
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

double probability_right_of(const WaveFunction &psi, std::size_t col) {
    const GridSpec &g = psi.grid();
    double s = 0.0;
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        for (std::size_t i = col; i < g.nx; ++i) {
            for (std::size_t j = 0; j < g.ny; ++j) {
                s += std::norm(psi.at(m, i, j));
            }
        }
    }
    return s * g.cell_volume();
}

} // namespace tsmu
