#pragma once

/**
 * @file
 * Hamiltonian H = -(1/2) Laplacian + V(x, y) in a hard-walled box (hbar = 1,
 * mass = 1), its norm-preserving time stepping, and the instantaneous
 * detector kick that writes the which-slit record.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tsmu/grid.hpp"

namespace tsmu {

enum class ApertureProfile : std::uint8_t {
    /// V = 0 inside |y - c| < sqrt(3) w, V0 elsewhere on the screen.
    Hard,
    /// V = min(V0, (1/2) omega^2 (y - c)^2) with omega = 1 / (2 w^2): a
    /// harmonic channel whose ground mode has |psi|^2 standard deviation w.
    Gaussian,
};

struct Aperture {
    double center = 0.0;
    /// Standard deviation of the transmitted |psi|^2 profile across the slit.
    double width = 0.0;
};

/// Screen geometry in physical units.
struct ScreenSpec {
    double x_start = 0.0;
    double thickness = 0.0;
    double barrier_height = 0.0;
    /// apertures[0] is the upper slit (U), apertures[1] the lower one (L).
    std::array<Aperture, 2> apertures{};
    ApertureProfile profile = ApertureProfile::Gaussian;
    /// Gaussian profile only: constant C added inside the channels, reached
    /// through sin^2 ramps of length offset_ramp at both faces. With C close
    /// to k^2/2 - 3 omega / 2 only the ground mode passes while the packet
    /// stays fast, hence paraxial, outside the screen.
    double channel_offset = 0.0;
    double offset_ramp = 0.0;
    /// Solid screen with no openings; used to validate the barrier height.
    bool closed = false;
};

/**
 * @brief The box-interior potential sampled on the grid.
 *
 * Zero away from the screen columns [screen_col_lo, screen_col_hi).
 */
struct PotentialField {
    std::vector<double> values;
    double barrier_height = 0.0;
    std::size_t screen_col_lo = 0;
    std::size_t screen_col_hi = 0;
    std::array<Aperture, 2> apertures{};
    ApertureProfile profile = ApertureProfile::Gaussian;

    [[nodiscard]] double separation() const noexcept {
        return apertures[0].center - apertures[1].center;
    }
    [[nodiscard]] double at(const GridSpec &g, std::size_t i, std::size_t j) const noexcept {
        return values[i * g.ny + j];
    }
};

/// Zero potential everywhere.
[[nodiscard]] PotentialField free_potential(const GridSpec &grid);

/// Throws ConfigError when the screen does not fit in the box.
[[nodiscard]] PotentialField build_potential(const GridSpec &grid, const ScreenSpec &screen);

/// Gaussian packet along x, uniform in y, detector in level 0.
struct PacketSpec {
    double x0 = 0.0;
    double sigma_x = 1.0;
    double k_x = 1.0;
    /// Free evolution over this time brings the packet to its minimum width
    /// sigma_x; 0 means the packet starts at minimum width.
    double focus_time = 0.0;
    /// Width of a sin^2 ramp from 0 to 1 at each y wall; 0 means a flat
    /// profile all the way to the walls.
    double y_taper = 0.0;

    /// Standard deviation of |phi(x)|^2 at the start.
    [[nodiscard]] double initial_width() const noexcept {
        const double r = focus_time / (2.0 * sigma_x * sigma_x);
        return sigma_x * std::sqrt(1.0 + r * r);
    }

    friend bool operator==(const PacketSpec &, const PacketSpec &) = default;
};

/// phi(x) f(y) in level m = 0 with f flat away from the walls, normalized
/// on the grid.
[[nodiscard]] WaveFunction initial_state(const GridSpec &grid, const PacketSpec &packet,
                                         double t0);

struct Schedule {
    double t0 = 0.0;
    double tS = 0.0;
    double tD = 0.0;
    double dt = 0.0;

    /// Throws ScheduleError unless t0 < tS < tD, dt > 0, and both legs are
    /// whole multiples of dt.
    void validate() const;
};

/// Number of steps of size dt in [t_from, t_to]; throws ScheduleError when
/// the interval is negative or not a whole multiple of dt.
[[nodiscard]] std::size_t step_count(double t_from, double t_to, double dt);

/// Index box [x_lo, x_hi) x [y_lo, y_hi).
struct CellWindow {
    std::size_t x_lo = 0;
    std::size_t x_hi = 0;
    std::size_t y_lo = 0;
    std::size_t y_hi = 0;

    [[nodiscard]] bool contains(std::size_t i, std::size_t j) const noexcept {
        return i >= x_lo && i < x_hi && j >= y_lo && j < y_hi;
    }
    [[nodiscard]] bool overlaps(const CellWindow &o) const noexcept {
        return x_lo < o.x_hi && o.x_lo < x_hi && y_lo < o.y_hi && o.y_lo < y_hi;
    }
    [[nodiscard]] bool empty() const noexcept { return x_lo >= x_hi || y_lo >= y_hi; }
};

/**
 * @brief Coupling between the detector and the radiation near each slit.
 *
 * theta = pi/2 writes a perfect record (level 1 in the upper window, level 2
 * in the lower one); theta = 0 leaves the detector untouched. The
 * wavelengths only fix the nominal level energies 1/lambda and do not enter
 * the idealized dynamics.
 */
struct DetectorCoupling {
    double theta = 0.0;
    CellWindow upper_window;
    CellWindow lower_window;
    double lambda_U = 0.1;
    double lambda_L = 0.2;

    /// Throws ConfigError on overlapping/empty windows or theta outside [0, pi/2].
    void validate() const;
};

/**
 * @brief Rotates level 0 into level 1 (upper window) and level 0 into level
 * 2 (lower window) by `angle`; unitary for every real angle.
 *
 * This is the primitive behind detector_kick; negative angles undo a kick.
 */
[[nodiscard]] WaveFunction detector_rotation(const DetectorCoupling &coupling, double angle,
                                             const WaveFunction &psi);

/// detector_rotation by coupling.theta, after validating the coupling.
[[nodiscard]] WaveFunction detector_kick(const DetectorCoupling &coupling,
                                         const WaveFunction &psi);

/**
 * @brief One time step of H as a product of two Cayley transforms.
 *
 * With A = -(1/2) d_xx + V/2 and B = -(1/2) d_yy + V/2 (three-point
 * differences, Dirichlet walls), one step is
 *   (1 + i dt/2 B)^-1 (1 - i dt/2 B) (1 + i dt/2 A)^-1 (1 - i dt/2 A),
 * each factor unitary. The tridiagonal factorizations of every grid line
 * are computed once. A plan is immutable and may be shared across threads.
 */
class PropagatorPlan {
  public:
    PropagatorPlan(const GridSpec &grid, const PotentialField &potential, double dt);

    [[nodiscard]] const GridSpec &grid() const noexcept { return grid_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }

    /// Advances one spatial channel (nx * ny values, j fastest) by `steps`.
    void advance_channel(std::span<Complex> channel, std::size_t steps) const;

  private:
    void sweep_x(std::span<Complex> psi, std::vector<Complex> &scratch) const;
    void sweep_y(std::span<Complex> psi, std::vector<Complex> &scratch) const;

    GridSpec grid_;
    double dt_;
    double off_x_;
    double off_y_;
    std::vector<double> diag_x_;
    std::vector<double> diag_y_;
    std::vector<Complex> cp_x_;
    std::vector<Complex> inv_x_;
    std::vector<Complex> cp_y_;
    std::vector<Complex> inv_y_;
};

/// Throws ShapeError when the potential does not match the grid.
[[nodiscard]] PropagatorPlan build_propagator(const GridSpec &grid,
                                              const PotentialField &potential, double dt);

/// Unitary evolution from t_from to t_to. Levels that are identically zero
/// stay zero and are skipped. The result is tagged t_to.
[[nodiscard]] WaveFunction propagate(const PropagatorPlan &plan, const WaveFunction &psi,
                                     double t_from, double t_to);

/// Evolution over [t_from, t_to] that applies the detector kick when tS is
/// crossed (tS in (t_from, t_to]); the state at tS is the post-kick one.
[[nodiscard]] WaveFunction evolve_with_kick(const PropagatorPlan &plan,
                                            const DetectorCoupling &coupling,
                                            const Schedule &schedule, const WaveFunction &psi,
                                            double t_from, double t_to);

struct TsmuRun {
    WaveFunction psi_tS_minus;
    WaveFunction psi_tS_plus;
    WaveFunction psi_tD;
};

/// t0 -> tS, kick, tS -> tD.
[[nodiscard]] TsmuRun run_tsmu(const PropagatorPlan &plan, const DetectorCoupling &coupling,
                               const Schedule &schedule, const WaveFunction &initial);

/// <x> of the total state (all levels).
[[nodiscard]] double mean_x(const WaveFunction &psi);

/// Standard deviation of x of the total state.
[[nodiscard]] double spread_x(const WaveFunction &psi);

/// Probability in columns >= col (all rows, all levels).
[[nodiscard]] double probability_right_of(const WaveFunction &psi, std::size_t col);

} // namespace tsmu
