#include <catch_amalgamated.hpp>

#include <numbers>

#include "support.hpp"
#include "tsmu/dynamics.hpp"
#include "tsmu/errors.hpp"
#include "tsmu/scenario.hpp"

using namespace tsmu;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

WaveFunction box_mode(const GridSpec &g, std::size_t p, std::size_t q) {
    WaveFunction w(g);
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.ny; ++j) {
            w.at(0, i, j) =
                std::sin(kPi * static_cast<double>(p) * g.x_center(i) / g.lx) *
                std::sin(kPi * static_cast<double>(q) * g.y_center(j) / g.ly);
        }
    }
    return w;
}

WaveFunction gaussian_blob(const GridSpec &g, double x0, double y0, double s, double kx,
                           std::size_t m = 0) {
    WaveFunction w(g);
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.ny; ++j) {
            const double u = g.x_center(i) - x0;
            const double v = g.y_center(j) - y0;
            w.at(m, i, j) = std::exp(-(u * u + v * v) / (4.0 * s * s)) * std::polar(1.0, kx * u);
        }
    }
    return w;
}

DetectorCoupling halves(const GridSpec &g, std::size_t col, double theta) {
    DetectorCoupling c;
    c.theta = theta;
    c.upper_window = {col, g.nx, g.ny / 2, g.ny};
    c.lower_window = {col, g.nx, 0, g.ny / 2};
    return c;
}

} // namespace

TEST_CASE("one free step multiplies a box mode by the Cayley factor of its discrete eigenvalues") {
    const GridSpec g{40, 32, 10.0, 8.0};
    const double dt = 0.07;
    const PropagatorPlan plan = build_propagator(g, free_potential(g), dt);
    const std::size_t p = 3;
    const std::size_t q = 2;
    const WaveFunction mode = box_mode(g, p, q);
    const WaveFunction next = propagate(plan, mode, 0.0, dt);

    auto factor = [&](std::size_t n, double h, std::size_t r) {
        const double lambda =
            (1.0 - std::cos(kPi * static_cast<double>(r) / static_cast<double>(n))) / (h * h);
        const Complex z{0.0, 0.5 * dt * lambda};
        return (1.0 - z) / (1.0 + z);
    };
    const Complex expected = factor(g.nx, g.dx(), p) * factor(g.ny, g.dy(), q);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.spatial_size(); ++k) {
        worst = std::max(worst, std::abs(next.amps()[k] - expected * mode.amps()[k]));
    }
    REQUIRE(worst < 1e-12);
}

TEST_CASE("two steps of dt match one step of 2 dt to third order") {
    const GridSpec g{96, 64, 24.0, 16.0};
    const WaveFunction psi = gaussian_blob(g, 12.0, 8.0, 1.0, 0.5);
    auto gap = [&](double dt) {
        const PropagatorPlan fine = build_propagator(g, free_potential(g), dt);
        const PropagatorPlan coarse = build_propagator(g, free_potential(g), 2.0 * dt);
        return l2_distance(propagate(fine, psi, 0.0, 2.0 * dt),
                           propagate(coarse, psi, 0.0, 2.0 * dt));
    };
    const double big = gap(0.04);
    const double small = gap(0.02);
    REQUIRE(big < 1e-4);
    REQUIRE(big / small > 6.0);
    REQUIRE(big / small < 10.0);
}

TEST_CASE("a step preserves the norm of an arbitrary state") {
    const ScenarioConfig c = testing::small_config();
    const Scenario sc(c);
    const WaveFunction psi = testing::probe_state(c.grid);
    const WaveFunction next = propagate(sc.plan(), psi, 0.0, c.schedule.dt);
    REQUIRE(std::abs(norm_sq(next) - norm_sq(psi)) / norm_sq(psi) < 1e-12);
    REQUIRE(next.time_tag() == Approx(c.schedule.dt));
}

TEST_CASE("propagating over an empty interval is the identity") {
    const GridSpec g{32, 32, 8.0, 8.0};
    const PropagatorPlan plan = build_propagator(g, free_potential(g), 0.1);
    const WaveFunction psi = gaussian_blob(g, 4.0, 4.0, 1.0, 1.0);
    REQUIRE(l2_distance(propagate(plan, psi, 1.0, 1.0), psi) == 0.0);
}

TEST_CASE("intervals off the dt lattice are schedule errors") {
    const GridSpec g{32, 32, 8.0, 8.0};
    const PropagatorPlan plan = build_propagator(g, free_potential(g), 0.1);
    const WaveFunction psi = gaussian_blob(g, 4.0, 4.0, 1.0, 1.0);
    REQUIRE_THROWS_AS(propagate(plan, psi, 0.0, 0.25), ScheduleError);
    REQUIRE_THROWS_AS(propagate(plan, psi, 0.5, 0.2), ScheduleError);
    REQUIRE(step_count(0.0, 1.0, 0.1) == 10);
}

TEST_CASE("a potential of the wrong shape is a shape error") {
    const GridSpec g{32, 32, 8.0, 8.0};
    PotentialField v = free_potential(GridSpec{16, 16, 8.0, 8.0});
    REQUIRE_THROWS_AS(build_propagator(g, v, 0.1), ShapeError);
}

TEST_CASE("free packet spreads like the analytic Gaussian") {
    const GridSpec g{512, 16, 102.4, 3.2};
    const PacketSpec packet{30.0, 2.0, 0.5, 0.0, 0.0};
    const WaveFunction psi0 = initial_state(g, packet, 0.0);
    REQUIRE(spread_x(psi0) == Approx(2.0).epsilon(1e-3));
    const PropagatorPlan plan = build_propagator(g, free_potential(g), 0.02);
    const double t = 8.0;
    const WaveFunction psi = propagate(plan, psi0, 0.0, t);
    const double expected = 2.0 * std::sqrt(1.0 + std::pow(t / (2.0 * 4.0), 2));
    REQUIRE(spread_x(psi) == Approx(expected).epsilon(0.01));
    REQUIRE(mean_x(psi) == Approx(30.0 + 0.5 * t).epsilon(0.01));
}

TEST_CASE("a focusing packet reaches its minimum width at the focus time") {
    const GridSpec g{512, 16, 102.4, 3.2};
    const PacketSpec packet{30.0, 2.0, 1.0, 6.0, 0.0};
    const WaveFunction psi0 = initial_state(g, packet, 0.0);
    REQUIRE(spread_x(psi0) == Approx(packet.initial_width()).epsilon(1e-3));
    const PropagatorPlan plan = build_propagator(g, free_potential(g), 0.02);
    REQUIRE(spread_x(propagate(plan, psi0, 0.0, 6.0)) == Approx(2.0).epsilon(0.01));
}

TEST_CASE("the default barrier height stops a packet aimed at a closed screen") {
    ScenarioConfig c = testing::small_config();
    c.screen.closed = true;
    const Scenario sc(c);
    REQUIRE(sc.potential().barrier_height == Approx(50.0 * 0.5 * 1.5 * 1.5));
    const WaveFunction psi = propagate(sc.plan(), sc.initial(), 0.0, sc.schedule().tD);
    REQUIRE(probability_right_of(psi, sc.potential().screen_col_hi) < 1e-3);
}

TEST_CASE("the screen potential is zero off the screen, V0 far from the slits, harmonic inside") {
    const ScenarioConfig c = testing::small_config();
    const Scenario sc(c);
    const PotentialField &v = sc.potential();
    const GridSpec &g = c.grid;
    REQUIRE(v.at(g, v.screen_col_lo - 1, 10) == 0.0);
    REQUIRE(v.at(g, v.screen_col_hi, 10) == 0.0);
    REQUIRE(v.at(g, v.screen_col_lo, 0) == v.barrier_height);
    REQUIRE(v.separation() == Approx(8.0));
    // Channel floor: the offset plus the harmonic term at the nearest row centre.
    const std::size_t mid = (v.screen_col_lo + v.screen_col_hi) / 2;
    const double omega = 0.5;
    const double offset = 0.5 * 1.5 * 1.5 - 1.5 * omega;
    const std::size_t row = static_cast<std::size_t>(v.apertures[0].center / g.dy());
    const double u = g.y_center(row) - v.apertures[0].center;
    REQUIRE(v.at(g, mid, row) == Approx(offset + 0.5 * omega * omega * u * u));
}

TEST_CASE("hard apertures are open inside sqrt(3) w of the centre") {
    const GridSpec g{64, 64, 32.0, 32.0};
    ScreenSpec s;
    s.x_start = 10.0;
    s.thickness = 2.0;
    s.barrier_height = 100.0;
    s.apertures = {Aperture{20.0, 1.0}, Aperture{12.0, 1.0}};
    s.profile = ApertureProfile::Hard;
    const PotentialField v = build_potential(g, s);
    const std::size_t col = v.screen_col_lo;
    REQUIRE(v.at(g, col, 40) == 0.0);
    REQUIRE(v.at(g, col, 43) == 100.0);
    REQUIRE(v.at(g, col, 24) == 0.0);
    REQUIRE(v.at(g, col, 32) == 100.0);
    s.apertures = {Aperture{12.0, 1.0}, Aperture{20.0, 1.0}};
    REQUIRE_THROWS_AS(build_potential(g, s), ConfigError);
    s.x_start = 40.0;
    REQUIRE_THROWS_AS(build_potential(g, s), ConfigError);
}

TEST_CASE("detector kick examples") {
    const GridSpec g{16, 16, 4.0, 4.0};
    const WaveFunction psi = gaussian_blob(g, 3.0, 3.0, 0.3, 0.0);

    SECTION("theta 0 is the identity") {
        REQUIRE(l2_distance(detector_kick(halves(g, 8, 0.0), psi), psi) == 0.0);
    }
    SECTION("theta pi/2 moves a state inside the upper window to level 1") {
        WaveFunction up(g);
        up.at(0, 12, 12) = Complex{0.5, -0.25};
        up.at(0, 9, 8) = 2.0;
        const WaveFunction k = detector_kick(halves(g, 8, kPi / 2.0), up);
        REQUIRE(k.channel_is_zero(0));
        REQUIRE(k.channel_is_zero(2));
        REQUIRE(k.at(1, 12, 12) == Complex{0.5, -0.25});
        REQUIRE(k.at(1, 9, 8) == Complex{2.0, 0.0});
    }
    SECTION("theta pi/4 splits a lower-window cell evenly between levels 0 and 2") {
        WaveFunction low(g);
        low.at(0, 10, 2) = 1.0;
        const WaveFunction k = detector_kick(halves(g, 8, kPi / 4.0), low);
        REQUIRE(k.at(0, 10, 2).real() == Approx(std::sqrt(0.5)));
        REQUIRE(k.at(2, 10, 2).real() == Approx(std::sqrt(0.5)));
        REQUIRE(k.channel_is_zero(1));
    }
    SECTION("the kick is unitary and undone by the opposite angle") {
        const WaveFunction mixed = testing::probe_state(g);
        const DetectorCoupling c = halves(g, 5, 0.7);
        const WaveFunction k = detector_kick(c, mixed);
        REQUIRE(norm_sq(k) == Approx(norm_sq(mixed)).epsilon(1e-14));
        REQUIRE(l2_distance(detector_rotation(c, -0.7, k), mixed) < 1e-13);
    }
    SECTION("cells outside both windows are untouched") {
        const WaveFunction k = detector_kick(halves(g, 8, 1.0), psi);
        for (std::size_t i = 0; i < 8; ++i) {
            for (std::size_t j = 0; j < g.ny; ++j) {
                REQUIRE(k.at(0, i, j) == psi.at(0, i, j));
            }
        }
    }
    SECTION("overlapping windows and out-of-range angles are config errors") {
        DetectorCoupling c = halves(g, 8, 1.0);
        c.lower_window.y_hi = g.ny / 2 + 1;
        REQUIRE_THROWS_AS(detector_kick(c, psi), ConfigError);
        REQUIRE_THROWS_AS(detector_kick(halves(g, 8, 2.0), psi), ConfigError);
    }
}

TEST_CASE("the detector index is conserved by propagation") {
    const ScenarioConfig c = testing::small_config();
    const Scenario sc(c);
    const WaveFunction psi = testing::probe_state(c.grid);
    const ProjectorFamily levels = detector_family(c.grid);
    const WaveFunction later = propagate(sc.plan(), psi, 0.0, 1.0);
    for (const Projector &p : levels.members) {
        const WaveFunction a = apply_projector(p, later);
        const WaveFunction b = propagate(sc.plan(), apply_projector(p, psi), 0.0, 1.0);
        REQUIRE(l2_distance(a, b) < 1e-13);
    }
}

TEST_CASE("run_tsmu examples") {
    SECTION("perfect records make the two detector components orthogonal") {
        const Scenario sc(testing::small_config());
        const TsmuRun run = run_tsmu(sc.plan(), sc.coupling(), sc.schedule(), sc.initial());
        WaveFunction up(sc.grid());
        WaveFunction low(sc.grid());
        std::copy(run.psi_tD.channel(1).begin(), run.psi_tD.channel(1).end(),
                  up.channel(1).begin());
        std::copy(run.psi_tD.channel(2).begin(), run.psi_tD.channel(2).end(),
                  low.channel(2).begin());
        REQUIRE(norm_sq(up) > 1e-3);
        REQUIRE(inner_product(up, low) == Complex{0.0, 0.0});
        REQUIRE(std::abs(norm_sq(run.psi_tD) - 1.0) < 1e-8);
        REQUIRE(run.psi_tS_minus.channel_is_zero(1));
        REQUIRE_FALSE(run.psi_tS_plus.channel_is_zero(1));
    }
    SECTION("no coupling leaves the detector in level 0") {
        const Scenario sc(testing::small_config(0.0));
        const TsmuRun run = run_tsmu(sc.plan(), sc.coupling(), sc.schedule(), sc.initial());
        REQUIRE(run.psi_tD.channel_is_zero(1));
        REQUIRE(run.psi_tD.channel_is_zero(2));
    }
}

TEST_CASE("mirroring the state about the midline commutes with the symmetric dynamics") {
    const ScenarioConfig c = testing::small_config();
    const Scenario sc(c);
    WaveFunction psi = sc.initial();
    for (std::size_t i = 0; i < c.grid.nx; ++i) {
        for (std::size_t j = 0; j < c.grid.ny; ++j) {
            psi.at(0, i, j) *= 1.0 + 0.2 * c.grid.y_center(j) / c.grid.ly;
        }
    }
    const WaveFunction a = mirror_y(propagate(sc.plan(), psi, 0.0, 15.0));
    const WaveFunction b = propagate(sc.plan(), mirror_y(psi), 0.0, 15.0);
    REQUIRE(l2_distance(a, b) < 1e-10);
}
