#pragma once

#include "tsmu/scenario.hpp"

namespace tsmu::testing {

/// A coarse scenario that runs in about a second; physics is rough but every
/// exact identity holds on it.
inline ScenarioConfig small_config(double theta = 1.5707963267948966) {
    ScenarioConfig c;
    c.grid = GridSpec{192, 160, 76.8, 64.0};
    c.screen.x = 24.0;
    c.screen.thickness = 6.0;
    c.screen.offset_ramp = 2.0;
    c.screen.slit_separation = 8.0;
    c.packet = PacketSpec{12.0, 3.0, 1.5, 0.0, 4.0};
    c.coupling.theta = theta;
    c.schedule.flight_time = 10.0;
    c.schedule.dt = 0.05;
    return c;
}

/// Probe state: smooth complex amplitudes on all three levels.
inline WaveFunction probe_state(const GridSpec &g, double phase = 0.3) {
    WaveFunction w(g);
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            for (std::size_t j = 0; j < g.ny; ++j) {
                const double x = g.x_center(i) / g.lx;
                const double y = g.y_center(j) / g.ly;
                w.at(m, i, j) = std::polar(1.0 + x * y + 0.1 * static_cast<double>(m),
                                           phase * (3.0 * x - 2.0 * y + static_cast<double>(m)));
            }
        }
    }
    return w;
}

} // namespace tsmu::testing
