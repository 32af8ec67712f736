#include "tsmu/bins.hpp"

#include <cmath>

#include "tsmu/errors.hpp"

namespace tsmu {

BinSpec make_bin_spec(const GridSpec &grid, double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ConfigError("bins.delta", "must be positive");
    }
    const double rows = delta / grid.dy();
    const double whole = std::round(rows);
    if (whole < 1.0 || std::abs(rows - whole) > 1e-9 * std::max(1.0, rows)) {
        throw ConfigError("bins.delta", "must be a whole multiple of dy = " +
                                            std::to_string(grid.dy()));
    }
    if (whole > static_cast<double>(grid.ny)) {
        throw ConfigError("bins.delta", "exceeds the box height");
    }
    BinSpec b;
    b.delta = delta;
    b.rows_per_bin = static_cast<std::size_t>(whole);
    b.count = (grid.ny + b.rows_per_bin - 1) / b.rows_per_bin;
    b.ly = grid.ly;
    b.ny = grid.ny;
    return b;
}

} // namespace tsmu
