#pragma once

#include <cstddef>

#include "tsmu/grid.hpp"

namespace tsmu {

/**
 * @brief Arrival intervals of width delta along y.
 *
 * delta is a whole number of grid rows; the last interval is shorter when
 * ny is not a multiple of rows_per_bin. Row j belongs to the interval whose
 * half-open range [y_lo, y_hi) contains its centre.
 */
struct BinSpec {
    double delta = 0.0;
    std::size_t rows_per_bin = 0;
    std::size_t count = 0;
    double ly = 0.0;
    std::size_t ny = 0;

    [[nodiscard]] std::size_t row_lo(std::size_t k) const noexcept { return k * rows_per_bin; }
    [[nodiscard]] std::size_t row_hi(std::size_t k) const noexcept {
        const std::size_t hi = (k + 1) * rows_per_bin;
        return hi < ny ? hi : ny;
    }
    [[nodiscard]] double y_lo(std::size_t k) const noexcept {
        return ly * static_cast<double>(row_lo(k)) / static_cast<double>(ny);
    }
    [[nodiscard]] double y_hi(std::size_t k) const noexcept {
        return ly * static_cast<double>(row_hi(k)) / static_cast<double>(ny);
    }
    [[nodiscard]] double y_center(std::size_t k) const noexcept {
        return 0.5 * (y_lo(k) + y_hi(k));
    }
};

/// Throws ConfigError("bins.delta") unless delta is a positive whole
/// multiple of dy no larger than ly.
[[nodiscard]] BinSpec make_bin_spec(const GridSpec &grid, double delta);

} // namespace tsmu
