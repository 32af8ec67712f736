#pragma once

/**
 * @file
 * Discretized configuration space of the observer centre of mass (x, y)
 * and the three-level detector m, with the state algebra used everywhere
 * else: inner products, norms, linear combinations and mask projectors.
 */

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tsmu {

using Complex = std::complex<double>;

inline constexpr std::size_t kDetectorLevels = 3;

/**
 * @brief Uniform cell-centred grid over the box [0, lx) x [0, ly).
 *
 * Cell (i, j) sits at ((i + 1/2) dx, (j + 1/2) dy); the hard walls are at
 * x = 0, lx and y = 0, ly.
 */
struct GridSpec {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double lx = 0.0;
    double ly = 0.0;

    /// Throws ShapeError unless nx, ny >= 8 and both lengths are positive.
    void validate() const;

    [[nodiscard]] double dx() const noexcept { return lx / static_cast<double>(nx); }
    [[nodiscard]] double dy() const noexcept { return ly / static_cast<double>(ny); }
    [[nodiscard]] double cell_volume() const noexcept { return dx() * dy(); }
    [[nodiscard]] double x_center(std::size_t i) const noexcept {
        return (static_cast<double>(i) + 0.5) * dx();
    }
    [[nodiscard]] double y_center(std::size_t j) const noexcept {
        return (static_cast<double>(j) + 0.5) * dy();
    }
    [[nodiscard]] std::size_t spatial_size() const noexcept { return nx * ny; }
    [[nodiscard]] std::size_t size() const noexcept { return kDetectorLevels * nx * ny; }
    /// Flat index; y is the fastest-varying axis.
    [[nodiscard]] std::size_t index(std::size_t m, std::size_t i, std::size_t j) const noexcept {
        return (m * nx + i) * ny + j;
    }

    friend bool operator==(const GridSpec &, const GridSpec &) = default;
};

/// Psi(x, y, m) sampled on a GridSpec, tagged with the time it refers to.
class WaveFunction {
  public:
    WaveFunction() = default;
    /// Zero state.
    explicit WaveFunction(GridSpec grid, double time_tag = 0.0);
    /// Takes ownership of `amps`; throws ShapeError on size mismatch and
    /// UsageError on non-finite entries.
    WaveFunction(GridSpec grid, std::vector<Complex> amps, double time_tag = 0.0);

    [[nodiscard]] const GridSpec &grid() const noexcept { return grid_; }
    [[nodiscard]] double time_tag() const noexcept { return time_tag_; }
    void set_time_tag(double t) noexcept { time_tag_ = t; }

    [[nodiscard]] std::span<const Complex> amps() const noexcept { return amps_; }
    [[nodiscard]] std::span<Complex> amps() noexcept { return amps_; }

    /// Amplitudes of one detector level, laid out (i, j) with j fastest.
    [[nodiscard]] std::span<const Complex> channel(std::size_t m) const noexcept {
        return {amps_.data() + m * grid_.spatial_size(), grid_.spatial_size()};
    }
    [[nodiscard]] std::span<Complex> channel(std::size_t m) noexcept {
        return {amps_.data() + m * grid_.spatial_size(), grid_.spatial_size()};
    }

    [[nodiscard]] Complex at(std::size_t m, std::size_t i, std::size_t j) const noexcept {
        return amps_[grid_.index(m, i, j)];
    }
    Complex &at(std::size_t m, std::size_t i, std::size_t j) noexcept {
        return amps_[grid_.index(m, i, j)];
    }

    /// True when every amplitude of level m is exactly zero.
    [[nodiscard]] bool channel_is_zero(std::size_t m) const noexcept;
    [[nodiscard]] bool all_finite() const noexcept;

  private:
    GridSpec grid_{};
    std::vector<Complex> amps_;
    double time_tag_ = 0.0;
};

enum class ProjectorKind : std::uint8_t {
    Identity,
    YInterval,
    SlitSelector,
    XWindow,
    DetectorLevel,
    Composite,
};

/**
 * @brief Configuration-diagonal projector.
 *
 * Every projector used by the model is an indicator of a product set
 * X-window x Y-window x {levels}, so the mask is stored per axis. The cell
 * (m, i, j) is kept iff xmask[i] && ymask[j] && mmask[m].
 */
struct Projector {
    std::string label;
    ProjectorKind kind = ProjectorKind::Identity;
    std::vector<std::uint8_t> xmask;
    std::vector<std::uint8_t> ymask;
    std::array<std::uint8_t, kDetectorLevels> mmask{1, 1, 1};

    [[nodiscard]] bool contains(std::size_t m, std::size_t i, std::size_t j) const noexcept {
        return mmask[m] != 0 && xmask[i] != 0 && ymask[j] != 0;
    }
    [[nodiscard]] std::size_t cell_count() const noexcept;
    [[nodiscard]] bool matches(const GridSpec &grid) const noexcept {
        return xmask.size() == grid.nx && ymask.size() == grid.ny;
    }
    /// True when the two kept sets share no cell.
    [[nodiscard]] bool disjoint_from(const Projector &other) const noexcept;
};

/// Projector keeping every cell.
[[nodiscard]] Projector identity_projector(const GridSpec &grid);

/// Product set (set intersection); the label is "a&b".
[[nodiscard]] Projector intersect(const Projector &a, const Projector &b);

/// A validated exclusive and exhaustive set of projectors.
struct ProjectorFamily {
    std::string name;
    std::vector<Projector> members;

    [[nodiscard]] std::size_t size() const noexcept { return members.size(); }
    /// Index of the member with the given label; throws UsageError.
    [[nodiscard]] std::size_t find(const std::string &label) const;
};

/**
 * @brief Builds a family from candidate projectors.
 *
 * Throws PartitionError when two members overlap, when the union does not
 * cover every cell, or when labels repeat.
 */
[[nodiscard]] ProjectorFamily make_projector_family(const GridSpec &grid, std::string name,
                                                    std::vector<Projector> members);

/// Y-interval bins of `rows_per_bin` grid rows each (the last one may be
/// shorter), labelled "Y=0", "Y=1", ...
[[nodiscard]] ProjectorFamily y_bin_family(const GridSpec &grid, std::size_t rows_per_bin);

/// {m=0}, {m=1}, {m=2}.
[[nodiscard]] ProjectorFamily detector_family(const GridSpec &grid);

/**
 * @brief Which-slit alternatives {U, L, blocked}.
 *
 * U keeps columns >= screen_col with rows >= split_row (the half holding the
 * upper aperture), L the same columns below split_row, and "blocked" every
 * column left of the screen.
 */
[[nodiscard]] ProjectorFamily slit_family(const GridSpec &grid, std::size_t screen_col,
                                          std::size_t split_row);

/// Arrival alternatives at the far side: "Y=k" restricted to columns >=
/// far_col, plus "away" for every column left of it.
[[nodiscard]] ProjectorFamily arrival_family(const GridSpec &grid, std::size_t far_col,
                                             std::size_t rows_per_bin);

/// Every non-empty pairwise intersection, labels "a&b", ordered a-major.
[[nodiscard]] ProjectorFamily product_family(const GridSpec &grid, const ProjectorFamily &a,
                                             const ProjectorFamily &b);

/// Discretized <a|b> = sum_m sum_cells conj(a) b dx dy.
[[nodiscard]] Complex inner_product(const WaveFunction &a, const WaveFunction &b);

[[nodiscard]] double norm_sq(const WaveFunction &a);

/// Pointwise sum of coefficient * state. The result carries the time tag of
/// the first term.
[[nodiscard]] WaveFunction linear_combine(std::span<const std::pair<Complex, WaveFunction>> terms);

/// sqrt(norm_sq(a - b)).
[[nodiscard]] double l2_distance(const WaveFunction &a, const WaveFunction &b);

[[nodiscard]] WaveFunction apply_projector(const Projector &p, const WaveFunction &a);

/// In-place variant used on hot paths.
void apply_projector_inplace(const Projector &p, WaveFunction &a);

/// Reflection y -> ly - y (row j -> ny - 1 - j).
[[nodiscard]] WaveFunction mirror_y(const WaveFunction &a);

} // namespace tsmu
