#include "tsmu/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "tsmu/errors.hpp"

namespace tsmu {

namespace {

std::size_t count_set(std::span<const std::uint8_t> mask) {
    return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(),
                                                  [](std::uint8_t v) { return v != 0; }));
}

bool axis_disjoint(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] != 0 && b[k] != 0) {
            return false;
        }
    }
    return true;
}

void require_same_grid(const GridSpec &a, const GridSpec &b, const char *what) {
    if (!(a == b)) {
        throw ShapeError(std::string(what) + ": grid mismatch");
    }
}

Projector full_projector(const GridSpec &grid, std::string label, ProjectorKind kind) {
    Projector p;
    p.label = std::move(label);
    p.kind = kind;
    p.xmask.assign(grid.nx, 1);
    p.ymask.assign(grid.ny, 1);
    return p;
}

} // namespace

void GridSpec::validate() const {
    if (nx < 8 || ny < 8) {
        throw ShapeError("grid needs at least 8 samples per axis");
    }
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
        throw ShapeError("grid box lengths must be positive and finite");
    }
}

WaveFunction::WaveFunction(GridSpec grid, double time_tag)
    : grid_(grid), amps_(grid.size(), Complex{0.0, 0.0}), time_tag_(time_tag) {}

WaveFunction::WaveFunction(GridSpec grid, std::vector<Complex> amps, double time_tag)
    : grid_(grid), amps_(std::move(amps)), time_tag_(time_tag) {
    if (amps_.size() != grid_.size()) {
        throw ShapeError("amplitude array does not match grid shape");
    }
    if (!all_finite()) {
        throw UsageError("non-finite amplitude in wave function");
    }
}

bool WaveFunction::channel_is_zero(std::size_t m) const noexcept {
    const auto ch = channel(m);
    return std::all_of(ch.begin(), ch.end(),
                       [](const Complex &z) { return z.real() == 0.0 && z.imag() == 0.0; });
}

bool WaveFunction::all_finite() const noexcept {
    return std::all_of(amps_.begin(), amps_.end(), [](const Complex &z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

std::size_t Projector::cell_count() const noexcept {
    return count_set(xmask) * count_set(ymask) * count_set(mmask);
}

bool Projector::disjoint_from(const Projector &other) const noexcept {
    return axis_disjoint(xmask, other.xmask) || axis_disjoint(ymask, other.ymask) ||
           axis_disjoint(mmask, other.mmask);
}

Projector identity_projector(const GridSpec &grid) {
    return full_projector(grid, "I", ProjectorKind::Identity);
}

Projector intersect(const Projector &a, const Projector &b) {
    if (a.xmask.size() != b.xmask.size() || a.ymask.size() != b.ymask.size()) {
        throw ShapeError("intersect: mask shape mismatch");
    }
    Projector p;
    if (a.kind == ProjectorKind::Identity) {
        p = b;
        return p;
    }
    if (b.kind == ProjectorKind::Identity) {
        p = a;
        return p;
    }
    p.label = a.label + "&" + b.label;
    p.kind = ProjectorKind::Composite;
    p.xmask.resize(a.xmask.size());
    p.ymask.resize(a.ymask.size());
    for (std::size_t i = 0; i < a.xmask.size(); ++i) {
        p.xmask[i] = static_cast<std::uint8_t>(a.xmask[i] & b.xmask[i]);
    }
    for (std::size_t j = 0; j < a.ymask.size(); ++j) {
        p.ymask[j] = static_cast<std::uint8_t>(a.ymask[j] & b.ymask[j]);
    }
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        p.mmask[m] = static_cast<std::uint8_t>(a.mmask[m] & b.mmask[m]);
    }
    return p;
}

std::size_t ProjectorFamily::find(const std::string &label) const {
    for (std::size_t k = 0; k < members.size(); ++k) {
        if (members[k].label == label) {
            return k;
        }
    }
    throw UsageError("family '" + name + "' has no alternative '" + label + "'");
}

ProjectorFamily make_projector_family(const GridSpec &grid, std::string name,
                                      std::vector<Projector> members) {
    if (members.empty()) {
        throw PartitionError("family '" + name + "' is empty");
    }
    std::set<std::string> labels;
    std::size_t covered = 0;
    for (const auto &p : members) {
        if (!p.matches(grid)) {
            throw ShapeError("family '" + name + "': mask of '" + p.label +
                             "' does not match grid");
        }
        if (!labels.insert(p.label).second) {
            throw PartitionError("family '" + name + "': duplicate label '" + p.label + "'");
        }
        covered += p.cell_count();
    }
    // Pairwise disjoint and total count equal to the cell count means the
    // members tile the configuration space exactly.
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            if (!members[a].disjoint_from(members[b])) {
                throw PartitionError("family '" + name + "': '" + members[a].label +
                                     "' overlaps '" + members[b].label + "'");
            }
        }
    }
    if (covered != grid.size()) {
        throw PartitionError("family '" + name + "' does not cover configuration space");
    }
    return ProjectorFamily{std::move(name), std::move(members)};
}

ProjectorFamily y_bin_family(const GridSpec &grid, std::size_t rows_per_bin) {
    if (rows_per_bin == 0) {
        throw PartitionError("Y bins need at least one row");
    }
    std::vector<Projector> bins;
    for (std::size_t lo = 0, k = 0; lo < grid.ny; lo += rows_per_bin, ++k) {
        Projector p = full_projector(grid, "Y=" + std::to_string(k), ProjectorKind::YInterval);
        std::fill(p.ymask.begin(), p.ymask.end(), 0);
        const std::size_t hi = std::min(grid.ny, lo + rows_per_bin);
        std::fill(p.ymask.begin() + static_cast<std::ptrdiff_t>(lo),
                  p.ymask.begin() + static_cast<std::ptrdiff_t>(hi), 1);
        bins.push_back(std::move(p));
    }
    return make_projector_family(grid, "Y", std::move(bins));
}

ProjectorFamily detector_family(const GridSpec &grid) {
    std::vector<Projector> levels;
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        Projector p = full_projector(grid, "m=" + std::to_string(m), ProjectorKind::DetectorLevel);
        p.mmask = {0, 0, 0};
        p.mmask[m] = 1;
        levels.push_back(std::move(p));
    }
    return make_projector_family(grid, "detector", std::move(levels));
}

ProjectorFamily slit_family(const GridSpec &grid, std::size_t screen_col, std::size_t split_row) {
    if (screen_col == 0 || screen_col >= grid.nx || split_row == 0 || split_row >= grid.ny) {
        throw PartitionError("slit family: screen column or split row outside the grid");
    }
    Projector upper = full_projector(grid, "U", ProjectorKind::SlitSelector);
    Projector lower = full_projector(grid, "L", ProjectorKind::SlitSelector);
    Projector blocked = full_projector(grid, "blocked", ProjectorKind::SlitSelector);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const std::uint8_t right = i >= screen_col ? 1 : 0;
        upper.xmask[i] = right;
        lower.xmask[i] = right;
        blocked.xmask[i] = static_cast<std::uint8_t>(1 - right);
    }
    for (std::size_t j = 0; j < grid.ny; ++j) {
        upper.ymask[j] = j >= split_row ? 1 : 0;
        lower.ymask[j] = j < split_row ? 1 : 0;
    }
    return make_projector_family(grid, "slit",
                                 {std::move(upper), std::move(lower), std::move(blocked)});
}

ProjectorFamily arrival_family(const GridSpec &grid, std::size_t far_col,
                               std::size_t rows_per_bin) {
    if (far_col == 0 || far_col >= grid.nx) {
        throw PartitionError("arrival family: far column outside the grid");
    }
    Projector far = full_projector(grid, "far", ProjectorKind::XWindow);
    Projector away = full_projector(grid, "away", ProjectorKind::XWindow);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        far.xmask[i] = i >= far_col ? 1 : 0;
        away.xmask[i] = i < far_col ? 1 : 0;
    }
    const ProjectorFamily bins = y_bin_family(grid, rows_per_bin);
    std::vector<Projector> members;
    members.reserve(bins.size() + 1);
    for (const auto &bin : bins.members) {
        Projector p = intersect(far, bin);
        p.label = bin.label;
        members.push_back(std::move(p));
    }
    members.push_back(std::move(away));
    return make_projector_family(grid, "arrival", std::move(members));
}

ProjectorFamily product_family(const GridSpec &grid, const ProjectorFamily &a,
                               const ProjectorFamily &b) {
    std::vector<Projector> members;
    for (const auto &pa : a.members) {
        for (const auto &pb : b.members) {
            Projector p = intersect(pa, pb);
            if (p.cell_count() == 0) {
                continue;
            }
            p.label = pa.label + "&" + pb.label;
            p.kind = ProjectorKind::Composite;
            members.push_back(std::move(p));
        }
    }
    return make_projector_family(grid, a.name + "*" + b.name, std::move(members));
}

Complex inner_product(const WaveFunction &a, const WaveFunction &b) {
    require_same_grid(a.grid(), b.grid(), "inner_product");
    const auto x = a.amps();
    const auto y = b.amps();
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double ar = x[k].real();
        const double ai = x[k].imag();
        const double br = y[k].real();
        const double bi = y[k].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    const double w = a.grid().cell_volume();
    return {re * w, im * w};
}

double norm_sq(const WaveFunction &a) {
    double s = 0.0;
    for (const auto &z : a.amps()) {
        s += z.real() * z.real() + z.imag() * z.imag();
    }
    return s * a.grid().cell_volume();
}

WaveFunction linear_combine(std::span<const std::pair<Complex, WaveFunction>> terms) {
    if (terms.empty()) {
        throw UsageError("linear_combine: empty term list");
    }
    const GridSpec &grid = terms.front().second.grid();
    WaveFunction out(grid, terms.front().second.time_tag());
    auto dst = out.amps();
    for (const auto &[c, psi] : terms) {
        require_same_grid(grid, psi.grid(), "linear_combine");
        const auto src = psi.amps();
        for (std::size_t k = 0; k < dst.size(); ++k) {
            dst[k] += c * src[k];
        }
    }
    return out;
}

double l2_distance(const WaveFunction &a, const WaveFunction &b) {
    require_same_grid(a.grid(), b.grid(), "l2_distance");
    const auto x = a.amps();
    const auto y = b.amps();
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        s += std::norm(x[k] - y[k]);
    }
    return std::sqrt(s * a.grid().cell_volume());
}

void apply_projector_inplace(const Projector &p, WaveFunction &a) {
    const GridSpec &g = a.grid();
    if (!p.matches(g)) {
        throw ShapeError("apply_projector: mask does not match grid");
    }
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        auto ch = a.channel(m);
        if (p.mmask[m] == 0) {
            std::fill(ch.begin(), ch.end(), Complex{0.0, 0.0});
            continue;
        }
        for (std::size_t i = 0; i < g.nx; ++i) {
            Complex *row = ch.data() + i * g.ny;
            if (p.xmask[i] == 0) {
                std::fill(row, row + g.ny, Complex{0.0, 0.0});
                continue;
            }
            for (std::size_t j = 0; j < g.ny; ++j) {
                if (p.ymask[j] == 0) {
                    row[j] = Complex{0.0, 0.0};
                }
            }
        }
    }
}

WaveFunction apply_projector(const Projector &p, const WaveFunction &a) {
    WaveFunction out = a;
    apply_projector_inplace(p, out);
    return out;
}

WaveFunction mirror_y(const WaveFunction &a) {
    const GridSpec &g = a.grid();
    WaveFunction out(g, a.time_tag());
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            for (std::size_t j = 0; j < g.ny; ++j) {
                out.at(m, i, g.ny - 1 - j) = a.at(m, i, j);
            }
        }
    }
    return out;
}

} // namespace tsmu
