#include "tsmu/histories.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "tsmu/errors.hpp"

namespace tsmu {

/// Lazily filled Hermitian matrix of overlaps between branch terms.
class TermGram {
  public:
    TermGram(std::vector<std::shared_ptr<const WaveFunction>> bases,
             std::vector<BranchTerm> terms)
        : bases_(std::move(bases)), terms_(std::move(terms)) {}

    const std::vector<Complex> &matrix();

  private:
    std::vector<std::shared_ptr<const WaveFunction>> bases_;
    std::vector<BranchTerm> terms_;
    std::vector<Complex> values_;
    bool filled_ = false;
};

namespace {

std::vector<std::size_t> set_indices(const std::vector<std::uint8_t> &a,
                                     const std::vector<std::uint8_t> &b) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] != 0 && b[k] != 0) {
            out.push_back(k);
        }
    }
    return out;
}

/// <P a | Q b> summed over the cells kept by both masks.
Complex masked_overlap(const WaveFunction &a, const Projector &pa, const WaveFunction &b,
                       const Projector &pb) {
    const GridSpec &g = a.grid();
    const std::vector<std::size_t> xs = set_indices(pa.xmask, pb.xmask);
    if (xs.empty()) {
        return {};
    }
    const std::vector<std::size_t> ys = set_indices(pa.ymask, pb.ymask);
    if (ys.empty()) {
        return {};
    }
    const std::span<const Complex> av = a.amps();
    const std::span<const Complex> bv = b.amps();
    Complex acc{};
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        if (pa.mmask[m] == 0 || pb.mmask[m] == 0) {
            continue;
        }
        if (a.channel_is_zero(m) || b.channel_is_zero(m)) {
            continue;
        }
        for (const std::size_t i : xs) {
            const std::size_t row = g.index(m, i, 0);
            for (const std::size_t j : ys) {
                acc += std::conj(av[row + j]) * bv[row + j];
            }
        }
    }
    return acc * g.cell_volume();
}

void accumulate_masked(WaveFunction &dst, const WaveFunction &src, const Projector &mask) {
    const GridSpec &g = dst.grid();
    std::span<Complex> out = dst.amps();
    const std::span<const Complex> in = src.amps();
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        if (mask.mmask[m] == 0) {
            continue;
        }
        for (std::size_t i = 0; i < g.nx; ++i) {
            if (mask.xmask[i] == 0) {
                continue;
            }
            const std::size_t row = g.index(m, i, 0);
            for (std::size_t j = 0; j < g.ny; ++j) {
                if (mask.ymask[j] != 0) {
                    out[row + j] += in[row + j];
                }
            }
        }
    }
}

std::string join(const std::vector<std::string> &parts) {
    std::string out;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (k > 0) {
            out += ',';
        }
        out += parts[k];
    }
    return out;
}

class TreeBuilder {
  public:
    TreeBuilder(const FamilyRegistry &families, const PropagatorPlan &plan,
                const DetectorCoupling &coupling, const Schedule &schedule, HistoryTree &tree)
        : families_(families), plan_(plan), coupling_(coupling), schedule_(schedule),
          tree_(tree), tol_(1e-9 * schedule.dt) {}

    void grow(const SchemaNode &node, const WaveFunction &state, double t_cur,
              const std::vector<std::string> &path) {
        if (!(node.time > t_cur + tol_)) {
            throw ScheduleError("history times must increase strictly along every branch");
        }
        if (node.time > schedule_.tD + tol_) {
            throw ScheduleError("history time lies after tD");
        }
        if (node.then.size() > 1) {
            throw UsageError("a schema node has at most one continuation");
        }
        const ProjectorFamily &family = families_.resolve(node.family);
        for (const Projector &p : family.members) {
            if (!p.matches(tree_.grid)) {
                throw PartitionError("family '" + family.name + "' does not match the grid");
            }
        }
        const WaveFunction psi =
            evolve_with_kick(plan_, coupling_, schedule_, state, t_cur, node.time);
        const bool at_end = std::abs(node.time - schedule_.tD) <= tol_;

        std::shared_ptr<const WaveFunction> shared;
        for (const Projector &p : family.members) {
            std::vector<std::string> branch_path = path;
            branch_path.push_back(p.label);
            const SchemaNode *next = continuation(node, p.label);
            if (next != nullptr) {
                if (at_end) {
                    throw ScheduleError("history time lies after tD");
                }
                grow(*next, apply_projector(p, psi), node.time, branch_path);
                continue;
            }
            if (at_end) {
                if (!shared) {
                    shared = std::make_shared<const WaveFunction>(psi);
                    tree_.bases.push_back(shared);
                }
                add_leaf(std::move(branch_path), tree_.bases.size() - 1, p);
            } else {
                WaveFunction leaf = evolve_with_kick(plan_, coupling_, schedule_,
                                                     apply_projector(p, psi), node.time,
                                                     schedule_.tD);
                tree_.bases.push_back(std::make_shared<const WaveFunction>(std::move(leaf)));
                add_leaf(std::move(branch_path), tree_.bases.size() - 1,
                         identity_projector(tree_.grid));
            }
        }
    }

  private:
    static const SchemaNode *continuation(const SchemaNode &node, const std::string &label) {
        for (const LabelRefinement &r : node.per_label) {
            if (r.label == label) {
                if (r.next.size() > 1) {
                    throw UsageError("a schema node has at most one continuation");
                }
                return r.next.empty() ? nullptr : &r.next.front();
            }
        }
        return node.then.empty() ? nullptr : &node.then.front();
    }

    void add_leaf(std::vector<std::string> path, std::size_t base, Projector mask) {
        tree_.terms.push_back(BranchTerm{base, std::move(mask)});
        tree_.leaves.push_back(HistoryLeaf{std::move(path), {tree_.terms.size() - 1}});
    }

    const FamilyRegistry &families_;
    const PropagatorPlan &plan_;
    const DetectorCoupling &coupling_;
    const Schedule &schedule_;
    HistoryTree &tree_;
    double tol_;
};

} // namespace

const std::vector<Complex> &TermGram::matrix() {
    if (filled_) {
        return values_;
    }
    const std::size_t n = terms_.size();
    values_.assign(n * n, Complex{});
    for (std::size_t s = 0; s < n; ++s) {
        const BranchTerm &ts = terms_[s];
        const WaveFunction &bs = *bases_[ts.base];
        for (std::size_t t = s; t < n; ++t) {
            const BranchTerm &tt = terms_[t];
            if (ts.base == tt.base && s != t && ts.mask.disjoint_from(tt.mask)) {
                continue;
            }
            const Complex v = masked_overlap(bs, ts.mask, *bases_[tt.base], tt.mask);
            values_[s * n + t] = v;
            values_[t * n + s] = std::conj(v);
        }
        values_[s * n + s] = values_[s * n + s].real();
    }
    filled_ = true;
    return values_;
}

void FamilyRegistry::add(ProjectorFamily family) {
    for (const Projector &p : family.members) {
        if (!p.matches(grid_)) {
            throw PartitionError("family '" + family.name + "' does not match the grid");
        }
    }
    std::string name = family.name;
    products_.clear();
    families_.insert_or_assign(std::move(name), std::move(family));
}

bool FamilyRegistry::contains(const std::string &name) const {
    if (families_.count(name) != 0) {
        return true;
    }
    const std::size_t star = name.find('*');
    return star != std::string::npos && contains(name.substr(0, star)) &&
           contains(name.substr(star + 1));
}

const ProjectorFamily &FamilyRegistry::resolve(const std::string &name) const {
    if (const auto it = families_.find(name); it != families_.end()) {
        return it->second;
    }
    if (const auto it = products_.find(name); it != products_.end()) {
        return it->second;
    }
    const std::size_t star = name.find('*');
    if (star == std::string::npos) {
        throw UsageError("unknown projector family '" + name + "'");
    }
    ProjectorFamily f =
        product_family(grid_, resolve(name.substr(0, star)), resolve(name.substr(star + 1)));
    f.name = name;
    return products_.emplace(name, std::move(f)).first->second;
}

std::vector<std::string> FamilyRegistry::names() const {
    std::vector<std::string> out;
    for (const auto &kv : families_) {
        out.push_back(kv.first);
    }
    return out;
}

std::string HistoryLeaf::label() const { return join(path); }

std::vector<std::string> HistoryTree::labels() const {
    std::vector<std::string> out;
    out.reserve(leaves.size());
    for (const HistoryLeaf &l : leaves) {
        out.push_back(l.label());
    }
    return out;
}

std::size_t HistoryTree::find(const std::string &label) const {
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        if (leaves[k].label() == label) {
            return k;
        }
    }
    throw UsageError("no history labelled '" + label + "'");
}

WaveFunction HistoryTree::leaf_state(std::size_t leaf) const {
    if (!evolved()) {
        throw StateError("history tree has not been evolved");
    }
    WaveFunction out(grid, final_time);
    for (const std::size_t t : leaves.at(leaf).terms) {
        accumulate_masked(out, *bases[terms[t].base], terms[t].mask);
    }
    return out;
}

HistoryTree evolve_branch_tree(const SchemaNode &schema, const FamilyRegistry &families,
                               const PropagatorPlan &plan, const DetectorCoupling &coupling,
                               const Schedule &schedule, const WaveFunction &initial) {
    schedule.validate();
    if (!(initial.grid() == plan.grid())) {
        throw ShapeError("initial state and propagator use different grids");
    }
    HistoryTree tree;
    tree.grid = initial.grid();
    tree.t0 = schedule.t0;
    tree.final_time = schedule.tD;
    tree.initial_norm_sq = norm_sq(initial);
    TreeBuilder builder(families, plan, coupling, schedule, tree);
    builder.grow(schema, initial, schedule.t0, {});
    tree.gram = std::make_shared<TermGram>(tree.bases, tree.terms);
    return tree;
}

WaveFunction branch_sum(const HistoryTree &tree) {
    if (!tree.evolved()) {
        throw StateError("history tree has not been evolved");
    }
    WaveFunction out(tree.grid, tree.final_time);
    for (const HistoryLeaf &leaf : tree.leaves) {
        for (const std::size_t t : leaf.terms) {
            accumulate_masked(out, *tree.bases[tree.terms[t].base], tree.terms[t].mask);
        }
    }
    return out;
}

double DecoherenceFunctional::trace() const noexcept {
    double s = 0.0;
    for (std::size_t a = 0; a < size(); ++a) {
        s += at(a, a).real();
    }
    return s;
}

double DecoherenceFunctional::max_diagonal() const noexcept {
    double m = 0.0;
    for (std::size_t a = 0; a < size(); ++a) {
        m = std::max(m, at(a, a).real());
    }
    return m;
}

double DecoherenceFunctional::hermiticity_defect() const noexcept {
    double worst = 0.0;
    for (std::size_t a = 0; a < size(); ++a) {
        for (std::size_t b = a; b < size(); ++b) {
            worst = std::max(worst, std::abs(at(a, b) - std::conj(at(b, a))));
        }
    }
    return worst;
}

DecoherenceFunctional decoherence_functional(const HistoryTree &tree) {
    if (!tree.evolved()) {
        throw StateError("history tree has not been evolved");
    }
    const std::vector<Complex> &g = tree.gram->matrix();
    const std::size_t nt = tree.terms.size();
    const std::size_t n = tree.leaves.size();
    DecoherenceFunctional d;
    d.labels = tree.labels();
    d.matrix.assign(n * n, Complex{});
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            Complex v{};
            for (const std::size_t s : tree.leaves[a].terms) {
                for (const std::size_t t : tree.leaves[b].terms) {
                    v += g[s * nt + t];
                }
            }
            if (a == b) {
                v = v.real();
            }
            d.matrix[a * n + b] = v;
            d.matrix[b * n + a] = std::conj(v);
        }
    }
    return d;
}

DecoherenceVerdict is_decoherent(const DecoherenceFunctional &d, double epsilon) {
    DecoherenceVerdict v;
    v.epsilon = epsilon;
    v.max_diagonal = d.max_diagonal();
    for (std::size_t a = 0; a < d.size(); ++a) {
        for (std::size_t b = a + 1; b < d.size(); ++b) {
            const double m = std::abs(d.at(a, b));
            if (m > v.worst) {
                v.worst = m;
                v.worst_a = a;
                v.worst_b = b;
            }
        }
    }
    v.decoherent = v.worst <= epsilon * v.max_diagonal;
    return v;
}

double ProbabilityTable::total() const noexcept {
    double s = 0.0;
    for (const double p : values) {
        s += p;
    }
    return s;
}

double ProbabilityTable::at(const std::string &label) const {
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] == label) {
            return values[k];
        }
    }
    throw UsageError("no entry labelled '" + label + "'");
}

ProbabilityTable branch_probabilities(const DecoherenceFunctional &d, double epsilon) {
    const DecoherenceVerdict v = is_decoherent(d, epsilon);
    if (!v.decoherent) {
        throw ConsistencyError("histories '" + d.labels[v.worst_a] + "' and '" +
                               d.labels[v.worst_b] + "' interfere: |D| = " +
                               std::to_string(v.worst) + " exceeds epsilon * max diagonal");
    }
    ProbabilityTable p;
    p.labels = d.labels;
    p.values.reserve(d.size());
    for (std::size_t a = 0; a < d.size(); ++a) {
        p.values.push_back(d.at(a, a).real());
    }
    return p;
}

HistoryTree coarse_grain(const HistoryTree &tree, const std::vector<LeafGroup> &groups) {
    if (!tree.evolved()) {
        throw StateError("history tree has not been evolved");
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < tree.leaves.size(); ++k) {
        index.emplace(tree.leaves[k].label(), k);
    }
    std::vector<std::uint8_t> used(tree.leaves.size(), 0);
    std::set<std::string> names;
    HistoryTree out = tree;
    out.leaves.clear();
    for (const LeafGroup &g : groups) {
        if (g.members.empty()) {
            throw PartitionError("coarse-graining cell '" + g.label + "' is empty");
        }
        if (!names.insert(g.label).second) {
            throw PartitionError("coarse-graining label '" + g.label + "' repeats");
        }
        HistoryLeaf leaf{{g.label}, {}};
        for (const std::string &m : g.members) {
            const auto it = index.find(m);
            if (it == index.end()) {
                throw PartitionError("unknown history '" + m + "' in coarse graining");
            }
            if (used[it->second] != 0) {
                throw PartitionError("history '" + m + "' appears in two cells");
            }
            used[it->second] = 1;
            const std::vector<std::size_t> &t = tree.leaves[it->second].terms;
            leaf.terms.insert(leaf.terms.end(), t.begin(), t.end());
        }
        out.leaves.push_back(std::move(leaf));
    }
    if (std::find(used.begin(), used.end(), 0) != used.end()) {
        throw PartitionError("coarse graining does not cover every history");
    }
    return out;
}

} // namespace tsmu
