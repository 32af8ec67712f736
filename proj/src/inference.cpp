#include "tsmu/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tsmu/errors.hpp"

namespace tsmu {

std::vector<std::string> label_atoms(const std::string &label) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : label) {
        if (c == ',' || c == '&') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool ConditionEvent::matches(const std::string &label) const {
    const std::vector<std::string> have = label_atoms(label);
    return std::all_of(atoms.begin(), atoms.end(), [&](const std::string &a) {
        return std::find(have.begin(), have.end(), a) != have.end();
    });
}

ProbabilityTable condition(const ProbabilityTable &p, const ConditionEvent &d) {
    double mass = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (d.matches(p.labels[k])) {
            mass += p.values[k];
        }
    }
    if (!(mass > 0.0)) {
        throw ConditioningError("condition '" + d.name + "' has zero probability");
    }
    ProbabilityTable out;
    out.labels = p.labels;
    out.values.reserve(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        out.values.push_back(d.matches(p.labels[k]) ? p.values[k] / mass : 0.0);
    }
    return out;
}

ProbabilityTable conditional_marginal(const ProbabilityTable &p, const ConditionEvent &d,
                                      const std::string &prefix) {
    ProbabilityTable joint = p;
    double mass = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (d.matches(p.labels[k])) {
            mass += p.values[k];
        } else {
            joint.values[k] = 0.0;
        }
    }
    if (!(mass > 0.0)) {
        throw ConditioningError("condition '" + d.name + "' has zero probability");
    }
    ProbabilityTable out = marginalize(joint, prefix);
    for (double &v : out.values) {
        v /= mass;
    }
    return out;
}

ProbabilityTable marginalize(const ProbabilityTable &p, const std::string &prefix) {
    ProbabilityTable out;
    std::map<std::string, std::size_t> slot;
    for (std::size_t k = 0; k < p.size(); ++k) {
        for (const std::string &a : label_atoms(p.labels[k])) {
            if (a.rfind(prefix, 0) != 0) {
                continue;
            }
            const auto [it, fresh] = slot.emplace(a, out.labels.size());
            if (fresh) {
                out.labels.push_back(a);
                out.values.push_back(0.0);
            }
            out.values[it->second] += p.values[k];
            break;
        }
    }
    return out;
}

ReductionCheck reduction_equivalence(const FamilyRegistry &families, const PropagatorPlan &plan,
                                     const DetectorCoupling &coupling, const Schedule &schedule,
                                     const WaveFunction &initial, const std::string &slit_label,
                                     double epsilon, const ReductionSets &sets) {
    SchemaNode at_d{schedule.tD, sets.y_family, {}, {}};
    const SchemaNode schema{schedule.tS, sets.slit_family, {at_d}, {}};
    const HistoryTree tree =
        evolve_branch_tree(schema, families, plan, coupling, schedule, initial);
    const ProbabilityTable joint = branch_probabilities(decoherence_functional(tree), epsilon);

    ReductionCheck out;
    out.conditioned = marginalize(condition(joint, ConditionEvent::on(slit_label)), "Y=");

    const ProjectorFamily &slits = families.resolve(sets.slit_family);
    const WaveFunction at_s =
        evolve_with_kick(plan, coupling, schedule, initial, schedule.t0, schedule.tS);
    WaveFunction branch = apply_projector(slits.members[slits.find(slit_label)], at_s);
    const double weight = norm_sq(branch);
    if (!(weight > 0.0)) {
        throw ConditioningError("branch '" + slit_label + "' has zero probability");
    }
    const double scale = 1.0 / std::sqrt(weight);
    for (Complex &a : branch.amps()) {
        a *= scale;
    }
    const WaveFunction at_end = propagate(plan, branch, schedule.tS, schedule.tD);
    const ProjectorFamily &ys = families.resolve(sets.y_family);
    out.reduced.labels.reserve(ys.size());
    for (const Projector &p : ys.members) {
        out.reduced.labels.push_back(p.label);
        out.reduced.values.push_back(norm_sq(apply_projector(p, at_end)));
    }
    for (std::size_t k = 0; k < out.reduced.size(); ++k) {
        const double a = out.conditioned.at(out.reduced.labels[k]);
        out.max_discrepancy = std::max(out.max_discrepancy, std::abs(a - out.reduced.values[k]));
    }
    return out;
}

double fringe_visibility(std::span<const double> values, std::size_t lo, std::size_t hi) {
    if (lo >= hi || hi > values.size()) {
        throw UsageError("visibility window is empty or out of range");
    }
    const auto [mn, mx] = std::minmax_element(values.begin() + static_cast<std::ptrdiff_t>(lo),
                                              values.begin() + static_cast<std::ptrdiff_t>(hi));
    if (*mx + *mn == 0.0) {
        return 0.0;
    }
    return (*mx - *mn) / (*mx + *mn);
}

double fringe_spacing(std::span<const double> values, double spacing, std::size_t lo,
                      std::size_t hi) {
    if (lo >= hi || hi > values.size()) {
        throw UsageError("fringe window is empty or out of range");
    }
    std::vector<double> peaks;
    for (std::size_t k = std::max<std::size_t>(lo, 1); k + 1 < std::min(hi, values.size()); ++k) {
        const double a = values[k - 1];
        const double b = values[k];
        const double c = values[k + 1];
        if (b > a && b >= c) {
            const double curv = a - 2.0 * b + c;
            const double shift = curv != 0.0 ? 0.5 * (a - c) / curv : 0.0;
            peaks.push_back((static_cast<double>(k) + shift) * spacing);
        }
    }
    if (peaks.size() < 2) {
        throw UsageError("fewer than two fringe maxima in the window");
    }
    return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

} // namespace tsmu
