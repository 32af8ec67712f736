#pragma once

/**
 * @file
 * First-person probabilities as conditioned third-person tables, the
 * reduction-equivalence check, and fringe visibility.
 */

#include <span>
#include <string>
#include <vector>

#include "tsmu/histories.hpp"

namespace tsmu {

/// Splits a leaf label into its alternatives ("U&m=1,Y=3" -> U, m=1, Y=3).
[[nodiscard]] std::vector<std::string> label_atoms(const std::string &label);

/**
 * @brief The data an observer conditions on: every listed atom must occur
 * in a leaf label. No atoms selects every leaf.
 */
struct ConditionEvent {
    std::string name;
    std::vector<std::string> atoms;

    [[nodiscard]] bool matches(const std::string &label) const;

    [[nodiscard]] static ConditionEvent everything() { return {"all", {}}; }
    [[nodiscard]] static ConditionEvent on(const std::string &atom) { return {atom, {atom}}; }
};

/// p(alpha | D); throws ConditioningError when p(D) is zero.
[[nodiscard]] ProbabilityTable condition(const ProbabilityTable &p, const ConditionEvent &d);

/// Sums entries sharing the atom that starts with `prefix` ("Y=" gives
/// p(Y)). Output order is first appearance; leaves without such an atom are
/// left out.
[[nodiscard]] ProbabilityTable marginalize(const ProbabilityTable &p, const std::string &prefix);

/// p(a | D) for the atoms a starting with `prefix`, each computed as
/// p(a, D) / p(D) from sums over the same leaves, so an atom implied by D
/// gets exactly 1. Throws ConditioningError when p(D) is zero.
[[nodiscard]] ProbabilityTable conditional_marginal(const ProbabilityTable &p,
                                                    const ConditionEvent &d,
                                                    const std::string &prefix);

/// Families the reduction check uses from a registry.
struct ReductionSets {
    std::string slit_family = "slit";
    std::string y_family = "Y";
};

struct ReductionCheck {
    /// p(Y|S) from the conditioned joint table.
    ProbabilityTable conditioned;
    /// p(Y|S) from the renormalized branch state propagated from tS.
    ProbabilityTable reduced;
    double max_discrepancy = 0.0;
};

/**
 * @brief p(Y|S) computed as p(Y,S)/p(S) and as
 * ||P_Y U(tD, tS) Psi_S(tS)||^2 with Psi_S the renormalized branch state.
 *
 * Throws ConsistencyError when the slit set does not decohere at epsilon.
 */
[[nodiscard]] ReductionCheck reduction_equivalence(const FamilyRegistry &families,
                                                   const PropagatorPlan &plan,
                                                   const DetectorCoupling &coupling,
                                                   const Schedule &schedule,
                                                   const WaveFunction &initial,
                                                   const std::string &slit_label,
                                                   double epsilon = kDefaultEpsilon,
                                                   const ReductionSets &sets = {});

/// (max - min) / (max + min) over values[lo, hi); 0 when all are zero.
[[nodiscard]] double fringe_visibility(std::span<const double> values, std::size_t lo,
                                       std::size_t hi);

/// Mean distance between adjacent local maxima of values[lo, hi), each
/// maximum refined by the parabola through it and its neighbours. Entries
/// are `spacing` apart. Throws UsageError with fewer than two maxima.
[[nodiscard]] double fringe_spacing(std::span<const double> values, double spacing,
                                    std::size_t lo, std::size_t hi);

} // namespace tsmu
