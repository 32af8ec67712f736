#pragma once

/**
 * @file
 * Sets of alternative histories as branch-dependent trees of projections,
 * their branch state vectors, the decoherence functional, probabilities
 * and coarse graining.
 */

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tsmu/dynamics.hpp"
#include "tsmu/grid.hpp"

namespace tsmu {

/// Named projector families a schema may refer to. A name "a*b" that is
/// not registered resolves to the product of the families "a" and "b".
class FamilyRegistry {
  public:
    explicit FamilyRegistry(GridSpec grid) : grid_(grid) {}

    void add(ProjectorFamily family);
    [[nodiscard]] bool contains(const std::string &name) const;
    /// Throws UsageError for unknown names.
    [[nodiscard]] const ProjectorFamily &resolve(const std::string &name) const;
    [[nodiscard]] std::vector<std::string> names() const;

  private:
    GridSpec grid_;
    std::map<std::string, ProjectorFamily> families_;
    mutable std::map<std::string, ProjectorFamily> products_;
};

struct SchemaNode;

/// Branch-specific continuation: `next` empty means the branch stops here.
struct LabelRefinement {
    std::string label;
    std::vector<SchemaNode> next;
};

/**
 * @brief Declarative description of a history set.
 *
 * At `time` every incoming branch is split by `family`. Each resulting
 * branch continues with the refinement listed for its label, or with `then`
 * otherwise; a branch with nothing to continue with becomes a leaf.
 */
struct SchemaNode {
    double time = 0.0;
    std::string family;
    /// At most one element.
    std::vector<SchemaNode> then;
    std::vector<LabelRefinement> per_label;
};

/// Branch state P * base, with base a state at the final time.
struct BranchTerm {
    std::size_t base = 0;
    Projector mask;
};

struct HistoryLeaf {
    /// Alternatives in time order, e.g. {"U", "Y=3"}.
    std::vector<std::string> path;
    /// Indices into HistoryTree::terms; one term unless coarse grained.
    std::vector<std::size_t> terms;

    /// path joined by ','.
    [[nodiscard]] std::string label() const;
};

class TermGram;

/**
 * @brief An evolved history set.
 *
 * Leaves refer to shared final-time states through masks, so a leaf is
 * materialized only on request. Trees are immutable once evolved; coarse
 * grainings share states and cached overlaps with their source.
 */
struct HistoryTree {
    GridSpec grid;
    double t0 = 0.0;
    double final_time = 0.0;
    double initial_norm_sq = 0.0;
    std::vector<std::shared_ptr<const WaveFunction>> bases;
    std::vector<BranchTerm> terms;
    std::vector<HistoryLeaf> leaves;
    std::shared_ptr<TermGram> gram;

    [[nodiscard]] bool evolved() const noexcept { return gram != nullptr; }
    [[nodiscard]] std::vector<std::string> labels() const;
    /// Throws UsageError for unknown labels.
    [[nodiscard]] std::size_t find(const std::string &label) const;
    [[nodiscard]] WaveFunction leaf_state(std::size_t leaf) const;
};

/**
 * @brief Builds the branch states of `schema` from `initial`.
 *
 * Every branch follows the same unitary evolution, including the detector
 * kick at schedule.tS, and is projected at each of its branching times.
 * Leaves are stored at schedule.tD. Throws ScheduleError for times outside
 * (t0, tD], non-increasing times or times off the dt lattice, and
 * PartitionError for families that do not match the grid.
 */
[[nodiscard]] HistoryTree evolve_branch_tree(const SchemaNode &schema,
                                             const FamilyRegistry &families,
                                             const PropagatorPlan &plan,
                                             const DetectorCoupling &coupling,
                                             const Schedule &schedule,
                                             const WaveFunction &initial);

/// Sum of all leaves; throws StateError for an unevolved tree.
[[nodiscard]] WaveFunction branch_sum(const HistoryTree &tree);

struct DecoherenceFunctional {
    std::vector<std::string> labels;
    /// Row-major n x n; entry (a, b) = <psi_a | psi_b>.
    std::vector<Complex> matrix;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    [[nodiscard]] Complex at(std::size_t a, std::size_t b) const noexcept {
        return matrix[a * labels.size() + b];
    }
    [[nodiscard]] double trace() const noexcept;
    [[nodiscard]] double max_diagonal() const noexcept;
    /// Largest |D(a, b) - conj(D(b, a))|.
    [[nodiscard]] double hermiticity_defect() const noexcept;
};

[[nodiscard]] DecoherenceFunctional decoherence_functional(const HistoryTree &tree);

struct DecoherenceVerdict {
    bool decoherent = true;
    double epsilon = 0.0;
    double max_diagonal = 0.0;
    /// Largest off-diagonal modulus and the pair attaining it.
    double worst = 0.0;
    std::size_t worst_a = 0;
    std::size_t worst_b = 0;
};

inline constexpr double kDefaultEpsilon = 1e-6;

/// decoherent iff every |D(a, b)|, a != b, is <= epsilon * max diagonal.
[[nodiscard]] DecoherenceVerdict is_decoherent(const DecoherenceFunctional &d,
                                               double epsilon = kDefaultEpsilon);

struct ProbabilityTable {
    std::vector<std::string> labels;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    [[nodiscard]] double total() const noexcept;
    /// Throws UsageError for unknown labels.
    [[nodiscard]] double at(const std::string &label) const;
};

/// Diagonal of D; throws ConsistencyError when the set does not decohere.
[[nodiscard]] ProbabilityTable branch_probabilities(const DecoherenceFunctional &d,
                                                    double epsilon = kDefaultEpsilon);

/// Groups of leaf labels with the label given to each group.
struct LeafGroup {
    std::string label;
    std::vector<std::string> members;
};

/// Leaves become sums of the grouped branches. Throws PartitionError unless
/// every leaf appears in exactly one group.
[[nodiscard]] HistoryTree coarse_grain(const HistoryTree &tree, const std::vector<LeafGroup> &groups);

} // namespace tsmu
