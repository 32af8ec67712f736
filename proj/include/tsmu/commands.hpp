#pragma once

/**
 * @file
 * The experiment commands behind the tsmu tool. Each compute function works
 * on a built Scenario and returns plain data; each cmd_ function builds the
 * scenario, computes, and writes its artifacts plus manifest.json and
 * timing.json into an output directory.
 */

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tsmu/histories.hpp"
#include "tsmu/inference.hpp"
#include "tsmu/scenario.hpp"

namespace tsmu {

inline constexpr int kManifestVersion = 1;

/// Value written to p_upper, p_lower and p_other when the slit set does not
/// decohere.
inline constexpr double kSentinel = -1.0;

/**
 * @brief Named history sets.
 *
 * "slit-y": slit at tS, then Y at tD. "slit-y-upper": slit at tS, then Y at tD on the
 * U branch only. "slit-y-detector": slit at tS, then Y*detector at tD.
 * "arrival-slit": slit at tS, then arrival at tD. "y": Y at tD. "slit":
 * slit at tS. "identity": identity at tD.
 */
[[nodiscard]] SchemaNode schema_preset(const std::string &name, const Schedule &schedule);

/// {"time": number | "tS" | "tD", "family": name, "then": node,
///  "per_label": {label: node | null}}. Throws ConfigError("schema...").
[[nodiscard]] SchemaNode schema_from_json(const nlohmann::json &doc, const Schedule &schedule);

/// A preset name or the path of a JSON schema file.
[[nodiscard]] SchemaNode resolve_schema(const std::string &spec, const Schedule &schedule);

[[nodiscard]] std::vector<std::string> schema_preset_names();

/// Command-line values that replace config fields.
struct Overrides {
    std::optional<double> theta;
    std::optional<double> epsilon;
    std::optional<RunMode> mode;
};
[[nodiscard]] ScenarioConfig apply_overrides(ScenarioConfig config, const Overrides &o);

struct ArrivalRow {
    std::size_t index = 0;
    double y_center = 0.0;
    double p_total = 0.0;
    double p_upper = 0.0;
    double p_lower = 0.0;
    double p_other = 0.0;
};

struct SimulateResult {
    std::vector<ArrivalRow> rows;
    DecoherenceVerdict verdict;
    double norm_drift = 0.0;
    std::vector<std::string> warnings;
};

/// Numeric mode: the slit-y set. p_total is ||P_Y Psi(tD)||^2 over the box;
/// p_upper, p_lower and p_other are p(Y, U), p(Y, L) and p(Y, blocked), or
/// kSentinel when the set does not decohere. Analytic mode: the oracle with
/// slit overlap cos^2(theta) and L = k_x (tD - exit time).
[[nodiscard]] SimulateResult simulate(const Scenario &scenario);

/// Bin range [lo, hi) of centres within `half_width` of the box midline.
[[nodiscard]] std::pair<std::size_t, std::size_t> central_window(const BinSpec &bins,
                                                                 double half_width);

/// Central window of 0.6 oracle fringe periods either side of the midline.
[[nodiscard]] std::pair<std::size_t, std::size_t> central_window(const Scenario &scenario);

struct SweepPoint {
    double theta = 0.0;
    /// p(Y | arrived beyond the screen), one entry per bin.
    std::vector<double> arrived;
    double visibility = 0.0;
    /// Largest off-diagonal |D| of the arrival-slit set.
    double max_offdiag = 0.0;
    /// Largest |D(a, b)| with a on the U branch and b on the L branch.
    double slit_offdiag = 0.0;
    double max_diagonal = 0.0;
    bool decoherent = false;
};

/// Arrival-slit set with the detector coupling angle replaced by `theta`.
[[nodiscard]] SweepPoint sweep_point(const Scenario &scenario, double theta);

/// Evolved arrival-slit tree, for callers that need more than a SweepPoint.
[[nodiscard]] HistoryTree arrival_slit_tree(const Scenario &scenario, double theta);

/// Summary of an arrival-slit tree and its decoherence functional.
[[nodiscard]] SweepPoint summarize_arrival(const Scenario &scenario, const HistoryTree &tree,
                                           const DecoherenceFunctional &d, double theta);

[[nodiscard]] std::vector<double> default_thetas();

/// "U", "L", "alive", "m=K". "alive" is the detector level written by the
/// non-lethal slit (everything when no slit is lethal).
[[nodiscard]] ConditionEvent parse_condition(const std::string &text, Lethal lethal);

struct ConditionalRow {
    std::string observable;
    std::string label;
    /// Bin centre for Y rows; unset otherwise.
    std::optional<double> y_center;
    double p = 0.0;
    std::optional<double> p_reduced;
};

struct ConditionalResult {
    ConditionEvent event;
    /// Third-person table of the slit-y-detector set.
    ProbabilityTable joint;
    std::vector<ConditionalRow> rows;
    std::optional<double> max_discrepancy;
};

/// First-person tables p(S | D), p(m | D), p(Y | D) from the slit-y-detector
/// set; for U and L also p(Y | S) from the renormalized branch state.
[[nodiscard]] ConditionalResult conditional(const Scenario &scenario,
                                            const std::string &condition);

/// arrival.csv, arrival.svg.
void cmd_simulate(const ScenarioConfig &config, const std::filesystem::path &out);
/// dfunc.json.
void cmd_dfunc(const ScenarioConfig &config, const std::string &schema,
               const std::filesystem::path &out);
/// conditional.csv.
void cmd_conditional(const ScenarioConfig &config, const std::string &condition,
                     const std::filesystem::path &out);
/// sweep.csv, sweep_visibility.svg, sweep_arrival.svg.
void cmd_sweep(const ScenarioConfig &config, const std::vector<double> &thetas,
               const std::filesystem::path &out);

} // namespace tsmu
