#include "tsmu/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

#include "tsmu/errors.hpp"
#include "tsmu/io.hpp"

namespace tsmu {

using nlohmann::json;

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

SchemaNode node(double time, std::string family, std::vector<SchemaNode> then = {}) {
    return SchemaNode{time, std::move(family), std::move(then), {}};
}

bool starts_with(const std::string &s, const std::string &prefix) {
    return s.rfind(prefix, 0) == 0;
}

double parse_time(const json &v, const Schedule &schedule, const std::string &field) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "tS") {
            return schedule.tS;
        }
        if (s == "tD") {
            return schedule.tD;
        }
    }
    throw ConfigError(field, "must be a number, \"tS\" or \"tD\"");
}

SchemaNode parse_node(const json &doc, const Schedule &schedule, const std::string &field) {
    if (!doc.is_object()) {
        throw ConfigError(field, "must be a JSON object");
    }
    for (const auto &[key, value] : doc.items()) {
        if (key != "time" && key != "family" && key != "then" && key != "per_label") {
            throw ConfigError(field + "." + key, "unknown key");
        }
    }
    if (!doc.contains("time") || !doc.contains("family") || !doc.at("family").is_string()) {
        throw ConfigError(field, "needs \"time\" and a string \"family\"");
    }
    SchemaNode n;
    n.time = parse_time(doc.at("time"), schedule, field + ".time");
    n.family = doc.at("family").get<std::string>();
    if (doc.contains("then") && !doc.at("then").is_null()) {
        n.then.push_back(parse_node(doc.at("then"), schedule, field + ".then"));
    }
    if (doc.contains("per_label")) {
        const json &pl = doc.at("per_label");
        if (!pl.is_object()) {
            throw ConfigError(field + ".per_label", "must be a JSON object");
        }
        for (const auto &[label, value] : pl.items()) {
            LabelRefinement r{label, {}};
            if (!value.is_null()) {
                r.next.push_back(parse_node(value, schedule, field + ".per_label." + label));
            }
            n.per_label.push_back(std::move(r));
        }
    }
    return n;
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

json verdict_json(const DecoherenceVerdict &v, const std::vector<std::string> &labels) {
    json j = {{"decoherent", v.decoherent},
              {"verdict", v.decoherent ? "decoherent" : "not decoherent"},
              {"epsilon", v.epsilon},
              {"max_diagonal", v.max_diagonal},
              {"worst_offdiagonal", v.worst}};
    if (!labels.empty() && v.worst > 0.0) {
        j["worst_pair"] = {labels[v.worst_a], labels[v.worst_b]};
    }
    return j;
}

json resolved_json(const Scenario &s) {
    const Schedule &sc = s.schedule();
    return {{"t0", sc.t0},
            {"tS", sc.tS},
            {"tD", sc.tD},
            {"dt", sc.dt},
            {"steps", step_count(sc.t0, sc.tD, sc.dt)},
            {"exit_time", s.exit_time()},
            {"screen_columns", {s.potential().screen_col_lo, s.potential().screen_col_hi}},
            {"barrier_height", s.potential().barrier_height},
            {"bins", s.bins().count},
            {"rows_per_bin", s.bins().rows_per_bin}};
}

/// Writes manifest.json and timing.json after the artifacts.
void finish_run(const std::filesystem::path &out, const std::string &command, json arguments,
                const Scenario &scenario, json results, std::vector<std::string> artifacts,
                std::chrono::steady_clock::time_point started) {
    json manifest = {{"format_version", kManifestVersion},
                     {"command", command},
                     {"arguments", std::move(arguments)},
                     {"config", config_to_json(scenario.config())},
                     {"resolved", resolved_json(scenario)},
                     {"results", std::move(results)},
                     {"artifacts", artifacts},
                     {"timing_file", "timing.json"}};
    write_atomic(out / "manifest.json", dump_json(manifest));
    const json timing = {{"command", command}, {"wall_clock_seconds", elapsed_seconds(started)}};
    write_atomic(out / "timing.json", dump_json(timing));
}

std::string slit_of(const std::string &label) { return label_atoms(label).front(); }

std::vector<double> diagonal(const DecoherenceFunctional &d) {
    std::vector<double> out(d.size());
    for (std::size_t a = 0; a < d.size(); ++a) {
        out[a] = d.at(a, a).real();
    }
    return out;
}

} // namespace

std::vector<std::string> schema_preset_names() {
    return {"slit-y", "slit-y-upper", "slit-y-detector", "arrival-slit", "y", "slit", "identity"};
}

SchemaNode schema_preset(const std::string &name, const Schedule &s) {
    if (name == "slit-y") {
        return node(s.tS, "slit", {node(s.tD, "Y")});
    }
    if (name == "slit-y-upper") {
        SchemaNode n = node(s.tS, "slit");
        n.per_label.push_back({"U", {node(s.tD, "Y")}});
        return n;
    }
    if (name == "slit-y-detector") {
        return node(s.tS, "slit", {node(s.tD, "Y*detector")});
    }
    if (name == "arrival-slit") {
        return node(s.tS, "slit", {node(s.tD, "arrival")});
    }
    if (name == "y") {
        return node(s.tD, "Y");
    }
    if (name == "slit") {
        return node(s.tS, "slit");
    }
    if (name == "identity") {
        return node(s.tD, "identity");
    }
    throw UsageError("unknown history set '" + name + "'");
}

SchemaNode schema_from_json(const json &doc, const Schedule &schedule) {
    return parse_node(doc, schedule, "schema");
}

SchemaNode resolve_schema(const std::string &spec, const Schedule &schedule) {
    const auto names = schema_preset_names();
    if (std::find(names.begin(), names.end(), spec) != names.end()) {
        return schema_preset(spec, schedule);
    }
    std::ifstream in(spec);
    if (!in) {
        throw ConfigError("schema", "'" + spec + "' is neither a preset nor a readable file");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError("schema", std::string("invalid JSON: ") + e.what());
    }
    return schema_from_json(doc, schedule);
}

ScenarioConfig apply_overrides(ScenarioConfig config, const Overrides &o) {
    if (o.theta) {
        config.coupling.theta = *o.theta;
    }
    if (o.epsilon) {
        config.epsilon = *o.epsilon;
    }
    if (o.mode) {
        config.mode = *o.mode;
    }
    return config;
}

SimulateResult simulate(const Scenario &scenario) {
    const ScenarioConfig &cfg = scenario.config();
    const BinSpec &bins = scenario.bins();
    SimulateResult out;
    out.rows.resize(bins.count);
    for (std::size_t k = 0; k < bins.count; ++k) {
        out.rows[k].index = k;
        out.rows[k].y_center = bins.y_center(k);
    }

    if (cfg.mode == RunMode::Analytic) {
        const double c = std::cos(cfg.coupling.theta);
        const double overlap = cfg.coupling.theta >= kHalfPi ? 0.0 : c * c;
        const OracleSpec spec = scenario.nominal_oracle();
        const std::vector<double> p = oracle_distribution_with_overlap(spec, overlap, bins);
        const OracleDensities d = oracle_densities(spec, bins);
        double total = 0.0;
        for (std::size_t k = 0; k < bins.count; ++k) {
            total += d.incoherent[k];
        }
        out.verdict.epsilon = cfg.epsilon;
        out.verdict.decoherent = overlap <= cfg.epsilon;
        out.verdict.worst = overlap;
        for (std::size_t k = 0; k < bins.count; ++k) {
            ArrivalRow &r = out.rows[k];
            r.p_total = p[k];
            if (out.verdict.decoherent) {
                r.p_upper = d.upper[k] / total;
                r.p_lower = d.lower[k] / total;
                r.p_other = 0.0;
            } else {
                r.p_upper = r.p_lower = r.p_other = kSentinel;
            }
        }
        if (!out.verdict.decoherent) {
            out.warnings.push_back("slit alternatives overlap by cos^2(theta) = " +
                                   format_double(overlap) + "; p_upper, p_lower and p_other "
                                   "hold the sentinel -1");
        }
        return out;
    }

    const SchemaNode schema = schema_preset("slit-y", scenario.schedule());
    const HistoryTree tree =
        evolve_branch_tree(schema, scenario.families(), scenario.plan(), scenario.coupling(),
                           scenario.schedule(), scenario.initial());
    const WaveFunction psi = branch_sum(tree);
    const double n0 = norm_sq(scenario.initial());
    out.norm_drift = std::abs(norm_sq(psi) - n0) / n0;

    const ProjectorFamily &ys = scenario.families().resolve("Y");
    for (std::size_t k = 0; k < bins.count; ++k) {
        out.rows[k].p_total = norm_sq(apply_projector(ys.members[k], psi));
    }

    const DecoherenceFunctional d = decoherence_functional(tree);
    out.verdict = is_decoherent(d, cfg.epsilon);
    if (out.verdict.decoherent) {
        for (std::size_t a = 0; a < d.size(); ++a) {
            const std::vector<std::string> atoms = label_atoms(d.labels[a]);
            const std::size_t k = ys.find(atoms.at(1));
            const double p = d.at(a, a).real();
            if (atoms[0] == "U") {
                out.rows[k].p_upper = p;
            } else if (atoms[0] == "L") {
                out.rows[k].p_lower = p;
            } else {
                out.rows[k].p_other = p;
            }
        }
    } else {
        for (ArrivalRow &r : out.rows) {
            r.p_upper = r.p_lower = r.p_other = kSentinel;
        }
        out.warnings.push_back("slit set does not decohere at epsilon " +
                               format_double(cfg.epsilon) + " (worst " +
                               format_double(out.verdict.worst) + " between " +
                               d.labels[out.verdict.worst_a] + " and " +
                               d.labels[out.verdict.worst_b] +
                               "); p_upper, p_lower and p_other hold the sentinel -1");
    }
    return out;
}

std::pair<std::size_t, std::size_t> central_window(const BinSpec &bins, double half_width) {
    const double mid = 0.5 * bins.ly;
    std::size_t lo = bins.count;
    std::size_t hi = 0;
    for (std::size_t k = 0; k < bins.count; ++k) {
        if (std::abs(bins.y_center(k) - mid) <= half_width) {
            lo = std::min(lo, k);
            hi = k + 1;
        }
    }
    if (lo >= hi) {
        throw UsageError("central window holds no bins");
    }
    return {lo, hi};
}

std::pair<std::size_t, std::size_t> central_window(const Scenario &scenario) {
    return central_window(scenario.bins(), 0.6 * oracle_fringe_period(scenario.nominal_oracle()));
}

HistoryTree arrival_slit_tree(const Scenario &scenario, double theta) {
    DetectorCoupling coupling = scenario.coupling();
    coupling.theta = theta;
    return evolve_branch_tree(schema_preset("arrival-slit", scenario.schedule()),
                              scenario.families(), scenario.plan(), coupling,
                              scenario.schedule(), scenario.initial());
}

SweepPoint summarize_arrival(const Scenario &scenario, const HistoryTree &tree,
                             const DecoherenceFunctional &d, double theta) {
    SweepPoint pt;
    pt.theta = theta;
    const DecoherenceVerdict v = is_decoherent(d, scenario.config().epsilon);
    pt.decoherent = v.decoherent;
    pt.max_offdiag = v.worst;
    pt.max_diagonal = v.max_diagonal;
    for (std::size_t a = 0; a < d.size(); ++a) {
        if (slit_of(d.labels[a]) != "U") {
            continue;
        }
        for (std::size_t b = 0; b < d.size(); ++b) {
            if (slit_of(d.labels[b]) == "L") {
                pt.slit_offdiag = std::max(pt.slit_offdiag, std::abs(d.at(a, b)));
            }
        }
    }

    const ProjectorFamily &arrival = scenario.families().resolve("arrival");
    std::vector<LeafGroup> groups;
    for (const Projector &p : arrival.members) {
        LeafGroup g{p.label, {}};
        for (const char *s : {"U", "L", "blocked"}) {
            g.members.push_back(std::string(s) + "," + p.label);
        }
        groups.push_back(std::move(g));
    }
    const DecoherenceFunctional dy = decoherence_functional(coarse_grain(tree, groups));
    const std::vector<double> p = diagonal(dy);
    const std::size_t n = scenario.bins().count;
    double arrived = 0.0;
    pt.arrived.assign(n, 0.0);
    for (std::size_t a = 0; a < dy.size(); ++a) {
        if (starts_with(dy.labels[a], "Y=")) {
            const std::size_t k = arrival.find(dy.labels[a]);
            pt.arrived[k] = p[a];
            arrived += p[a];
        }
    }
    if (!(arrived > 0.0)) {
        throw StateError("nothing arrived beyond the screen by tD");
    }
    for (double &v : pt.arrived) {
        v /= arrived;
    }
    const auto [lo, hi] = central_window(scenario);
    pt.visibility = fringe_visibility(pt.arrived, lo, hi);
    return pt;
}

SweepPoint sweep_point(const Scenario &scenario, double theta) {
    const HistoryTree tree = arrival_slit_tree(scenario, theta);
    return summarize_arrival(scenario, tree, decoherence_functional(tree), theta);
}

std::vector<double> default_thetas() {
    const double pi = std::numbers::pi;
    return {0.0, pi / 6.0, pi / 4.0, pi / 3.0, pi / 2.0};
}

ConditionEvent parse_condition(const std::string &text, Lethal lethal) {
    if (text == "U" || text == "L") {
        return ConditionEvent::on(text);
    }
    if (text == "alive") {
        switch (lethal) {
        case Lethal::Upper:
            return {"alive", {"m=2"}};
        case Lethal::Lower:
            return {"alive", {"m=1"}};
        case Lethal::None:
            break;
        }
        return {"alive", {}};
    }
    if (text.size() == 3 && starts_with(text, "m=") && text[2] >= '0' && text[2] <= '2') {
        return ConditionEvent::on(text);
    }
    throw UsageError("condition must be U, L, alive or m=K with K in {0, 1, 2}");
}

ConditionalResult conditional(const Scenario &scenario, const std::string &text) {
    const ScenarioConfig &cfg = scenario.config();
    if (cfg.mode != RunMode::Numeric) {
        throw UsageError("conditional needs numeric mode");
    }
    ConditionalResult out;
    out.event = parse_condition(text, cfg.coupling.lethal);
    const HistoryTree tree = evolve_branch_tree(
        schema_preset("slit-y-detector", scenario.schedule()), scenario.families(),
        scenario.plan(), scenario.coupling(), scenario.schedule(), scenario.initial());
    out.joint = branch_probabilities(decoherence_functional(tree), cfg.epsilon);
    for (const char *s : {"U", "L", "blocked"}) {
        const ProbabilityTable m = conditional_marginal(out.joint, out.event, s);
        out.rows.push_back({"S", s, std::nullopt, m.size() != 0 ? m.values[0] : 0.0, {}});
    }
    for (const ProbabilityTable m = conditional_marginal(out.joint, out.event, "m=");
         std::size_t k : {0, 1, 2}) {
        const std::string label = "m=" + std::to_string(k);
        const auto it = std::find(m.labels.begin(), m.labels.end(), label);
        out.rows.push_back({"m", label, std::nullopt,
                            it == m.labels.end() ? 0.0 : m.values[it - m.labels.begin()], {}});
    }

    std::optional<ReductionCheck> check;
    if (text == "U" || text == "L") {
        check = reduction_equivalence(scenario.families(), scenario.plan(), scenario.coupling(),
                                      scenario.schedule(), scenario.initial(), text,
                                      cfg.epsilon);
        out.max_discrepancy = check->max_discrepancy;
    }
    const ProbabilityTable py = conditional_marginal(out.joint, out.event, "Y=");
    const BinSpec &bins = scenario.bins();
    for (std::size_t k = 0; k < bins.count; ++k) {
        const std::string label = "Y=" + std::to_string(k);
        ConditionalRow r{"Y", label, bins.y_center(k), py.at(label), {}};
        if (check) {
            r.p_reduced = check->reduced.at(label);
        }
        out.rows.push_back(std::move(r));
    }
    return out;
}

void cmd_simulate(const ScenarioConfig &config, const std::filesystem::path &out) {
    const auto started = std::chrono::steady_clock::now();
    const Scenario scenario(config);
    const SimulateResult r = simulate(scenario);

    CsvTable csv({"y_index", "y_center", "p_total", "p_upper", "p_lower", "p_other"});
    SvgSeries total{"p_total", {}, {}};
    for (const ArrivalRow &row : r.rows) {
        csv.row().add(row.index).add(row.y_center).add(row.p_total).add(row.p_upper)
            .add(row.p_lower).add(row.p_other);
        total.x.push_back(row.y_center);
        total.y.push_back(row.p_total);
    }
    std::filesystem::create_directories(out);
    write_atomic(out / "arrival.csv", csv.str());
    write_atomic(out / "arrival.svg", svg_line_chart("arrival distribution", "y", "p", {total}));

    json results = {{"mode", config.mode == RunMode::Analytic ? "analytic" : "numeric"},
                    {"norm_drift", r.norm_drift},
                    {"decoherence", verdict_json(r.verdict, {})},
                    {"warnings", r.warnings}};
    finish_run(out, "simulate", json::object(), scenario, std::move(results),
               {"arrival.csv", "arrival.svg"}, started);
}

void cmd_dfunc(const ScenarioConfig &config, const std::string &schema_spec,
               const std::filesystem::path &out) {
    const auto started = std::chrono::steady_clock::now();
    const Scenario scenario(config);
    if (config.mode != RunMode::Numeric) {
        throw UsageError("dfunc needs numeric mode");
    }
    const SchemaNode schema = resolve_schema(schema_spec, scenario.schedule());
    const HistoryTree tree =
        evolve_branch_tree(schema, scenario.families(), scenario.plan(), scenario.coupling(),
                           scenario.schedule(), scenario.initial());
    const DecoherenceFunctional d = decoherence_functional(tree);
    const double defect = d.hermiticity_defect();
    if (defect > 1e-12 * std::max(1.0, d.max_diagonal())) {
        throw ConsistencyError("decoherence functional is not Hermitian (defect " +
                               format_double(defect) + ")");
    }
    const DecoherenceVerdict v = is_decoherent(d, config.epsilon);

    json matrix = json::array();
    for (std::size_t a = 0; a < d.size(); ++a) {
        json row = json::array();
        for (std::size_t b = 0; b < d.size(); ++b) {
            row.push_back({d.at(a, b).real(), d.at(a, b).imag()});
        }
        matrix.push_back(std::move(row));
    }
    json doc = verdict_json(v, d.labels);
    doc["labels"] = d.labels;
    doc["matrix"] = std::move(matrix);
    doc["trace"] = d.trace();
    doc["hermiticity_defect"] = defect;
    std::filesystem::create_directories(out);
    write_atomic(out / "dfunc.json", dump_json(doc));

    finish_run(out, "dfunc", {{"schema", schema_spec}}, scenario,
               {{"decoherence", verdict_json(v, d.labels)}, {"leaves", d.size()}},
               {"dfunc.json"}, started);
}

void cmd_conditional(const ScenarioConfig &config, const std::string &condition,
                     const std::filesystem::path &out) {
    const auto started = std::chrono::steady_clock::now();
    const Scenario scenario(config);
    const ConditionalResult r = conditional(scenario, condition);

    CsvTable csv({"observable", "label", "y_center", "p", "p_reduced", "discrepancy"});
    for (const ConditionalRow &row : r.rows) {
        csv.row().add(row.observable).add(row.label);
        if (row.y_center) {
            csv.add(*row.y_center);
        } else {
            csv.blank();
        }
        csv.add(row.p);
        if (row.p_reduced) {
            csv.add(*row.p_reduced).add(std::abs(row.p - *row.p_reduced));
        } else {
            csv.blank().blank();
        }
    }
    std::filesystem::create_directories(out);
    write_atomic(out / "conditional.csv", csv.str());

    json results = {{"condition", r.event.name}, {"atoms", r.event.atoms}};
    if (r.max_discrepancy) {
        results["reduction_max_discrepancy"] = *r.max_discrepancy;
    }
    finish_run(out, "conditional", {{"condition", condition}}, scenario, std::move(results),
               {"conditional.csv"}, started);
}

void cmd_sweep(const ScenarioConfig &config, const std::vector<double> &thetas,
               const std::filesystem::path &out) {
    const auto started = std::chrono::steady_clock::now();
    if (thetas.empty()) {
        throw ConfigError("thetas", "needs at least one angle");
    }
    for (const double t : thetas) {
        if (!(t >= 0.0 && t <= kHalfPi)) {
            throw ConfigError("thetas", "angles must lie in [0, pi/2]");
        }
    }
    const Scenario scenario(config);
    if (config.mode != RunMode::Numeric) {
        throw UsageError("sweep needs numeric mode");
    }
    CsvTable csv({"theta", "visibility", "max_offdiag", "slit_offdiag", "max_diagonal",
                  "verdict"});
    SvgSeries vis{"visibility", {}, {}};
    std::vector<SvgSeries> curves;
    json rows = json::array();
    for (const double t : thetas) {
        const SweepPoint pt = sweep_point(scenario, t);
        const char *verdict = pt.decoherent ? "decoherent" : "not decoherent";
        csv.row().add(t).add(pt.visibility).add(pt.max_offdiag).add(pt.slit_offdiag)
            .add(pt.max_diagonal).add(std::string_view(verdict));
        vis.x.push_back(t);
        vis.y.push_back(pt.visibility);
        SvgSeries c{"theta=" + format_double(t), {}, pt.arrived};
        for (std::size_t k = 0; k < pt.arrived.size(); ++k) {
            c.x.push_back(scenario.bins().y_center(k));
        }
        curves.push_back(std::move(c));
    }
    std::filesystem::create_directories(out);
    write_atomic(out / "sweep.csv", csv.str());
    write_atomic(out / "sweep_visibility.svg",
                 svg_line_chart("central fringe visibility", "theta", "visibility", {vis}));
    write_atomic(out / "sweep_arrival.svg",
                 svg_line_chart("p(Y | arrived)", "y", "p", curves));

    json args = json::array();
    for (const double t : thetas) {
        args.push_back(t);
    }
    const auto [lo, hi] = central_window(scenario);
    finish_run(out, "sweep", {{"thetas", args}}, scenario,
               {{"central_window_bins", {lo, hi}}},
               {"sweep.csv", "sweep_visibility.svg", "sweep_arrival.svg"}, started);
}

} // namespace tsmu
