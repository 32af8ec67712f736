#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tsmu/commands.hpp"
#include "tsmu/errors.hpp"
#include "tsmu/histories.hpp"
#include "tsmu/inference.hpp"

using namespace tsmu;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

HistoryTree evolve(const Scenario &sc, const SchemaNode &schema) {
    return evolve_branch_tree(schema, sc.families(), sc.plan(), sc.coupling(), sc.schedule(),
                              sc.initial());
}

HistoryTree evolve(const Scenario &sc, const std::string &preset) {
    return evolve(sc, schema_preset(preset, sc.schedule()));
}

WaveFunction final_state(const Scenario &sc) {
    return run_tsmu(sc.plan(), sc.coupling(), sc.schedule(), sc.initial()).psi_tD;
}

bool starts_with(const std::string &s, const std::string &prefix) {
    return s.compare(0, prefix.size(), prefix) == 0;
}

/// Largest |D(a, b)| with a on the U branch and b on the L branch.
double slit_block(const DecoherenceFunctional &d) {
    double worst = 0.0;
    for (std::size_t a = 0; a < d.size(); ++a) {
        for (std::size_t b = 0; b < d.size(); ++b) {
            if (starts_with(d.labels[a], "U,") && starts_with(d.labels[b], "L,")) {
                worst = std::max(worst, std::abs(d.at(a, b)));
            }
        }
    }
    return worst;
}

const Scenario &recorded() {
    static const Scenario sc(testing::small_config(kPi / 2.0));
    return sc;
}

const Scenario &unrecorded() {
    static const Scenario sc(testing::small_config(0.0));
    return sc;
}

} // namespace

TEST_CASE("identity history set has the evolved state as its only leaf") {
    const HistoryTree t = evolve(recorded(), "identity");
    REQUIRE(t.leaves.size() == 1);
    REQUIRE(t.labels().front() == "I");
    REQUIRE(l2_distance(t.leaf_state(0), final_state(recorded())) < 1e-12);
}

TEST_CASE("slit-y leaves carry the record of their slit") {
    const Scenario &sc = recorded();
    const HistoryTree t = evolve(sc, "slit-y");
    REQUIRE(t.leaves.size() == 3 * sc.bins().count);
    REQUIRE(t.leaves.front().path == std::vector<std::string>{"U", "Y=0"});
    const ProjectorFamily det = detector_family(sc.grid());
    double upper = 0.0;
    for (std::size_t k = 0; k < t.leaves.size(); ++k) {
        const WaveFunction psi = t.leaf_state(k);
        const std::string &first = t.leaves[k].path.front();
        if (first == "U") {
            upper += norm_sq(psi);
            REQUIRE(l2_distance(apply_projector(det.members[1], psi), psi) == 0.0);
        } else if (first == "L") {
            REQUIRE(l2_distance(apply_projector(det.members[2], psi), psi) == 0.0);
        }
    }
    REQUIRE(upper > 1e-3);
}

TEST_CASE("slit-y-upper refines by Y on the upper branch only") {
    const Scenario &sc = recorded();
    const HistoryTree t = evolve(sc, "slit-y-upper");
    REQUIRE(t.leaves.size() == sc.bins().count + 2);
    const std::vector<std::string> labels = t.labels();
    REQUIRE(labels[0] == "U,Y=0");
    REQUIRE(labels[sc.bins().count] == "L");
    REQUIRE(labels.back() == "blocked");
}

TEST_CASE("branches sum to the evolved state") {
    const Scenario &sc = recorded();
    const WaveFunction psi = final_state(sc);
    for (const char *preset : {"slit-y", "slit-y-upper", "slit-y-detector", "arrival-slit", "y", "slit"}) {
        const HistoryTree t = evolve(sc, preset);
        REQUIRE(l2_distance(branch_sum(t), psi) <= 1e-10);
    }
    const HistoryTree single = evolve(sc, "identity");
    REQUIRE(l2_distance(branch_sum(single), single.leaf_state(0)) == 0.0);
}

TEST_CASE("an exclusive pair of leaves reconstructs the state") {
    const Scenario &sc = recorded();
    const GridSpec &g = sc.grid();
    Projector top = identity_projector(g);
    top.label = "top";
    Projector bottom = identity_projector(g);
    bottom.label = "bottom";
    for (std::size_t j = 0; j < g.ny; ++j) {
        top.ymask[j] = j >= g.ny / 3 ? 1 : 0;
        bottom.ymask[j] = 1 - top.ymask[j];
    }
    FamilyRegistry reg(g);
    reg.add(make_projector_family(g, "halves", {top, bottom}));
    SchemaNode schema;
    schema.time = sc.schedule().tD;
    schema.family = "halves";
    const HistoryTree t = evolve_branch_tree(schema, reg, sc.plan(), sc.coupling(),
                                             sc.schedule(), sc.initial());
    const std::vector<std::pair<Complex, WaveFunction>> terms = {{1.0, t.leaf_state(0)},
                                                                 {1.0, t.leaf_state(1)}};
    REQUIRE(l2_distance(linear_combine(terms), final_state(sc)) == 0.0);
}

TEST_CASE("perfect records decohere the slit-y set") {
    const HistoryTree t = evolve(recorded(), "slit-y");
    const DecoherenceFunctional d = decoherence_functional(t);
    double worst = 0.0;
    for (std::size_t a = 0; a < d.size(); ++a) {
        for (std::size_t b = 0; b < d.size(); ++b) {
            if (a != b) {
                worst = std::max(worst, std::abs(d.at(a, b)));
            }
        }
    }
    REQUIRE(worst <= 1e-9);
    REQUIRE(d.trace() == Approx(1.0).margin(1e-10));
    REQUIRE(d.hermiticity_defect() < 1e-15);
    const DecoherenceVerdict v = is_decoherent(d, 1e-6);
    REQUIRE(v.decoherent);
    REQUIRE(v.worst == worst);
}

TEST_CASE("without records the slit branches interfere") {
    const DecoherenceFunctional d = decoherence_functional(evolve(unrecorded(), "slit-y"));
    REQUIRE(slit_block(d) > 0.01 * d.max_diagonal());
    REQUIRE(d.trace() == Approx(1.0).margin(1e-10));
    REQUIRE_FALSE(is_decoherent(d).decoherent);
    REQUIRE_THROWS_AS(branch_probabilities(d), ConsistencyError);
}

TEST_CASE("a diagonal functional is decoherent") {
    DecoherenceFunctional d;
    d.labels = {"a", "b", "c"};
    d.matrix.assign(9, Complex{});
    d.matrix[0] = 0.2;
    d.matrix[4] = 0.5;
    d.matrix[8] = 0.3;
    const DecoherenceVerdict v = is_decoherent(d, 0.0);
    REQUIRE(v.decoherent);
    REQUIRE(v.worst == 0.0);
    REQUIRE(v.max_diagonal == 0.5);
    const ProbabilityTable p = branch_probabilities(d, 0.0);
    REQUIRE(p.at("b") == 0.5);
    REQUIRE(p.total() == Approx(1.0));
    REQUIRE_THROWS_AS(p.at("d"), UsageError);
}

TEST_CASE("a partial record leaves an upper-lower offender") {
    const Scenario sc(testing::small_config(kPi / 4.0));
    const DecoherenceFunctional d = decoherence_functional(evolve(sc, "slit-y"));
    const DecoherenceVerdict v = is_decoherent(d, 1e-6);
    REQUIRE_FALSE(v.decoherent);
    const std::string a = d.labels[v.worst_a].substr(0, 2);
    const std::string b = d.labels[v.worst_b].substr(0, 2);
    REQUIRE(((a == "U," && b == "L,") || (a == "L," && b == "U,")));
    REQUIRE(v.worst == Approx(slit_block(d)));
}

TEST_CASE("slit interference falls as the product of the unkicked amplitudes") {
    const double base = slit_block(decoherence_functional(evolve(unrecorded(), "slit-y")));
    for (double theta : {kPi / 6.0, kPi / 4.0, kPi / 3.0}) {
        const Scenario sc(testing::small_config(theta));
        const double block = slit_block(decoherence_functional(evolve(sc, "slit-y")));
        const double c = std::cos(theta);
        REQUIRE(block / base == Approx(c * c).epsilon(1e-9));
    }
    const double full = slit_block(decoherence_functional(evolve(recorded(), "slit-y")));
    REQUIRE(full / base < 1e-12);
}

TEST_CASE("symmetric slits share the transmitted probability") {
    const ProbabilityTable p =
        branch_probabilities(decoherence_functional(evolve(recorded(), "slit")));
    const double u = p.at("U");
    const double l = p.at("L");
    REQUIRE(u > 0.0);
    REQUIRE(u / (u + l) == Approx(0.5).margin(0.02));
    REQUIRE(p.total() == Approx(1.0).margin(1e-10));
}

TEST_CASE("Y marginal of the slit-y set equals the Y-only probabilities") {
    const Scenario &sc = recorded();
    const ProbabilityTable joint = branch_probabilities(decoherence_functional(evolve(sc, "slit-y")));
    const ProbabilityTable y = branch_probabilities(decoherence_functional(evolve(sc, "y")));
    const ProbabilityTable marginal = marginalize(joint, "Y=");
    REQUIRE(marginal.labels == y.labels);
    for (std::size_t k = 0; k < y.size(); ++k) {
        REQUIRE(std::abs(marginal.values[k] - y.values[k]) <= 1e-10);
    }
}

TEST_CASE("coarse graining by groups of leaves") {
    const Scenario &sc = recorded();
    const HistoryTree t = evolve(sc, "slit-y");
    const ProbabilityTable fine = branch_probabilities(decoherence_functional(t));

    SECTION("one cell is the whole state") {
        const HistoryTree all = coarse_grain(t, {{"all", t.labels()}});
        REQUIRE(l2_distance(all.leaf_state(0), branch_sum(t)) == 0.0);
        const ProbabilityTable p = branch_probabilities(decoherence_functional(all));
        REQUIRE(p.values[0] == Approx(1.0).margin(1e-10));
    }

    SECTION("slits summed per arrival bin") {
        std::vector<LeafGroup> groups;
        for (std::size_t k = 0; k < sc.bins().count; ++k) {
            const std::string y = "Y=" + std::to_string(k);
            groups.push_back({y, {"U," + y, "L," + y, "blocked," + y}});
        }
        const ProbabilityTable p = branch_probabilities(decoherence_functional(coarse_grain(t, groups)));
        for (const LeafGroup &g : groups) {
            const double members =
                fine.at(g.members[0]) + fine.at(g.members[1]) + fine.at(g.members[2]);
            REQUIRE(std::abs(p.at(g.label) - members) <= 1e-12);
        }
    }

    SECTION("random partitions stay decoherent and add") {
        std::mt19937 rng(20260101);
        const std::vector<std::string> labels = t.labels();
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t cells = 1 + rng() % 12;
            std::vector<LeafGroup> groups(cells);
            for (std::size_t c = 0; c < cells; ++c) {
                groups[c].label = "c" + std::to_string(c);
                groups[c].members.push_back(labels[c]);
            }
            for (std::size_t k = cells; k < labels.size(); ++k) {
                groups[rng() % cells].members.push_back(labels[k]);
            }
            const DecoherenceFunctional d = decoherence_functional(coarse_grain(t, groups));
            REQUIRE(is_decoherent(d).decoherent);
            const ProbabilityTable p = branch_probabilities(d);
            for (const LeafGroup &g : groups) {
                double members = 0.0;
                for (const std::string &m : g.members) {
                    members += fine.at(m);
                }
                REQUIRE(std::abs(p.at(g.label) - members) <= 1e-12);
            }
        }
    }

    SECTION("invalid partitions") {
        const std::vector<std::string> labels = t.labels();
        std::vector<std::string> missing(labels.begin() + 1, labels.end());
        REQUIRE_THROWS_AS(coarse_grain(t, {{"a", missing}}), PartitionError);
        REQUIRE_THROWS_AS(coarse_grain(t, {{"a", labels}, {"b", {labels[0]}}}), PartitionError);
        REQUIRE_THROWS_AS(coarse_grain(t, {{"a", labels}, {"b", {}}}), PartitionError);
        std::vector<std::string> extra = labels;
        extra.push_back("nowhere");
        REQUIRE_THROWS_AS(coarse_grain(t, {{"a", extra}}), PartitionError);
    }
}

TEST_CASE("history set errors") {
    const Scenario &sc = recorded();
    const Schedule &s = sc.schedule();
    auto at = [](double time, const std::string &family) {
        SchemaNode n;
        n.time = time;
        n.family = family;
        return n;
    };
    REQUIRE_THROWS_AS(evolve(sc, at(s.tS + 0.5 * s.dt, "slit")), ScheduleError);
    REQUIRE_THROWS_AS(evolve(sc, at(s.tD + s.dt, "Y")), ScheduleError);
    REQUIRE_THROWS_AS(evolve(sc, at(s.t0, "Y")), ScheduleError);
    SchemaNode backwards = at(s.tD, "Y");
    backwards.then.push_back(at(s.tS, "slit"));
    REQUIRE_THROWS_AS(evolve(sc, backwards), ScheduleError);
    REQUIRE_THROWS_AS(evolve(sc, at(s.tD, "nothing")), UsageError);

    FamilyRegistry other(GridSpec{16, 16, 4.0, 4.0});
    other.add(y_bin_family(GridSpec{16, 16, 4.0, 4.0}, 4));
    REQUIRE_THROWS_AS(evolve_branch_tree(at(s.tD, "Y"), other, sc.plan(), sc.coupling(), s,
                                         sc.initial()),
                      PartitionError);

    REQUIRE_THROWS_AS(branch_sum(HistoryTree{}), StateError);
    REQUIRE_THROWS_AS(decoherence_functional(HistoryTree{}), StateError);
    REQUIRE_THROWS_AS(coarse_grain(HistoryTree{}, {}), StateError);
}

TEST_CASE("product families resolve from their factors") {
    const Scenario &sc = recorded();
    REQUIRE(sc.families().contains("slit*detector"));
    REQUIRE_FALSE(sc.families().contains("slit*nothing"));
    const ProjectorFamily &f = sc.families().resolve("slit*detector");
    REQUIRE(f.size() == 9);
    REQUIRE(&sc.families().resolve("slit*detector") == &f);
}
