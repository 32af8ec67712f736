// tsmu: batch driver for the two-slit model universe.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsmu/commands.hpp"
#include "tsmu/errors.hpp"
#include "tsmu/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitConsistency = 3;
constexpr int kExitConditioning = 4;
constexpr int kExitOther = 1;

struct Options {
    std::string config;
    std::optional<std::string> mode;
    std::optional<double> theta;
    std::optional<double> epsilon;
    std::string condition = "U";
    std::string schema = "slit-y";
    std::vector<double> thetas;
    std::string out = ".";
};

void common_options(CLI::App *cmd, Options &o) {
    cmd->add_option("--config", o.config, "Scenario JSON (or a run manifest)")->required();
    cmd->add_option("--mode", o.mode, "numeric or analytic")
        ->check(CLI::IsMember({"numeric", "analytic"}));
    cmd->add_option("--theta", o.theta, "Detector coupling angle in radians");
    cmd->add_option("--epsilon", o.epsilon, "Decoherence tolerance relative to the largest "
                                            "diagonal entry");
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
}

int run(const std::string &command, const Options &o) {
    tsmu::Overrides ov;
    ov.theta = o.theta;
    ov.epsilon = o.epsilon;
    if (o.mode) {
        ov.mode = *o.mode == "analytic" ? tsmu::RunMode::Analytic : tsmu::RunMode::Numeric;
    }
    tsmu::ScenarioConfig config = tsmu::apply_overrides(tsmu::load_config(o.config), ov);
    tsmu::validate_config(config);
    if (command == "simulate") {
        tsmu::cmd_simulate(config, o.out);
    } else if (command == "dfunc") {
        tsmu::cmd_dfunc(config, o.schema, o.out);
    } else if (command == "conditional") {
        tsmu::cmd_conditional(config, o.condition, o.out);
    } else {
        tsmu::cmd_sweep(config, o.thetas.empty() ? tsmu::default_thetas() : o.thetas, o.out);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Decoherent histories of a two-slit model universe"};
    app.require_subcommand(1);
    Options o;

    CLI::App *simulate = app.add_subcommand("simulate", "Arrival distribution p(Y)");
    common_options(simulate, o);

    CLI::App *dfunc = app.add_subcommand("dfunc", "Decoherence functional of a history set");
    common_options(dfunc, o);
    dfunc->add_option("--schema", o.schema, "History set preset or schema JSON file")
        ->capture_default_str();

    CLI::App *conditional =
        app.add_subcommand("conditional", "First-person probabilities given a condition");
    common_options(conditional, o);
    conditional->add_option("--condition", o.condition, "U, L, alive or m=K")
        ->capture_default_str();

    CLI::App *sweep = app.add_subcommand("sweep", "Visibility and decoherence against theta");
    common_options(sweep, o);
    sweep->add_option("--thetas", o.thetas, "Coupling angles (default 0 pi/6 pi/4 pi/3 pi/2)")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, o);
    } catch (const tsmu::ConsistencyError &e) {
        std::cerr << "tsmu: consistency error: " << e.what() << '\n';
        return kExitConsistency;
    } catch (const tsmu::ConditioningError &e) {
        std::cerr << "tsmu: conditioning error: " << e.what() << '\n';
        return kExitConditioning;
    } catch (const tsmu::ConfigError &e) {
        std::cerr << "tsmu: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const tsmu::ScheduleError &e) {
        std::cerr << "tsmu: schedule error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const tsmu::PartitionError &e) {
        std::cerr << "tsmu: partition error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const tsmu::UsageError &e) {
        std::cerr << "tsmu: usage error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "tsmu: " << e.what() << '\n';
        return kExitOther;
    }
}
