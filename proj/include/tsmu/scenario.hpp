#pragma once

/**
 * @file
 * Scenario configuration (JSON, versioned, strict) and the canonical
 * two-slit model universe built from it.
 */

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "tsmu/bins.hpp"
#include "tsmu/dynamics.hpp"
#include "tsmu/grid.hpp"
#include "tsmu/histories.hpp"
#include "tsmu/oracle.hpp"

namespace tsmu {

inline constexpr int kSchemaVersion = 1;

enum class RunMode : std::uint8_t { Numeric, Analytic };

/// Which slit, if any, carries radiation that kills the observer.
enum class Lethal : std::uint8_t { None, Upper, Lower };

struct ScreenConfig {
    double x = 36.0;
    double thickness = 10.0;
    /// Defaults to 50 k_x^2 / 2.
    std::optional<double> V0;
    double slit_separation = 12.0;
    double slit_width = 1.0;
    ApertureProfile profile = ApertureProfile::Gaussian;
    /// Defaults to k_x^2 / 2 - 3 omega / 2 for the Gaussian profile, 0 for
    /// the hard one.
    std::optional<double> channel_offset;
    double offset_ramp = 4.0;
    bool closed = false;

    friend bool operator==(const ScreenConfig &, const ScreenConfig &) = default;
};

struct CouplingConfig {
    double theta = 1.5707963267948966;
    double lambda_U = 0.1;
    double lambda_L = 0.2;
    Lethal lethal = Lethal::None;

    friend bool operator==(const CouplingConfig &, const CouplingConfig &) = default;
};

struct ScheduleConfig {
    double t0 = 0.0;
    /// Defaults to the nominal screen exit time, rounded to the dt lattice.
    std::optional<double> tS;
    /// Defaults to tS + flight_time, rounded to the dt lattice.
    std::optional<double> tD;
    double flight_time = 16.0;
    double dt = 0.02;

    friend bool operator==(const ScheduleConfig &, const ScheduleConfig &) = default;
};

struct ScenarioConfig {
    int schema_version = kSchemaVersion;
    GridSpec grid{512, 512, 102.4, 102.4};
    ScreenConfig screen;
    PacketSpec packet{18.0, 5.0, 2.5, 0.0, 4.0};
    CouplingConfig coupling;
    ScheduleConfig schedule;
    double bin_delta = 0.8;
    RunMode mode = RunMode::Numeric;
    double epsilon = kDefaultEpsilon;

    friend bool operator==(const ScenarioConfig &, const ScenarioConfig &) = default;
};

/// Strict parse of a config document: unknown keys and wrong types raise
/// ConfigError naming the field; absent keys keep their defaults. A
/// document with a "config" member (a run manifest) is read through it.
[[nodiscard]] ScenarioConfig config_from_json(const nlohmann::json &doc);

/// Inverse of config_from_json; unset optional fields are omitted.
[[nodiscard]] nlohmann::json config_to_json(const ScenarioConfig &config);

/// Reads and validates; throws ConfigError for missing files and parse
/// errors as well.
[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path &path);

/// Cross-checks that need the whole config; throws ConfigError.
void validate_config(const ScenarioConfig &config);

[[nodiscard]] ScreenSpec screen_spec(const ScenarioConfig &config);

/// Time for a classical particle with the packet's mean speed to leave the
/// screen, from t0. Uses the local channel speed inside the screen.
[[nodiscard]] double nominal_exit_time(const ScenarioConfig &config);

/// Schedule with defaults resolved; throws ScheduleError when tS or tD is
/// off the dt lattice.
[[nodiscard]] Schedule resolve_schedule(const ScenarioConfig &config);

/**
 * @brief Everything a command needs, built once from a config.
 *
 * Registered families: "Y" (bins over all columns), "slit" ({U, L,
 * blocked} split at the screen face and the midline row), "detector",
 * "arrival" (bins beyond the screen exit plus "away") and "identity".
 */
class Scenario {
  public:
    explicit Scenario(ScenarioConfig config);

    [[nodiscard]] const ScenarioConfig &config() const noexcept { return config_; }
    [[nodiscard]] const GridSpec &grid() const noexcept { return config_.grid; }
    [[nodiscard]] const PotentialField &potential() const noexcept { return potential_; }
    [[nodiscard]] const PropagatorPlan &plan() const noexcept { return plan_; }
    [[nodiscard]] const DetectorCoupling &coupling() const noexcept { return coupling_; }
    [[nodiscard]] const Schedule &schedule() const noexcept { return schedule_; }
    [[nodiscard]] const BinSpec &bins() const noexcept { return bins_; }
    [[nodiscard]] const FamilyRegistry &families() const noexcept { return families_; }
    [[nodiscard]] const WaveFunction &initial() const noexcept { return initial_; }
    [[nodiscard]] std::size_t split_row() const noexcept { return config_.grid.ny / 2; }
    [[nodiscard]] std::size_t exit_col() const noexcept { return potential_.screen_col_hi; }
    [[nodiscard]] double exit_time() const noexcept { return exit_time_; }
    /// Oracle with L = k_x (tD - exit time).
    [[nodiscard]] OracleSpec nominal_oracle() const;

  private:
    ScenarioConfig config_;
    PotentialField potential_;
    PropagatorPlan plan_;
    DetectorCoupling coupling_;
    Schedule schedule_;
    BinSpec bins_;
    FamilyRegistry families_;
    WaveFunction initial_;
    double exit_time_ = 0.0;
};

/// Weight, <x> and <k_x> of the part of psi beyond column `col`.
struct ArrivalMoments {
    double weight = 0.0;
    double mean_x = 0.0;
    double mean_kx = 0.0;
};
[[nodiscard]] ArrivalMoments arrival_moments(const WaveFunction &psi, std::size_t col);

/// Oracle whose flight time is the one the arrived packet actually had:
/// L = <x> - x_exit and k_x = <k_x> of the arrived part.
[[nodiscard]] OracleSpec matched_oracle(const Scenario &scenario, const WaveFunction &psi_tD);

} // namespace tsmu
