#include "tsmu/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "tsmu/errors.hpp"

namespace tsmu {

using nlohmann::json;

namespace {

/// One JSON object of the config; remembers which keys were read so that
/// leftovers can be rejected.
class Section {
  public:
    Section(const json &j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_.empty() ? "config" : path_, "must be a JSON object");
        }
    }

    [[nodiscard]] std::string field(const std::string &key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json *find(const std::string &key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string &key, double &out) {
        if (const json *v = find(key)) {
            if (!v->is_number()) {
                throw ConfigError(field(key), "must be a number");
            }
            out = v->get<double>();
        }
    }

    void maybe_number(const std::string &key, std::optional<double> &out) {
        if (const json *v = find(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            if (!v->is_number()) {
                throw ConfigError(field(key), "must be a number or null");
            }
            out = v->get<double>();
        }
    }

    void count(const std::string &key, std::size_t &out) {
        if (const json *v = find(key)) {
            if (!v->is_number_unsigned()) {
                throw ConfigError(field(key), "must be a non-negative integer");
            }
            out = v->get<std::size_t>();
        }
    }

    void integer(const std::string &key, int &out) {
        if (const json *v = find(key)) {
            if (!v->is_number_integer()) {
                throw ConfigError(field(key), "must be an integer");
            }
            out = v->get<int>();
        }
    }

    void boolean(const std::string &key, bool &out) {
        if (const json *v = find(key)) {
            if (!v->is_boolean()) {
                throw ConfigError(field(key), "must be true or false");
            }
            out = v->get<bool>();
        }
    }

    std::optional<std::string> text(const std::string &key) {
        if (const json *v = find(key)) {
            if (!v->is_string()) {
                throw ConfigError(field(key), "must be a string");
            }
            return v->get<std::string>();
        }
        return std::nullopt;
    }

    void finish() const {
        for (const auto &[key, value] : j_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError(field(key), "unknown key");
            }
        }
    }

  private:
    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

void put(json &j, const char *key, const std::optional<double> &v) {
    if (v) {
        j[key] = *v;
    }
}

const char *lethal_name(Lethal l) {
    switch (l) {
    case Lethal::Upper:
        return "U";
    case Lethal::Lower:
        return "L";
    case Lethal::None:
        break;
    }
    return "none";
}

double channel_omega(const ScenarioConfig &c) {
    return 1.0 / (2.0 * c.screen.slit_width * c.screen.slit_width);
}

double resolved_offset(const ScenarioConfig &c) {
    if (c.screen.channel_offset) {
        return *c.screen.channel_offset;
    }
    if (c.screen.profile == ApertureProfile::Hard) {
        return 0.0;
    }
    return 0.5 * c.packet.k_x * c.packet.k_x - 1.5 * channel_omega(c);
}

double on_lattice(double t, double dt) { return std::round(t / dt) * dt; }

} // namespace

ScenarioConfig config_from_json(const json &doc) {
    if (doc.is_object() && doc.contains("config")) {
        return config_from_json(doc.at("config"));
    }
    ScenarioConfig c;
    Section root(doc, "");
    root.integer("schema_version", c.schema_version);
    if (root.find("schema_version") == nullptr) {
        throw ConfigError("schema_version", "is required");
    }
    if (c.schema_version != kSchemaVersion) {
        throw ConfigError("schema_version",
                          "unsupported version " + std::to_string(c.schema_version));
    }
    if (const json *g = root.find("grid")) {
        Section s(*g, "grid");
        s.count("nx", c.grid.nx);
        s.count("ny", c.grid.ny);
        s.number("lx", c.grid.lx);
        s.number("ly", c.grid.ly);
        s.finish();
    }
    if (const json *g = root.find("screen")) {
        Section s(*g, "screen");
        s.number("x", c.screen.x);
        s.number("thickness", c.screen.thickness);
        s.maybe_number("V0", c.screen.V0);
        s.number("slit_separation", c.screen.slit_separation);
        s.number("slit_width", c.screen.slit_width);
        if (const auto p = s.text("profile")) {
            if (*p == "gaussian") {
                c.screen.profile = ApertureProfile::Gaussian;
            } else if (*p == "hard") {
                c.screen.profile = ApertureProfile::Hard;
            } else {
                throw ConfigError("screen.profile", "must be \"gaussian\" or \"hard\"");
            }
        }
        s.maybe_number("channel_offset", c.screen.channel_offset);
        s.number("offset_ramp", c.screen.offset_ramp);
        s.boolean("closed", c.screen.closed);
        s.finish();
    }
    if (const json *g = root.find("packet")) {
        Section s(*g, "packet");
        s.number("x0", c.packet.x0);
        s.number("sigma_x", c.packet.sigma_x);
        s.number("k_x", c.packet.k_x);
        s.number("focus_time", c.packet.focus_time);
        s.number("y_taper", c.packet.y_taper);
        s.finish();
    }
    if (const json *g = root.find("coupling")) {
        Section s(*g, "coupling");
        s.number("theta", c.coupling.theta);
        s.number("lambda_U", c.coupling.lambda_U);
        s.number("lambda_L", c.coupling.lambda_L);
        if (const auto l = s.text("lethal")) {
            if (*l == "none") {
                c.coupling.lethal = Lethal::None;
            } else if (*l == "U") {
                c.coupling.lethal = Lethal::Upper;
            } else if (*l == "L") {
                c.coupling.lethal = Lethal::Lower;
            } else {
                throw ConfigError("coupling.lethal", "must be \"none\", \"U\" or \"L\"");
            }
        }
        s.finish();
    }
    if (const json *g = root.find("schedule")) {
        Section s(*g, "schedule");
        s.number("t0", c.schedule.t0);
        s.maybe_number("tS", c.schedule.tS);
        s.maybe_number("tD", c.schedule.tD);
        s.number("flight_time", c.schedule.flight_time);
        s.number("dt", c.schedule.dt);
        s.finish();
    }
    if (const json *g = root.find("bins")) {
        Section s(*g, "bins");
        s.number("delta", c.bin_delta);
        s.finish();
    }
    if (const auto m = root.text("mode")) {
        if (*m == "numeric") {
            c.mode = RunMode::Numeric;
        } else if (*m == "analytic") {
            c.mode = RunMode::Analytic;
        } else {
            throw ConfigError("mode", "must be \"numeric\" or \"analytic\"");
        }
    }
    root.number("epsilon", c.epsilon);
    root.finish();
    return c;
}

json config_to_json(const ScenarioConfig &c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"lx", c.grid.lx}, {"ly", c.grid.ly}};
    json s = {{"x", c.screen.x},
              {"thickness", c.screen.thickness},
              {"slit_separation", c.screen.slit_separation},
              {"slit_width", c.screen.slit_width},
              {"profile", c.screen.profile == ApertureProfile::Hard ? "hard" : "gaussian"},
              {"offset_ramp", c.screen.offset_ramp},
              {"closed", c.screen.closed}};
    put(s, "V0", c.screen.V0);
    put(s, "channel_offset", c.screen.channel_offset);
    j["screen"] = s;
    j["packet"] = {{"x0", c.packet.x0},
                   {"sigma_x", c.packet.sigma_x},
                   {"k_x", c.packet.k_x},
                   {"focus_time", c.packet.focus_time},
                   {"y_taper", c.packet.y_taper}};
    j["coupling"] = {{"theta", c.coupling.theta},
                     {"lambda_U", c.coupling.lambda_U},
                     {"lambda_L", c.coupling.lambda_L},
                     {"lethal", lethal_name(c.coupling.lethal)}};
    json t = {{"t0", c.schedule.t0}, {"flight_time", c.schedule.flight_time},
              {"dt", c.schedule.dt}};
    put(t, "tS", c.schedule.tS);
    put(t, "tD", c.schedule.tD);
    j["schedule"] = t;
    j["bins"] = {{"delta", c.bin_delta}};
    j["mode"] = c.mode == RunMode::Analytic ? "analytic" : "numeric";
    j["epsilon"] = c.epsilon;
    return j;
}

ScenarioConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError("", "'" + path.string() + "' is not valid JSON: " + e.what());
    }
    ScenarioConfig c = config_from_json(doc);
    validate_config(c);
    return c;
}

ScreenSpec screen_spec(const ScenarioConfig &c) {
    ScreenSpec s;
    s.x_start = c.screen.x;
    s.thickness = c.screen.thickness;
    s.barrier_height = c.screen.V0.value_or(50.0 * 0.5 * c.packet.k_x * c.packet.k_x);
    const double mid = 0.5 * c.grid.ly;
    s.apertures = {Aperture{mid + 0.5 * c.screen.slit_separation, c.screen.slit_width},
                   Aperture{mid - 0.5 * c.screen.slit_separation, c.screen.slit_width}};
    s.profile = c.screen.profile;
    s.channel_offset = resolved_offset(c);
    s.offset_ramp = c.screen.offset_ramp;
    s.closed = c.screen.closed;
    return s;
}

double nominal_exit_time(const ScenarioConfig &c) {
    const double k = c.packet.k_x;
    double t = (c.screen.x - c.packet.x0) / k;
    if (c.screen.profile == ApertureProfile::Hard) {
        return t + c.screen.thickness / k;
    }
    const double omega = channel_omega(c);
    const double offset = resolved_offset(c);
    const double ramp = c.screen.offset_ramp;
    const double b = c.screen.thickness;
    constexpr int kSamples = 2000;
    for (int n = 0; n < kSamples; ++n) {
        const double x = (n + 0.5) / kSamples * b;
        const double depth = std::min(x, b - x);
        double r = 1.0;
        if (ramp > 0.0 && depth < ramp) {
            const double s = std::sin(0.5 * std::numbers::pi * depth / ramp);
            r = s * s;
        }
        const double kinetic = k * k - omega - 2.0 * offset * r;
        if (!(kinetic > 0.0)) {
            throw ConfigError("screen.channel_offset",
                              "closes the slit channels at the packet's mean energy");
        }
        t += (b / kSamples) / std::sqrt(kinetic);
    }
    return t;
}

Schedule resolve_schedule(const ScenarioConfig &c) {
    const double dt = c.schedule.dt;
    if (!(dt > 0.0)) {
        throw ConfigError("schedule.dt", "must be positive");
    }
    Schedule s;
    s.t0 = c.schedule.t0;
    s.dt = dt;
    s.tS = c.schedule.tS.value_or(s.t0 + on_lattice(nominal_exit_time(c), dt));
    s.tD = c.schedule.tD.value_or(s.tS + on_lattice(c.schedule.flight_time, dt));
    s.validate();
    return s;
}

void validate_config(const ScenarioConfig &c) {
    if (c.schema_version != kSchemaVersion) {
        throw ConfigError("schema_version", "unsupported version");
    }
    try {
        c.grid.validate();
    } catch (const ShapeError &e) {
        throw ConfigError("grid", e.what());
    }
    if (!(c.packet.k_x > 0.0)) {
        throw ConfigError("packet.k_x", "must be positive");
    }
    if (!(c.packet.sigma_x > 0.0)) {
        throw ConfigError("packet.sigma_x", "must be positive");
    }
    if (!(c.packet.x0 + 3.0 * c.packet.initial_width() < c.screen.x)) {
        throw ConfigError("packet.x0", "packet must start three widths left of the screen");
    }
    if (!(c.packet.x0 - 3.0 * c.packet.initial_width() > 0.0)) {
        throw ConfigError("packet.x0", "packet must start three widths right of the wall");
    }
    if (!(c.screen.slit_separation > 0.0)) {
        throw ConfigError("screen.slit_separation", "must be positive");
    }
    if (!(c.screen.slit_width > 0.0)) {
        throw ConfigError("screen.slit_width", "must be positive");
    }
    if (!(c.epsilon > 0.0)) {
        throw ConfigError("epsilon", "must be positive");
    }
    if (!(c.coupling.theta >= 0.0 && c.coupling.theta <= 0.5 * std::numbers::pi + 1e-12)) {
        throw ConfigError("coupling.theta", "must lie in [0, pi/2]");
    }
    if (!(c.coupling.lambda_U > 0.0)) {
        throw ConfigError("coupling.lambda_U", "must be positive");
    }
    if (!(c.coupling.lambda_L > 0.0)) {
        throw ConfigError("coupling.lambda_L", "must be positive");
    }
    if (!(c.schedule.flight_time > 0.0)) {
        throw ConfigError("schedule.flight_time", "must be positive");
    }
    const ScreenSpec screen = screen_spec(c);
    const double mid = c.grid.dy() * static_cast<double>(c.grid.ny / 2);
    if (!c.screen.closed) {
        const Aperture &up = screen.apertures[0];
        const Aperture &lo = screen.apertures[1];
        if (!(up.center - 3.0 * up.width >= mid && lo.center + 3.0 * lo.width <= mid)) {
            throw ConfigError("screen.slit_separation",
                              "each detector window must contain exactly one slit");
        }
    }
    (void)make_bin_spec(c.grid, c.bin_delta);
    if (c.screen.profile == ApertureProfile::Gaussian && !c.screen.closed) {
        (void)nominal_exit_time(c);
    }
    try {
        (void)resolve_schedule(c);
    } catch (const ScheduleError &e) {
        throw ConfigError("schedule", e.what());
    }
}

namespace {

ScenarioConfig checked(ScenarioConfig c) {
    validate_config(c);
    return c;
}

} // namespace

Scenario::Scenario(ScenarioConfig config)
    : config_(checked(std::move(config))),
      potential_(build_potential(config_.grid, screen_spec(config_))),
      plan_(build_propagator(config_.grid, potential_, config_.schedule.dt)),
      schedule_(resolve_schedule(config_)),
      bins_(make_bin_spec(config_.grid, config_.bin_delta)),
      families_(config_.grid),
      initial_(initial_state(config_.grid, config_.packet, config_.schedule.t0)) {
    const GridSpec &g = config_.grid;
    coupling_.theta = config_.coupling.theta;
    coupling_.lambda_U = config_.coupling.lambda_U;
    coupling_.lambda_L = config_.coupling.lambda_L;
    coupling_.upper_window = {potential_.screen_col_lo, g.nx, split_row(), g.ny};
    coupling_.lower_window = {potential_.screen_col_lo, g.nx, 0, split_row()};
    coupling_.validate();

    families_.add(y_bin_family(g, bins_.rows_per_bin));
    families_.add(slit_family(g, potential_.screen_col_lo, split_row()));
    families_.add(detector_family(g));
    families_.add(arrival_family(g, potential_.screen_col_hi, bins_.rows_per_bin));
    families_.add(make_projector_family(g, "identity", {identity_projector(g)}));

    exit_time_ = config_.screen.closed ? schedule_.tS - schedule_.t0 : nominal_exit_time(config_);
}

OracleSpec Scenario::nominal_oracle() const {
    const auto &ap = potential_.apertures;
    const double k = config_.packet.k_x;
    const double flight = schedule_.tD - schedule_.t0 - exit_time_;
    return OracleSpec{ap[0].center, ap[1].center, ap[0].width, k * flight, k};
}

ArrivalMoments arrival_moments(const WaveFunction &psi, std::size_t col) {
    const GridSpec &g = psi.grid();
    double weight = 0.0;
    double sx = 0.0;
    double sk = 0.0;
    for (std::size_t m = 0; m < kDetectorLevels; ++m) {
        if (psi.channel_is_zero(m)) {
            continue;
        }
        for (std::size_t i = col; i < g.nx; ++i) {
            for (std::size_t j = 0; j < g.ny; ++j) {
                const Complex a = psi.at(m, i, j);
                const double q = std::norm(a);
                weight += q;
                sx += q * g.x_center(i);
                if (i > 0 && i + 1 < g.nx) {
                    const Complex d = (psi.at(m, i + 1, j) - psi.at(m, i - 1, j)) / (2.0 * g.dx());
                    sk += (std::conj(a) * d).imag();
                }
            }
        }
    }
    ArrivalMoments out;
    out.weight = weight * g.cell_volume();
    if (weight > 0.0) {
        out.mean_x = sx / weight;
        out.mean_kx = sk / weight;
    }
    return out;
}

OracleSpec matched_oracle(const Scenario &scenario, const WaveFunction &psi_tD) {
    const ArrivalMoments mom = arrival_moments(psi_tD, scenario.exit_col());
    if (!(mom.weight > 0.0) || !(mom.mean_kx > 0.0)) {
        throw StateError("nothing has arrived beyond the screen");
    }
    const auto &ap = scenario.potential().apertures;
    const double x_exit = scenario.grid().dx() * static_cast<double>(scenario.exit_col());
    return OracleSpec{ap[0].center, ap[1].center, ap[0].width, mom.mean_x - x_exit,
                      mom.mean_kx};
}

} // namespace tsmu
