#include "tsmu/oracle.hpp"

#include <cmath>
#include <numbers>

#include "tsmu/errors.hpp"

namespace tsmu {

namespace {

constexpr int kSimpsonPanels = 32;

template <class Density>
double integrate_bin(double lo, double hi, Density f) {
    const double h = (hi - lo) / kSimpsonPanels;
    double s = f(lo) + f(hi);
    for (int k = 1; k < kSimpsonPanels; ++k) {
        s += (k % 2 == 1 ? 4.0 : 2.0) * f(lo + k * h);
    }
    return s * h / 3.0;
}

std::vector<double> normalized(std::vector<double> v) {
    double total = 0.0;
    for (double p : v) {
        total += p;
    }
    if (total > 0.0) {
        for (double &p : v) {
            p /= total;
        }
    }
    return v;
}

} // namespace

void OracleSpec::validate() const {
    if (!(separation() > 0.0)) {
        throw ConfigError("oracle.separation", "upper slit must lie above the lower slit");
    }
    if (!(width > 0.0)) {
        throw ConfigError("oracle.width", "must be positive");
    }
    if (!(distance > 0.0)) {
        throw ConfigError("oracle.distance", "must be positive");
    }
    if (!(k_x > 0.0)) {
        throw ConfigError("oracle.k_x", "must be positive");
    }
}

Complex free_gaussian(double center, double width, double t, double y) {
    const Complex spread{1.0, t / (2.0 * width * width)};
    const double u = y - center;
    const double prefactor = std::pow(2.0 * std::numbers::pi * width * width, -0.25);
    return prefactor / std::sqrt(spread) * std::exp(-u * u / (4.0 * width * width * spread));
}

std::pair<Complex, Complex> oracle_amplitudes(const OracleSpec &spec, double y) {
    const double t = spec.flight_time();
    return {free_gaussian(spec.y_upper, spec.width, t, y),
            free_gaussian(spec.y_lower, spec.width, t, y)};
}

OracleDensities oracle_densities(const OracleSpec &spec, const BinSpec &bins) {
    spec.validate();
    if (bins.count == 0) {
        throw ConfigError("bins", "no arrival intervals");
    }
    OracleDensities out;
    out.upper.resize(bins.count);
    out.lower.resize(bins.count);
    out.incoherent.resize(bins.count);
    out.interference.resize(bins.count);
    for (std::size_t k = 0; k < bins.count; ++k) {
        out.upper[k] = integrate_bin(bins.y_lo(k), bins.y_hi(k), [&](double y) {
            return std::norm(oracle_amplitudes(spec, y).first);
        });
        out.lower[k] = integrate_bin(bins.y_lo(k), bins.y_hi(k), [&](double y) {
            return std::norm(oracle_amplitudes(spec, y).second);
        });
        out.incoherent[k] = integrate_bin(bins.y_lo(k), bins.y_hi(k), [&](double y) {
            const auto [u, l] = oracle_amplitudes(spec, y);
            return std::norm(u) + std::norm(l);
        });
        out.interference[k] = integrate_bin(bins.y_lo(k), bins.y_hi(k), [&](double y) {
            const auto [u, l] = oracle_amplitudes(spec, y);
            return 2.0 * (std::conj(u) * l).real();
        });
    }
    return out;
}

std::vector<double> oracle_distribution_with_overlap(const OracleSpec &spec, double overlap,
                                                     const BinSpec &bins) {
    const OracleDensities d = oracle_densities(spec, bins);
    std::vector<double> p(bins.count);
    for (std::size_t k = 0; k < bins.count; ++k) {
        p[k] = d.incoherent[k] + overlap * d.interference[k];
    }
    return normalized(std::move(p));
}

std::vector<double> oracle_distribution(const OracleSpec &spec, bool coherent,
                                        const BinSpec &bins) {
    return oracle_distribution_with_overlap(spec, coherent ? 1.0 : 0.0, bins);
}

double oracle_fringe_period(const OracleSpec &spec) {
    return 2.0 * std::numbers::pi * spec.flight_time() / spec.separation();
}

} // namespace tsmu
