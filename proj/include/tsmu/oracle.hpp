#pragma once

/**
 * @file
 * Closed-form two-slit amplitudes: each slit is a Gaussian source of
 * |psi|^2 width w evolved by the free propagator for the flight time
 * T = L / k_x. Used as an independent check of the grid dynamics.
 */

#include <utility>
#include <vector>

#include "tsmu/bins.hpp"
#include "tsmu/grid.hpp"

namespace tsmu {

struct OracleSpec {
    double y_upper = 0.0;
    double y_lower = 0.0;
    double width = 1.0;
    double distance = 1.0;
    double k_x = 1.0;

    [[nodiscard]] double separation() const noexcept { return y_upper - y_lower; }
    [[nodiscard]] double flight_time() const noexcept { return distance / k_x; }
    /// Throws ConfigError unless d, w, L, k_x are all positive.
    void validate() const;
};

/// Free evolution of a normalized Gaussian of |psi|^2 width w centred at c,
/// evaluated at (y, t).
[[nodiscard]] Complex free_gaussian(double center, double width, double t, double y);

/// (psi_U(y), psi_L(y)) at the flight time.
[[nodiscard]] std::pair<Complex, Complex> oracle_amplitudes(const OracleSpec &spec, double y);

/**
 * @brief Binned arrival distribution with a given slit overlap.
 *
 * The density is |psi_U|^2 + |psi_L|^2 + 2 overlap Re(conj(psi_U) psi_L);
 * overlap 1 is the coherent pattern and overlap 0 the incoherent one.
 * Each bin is integrated with composite Simpson quadrature and the table is
 * normalized to unit sum.
 */
[[nodiscard]] std::vector<double> oracle_distribution_with_overlap(const OracleSpec &spec,
                                                                   double overlap,
                                                                   const BinSpec &bins);

[[nodiscard]] std::vector<double> oracle_distribution(const OracleSpec &spec, bool coherent,
                                                      const BinSpec &bins);

/// Unnormalized binned densities.
struct OracleDensities {
    std::vector<double> upper;
    std::vector<double> lower;
    /// |psi_U|^2 + |psi_L|^2.
    std::vector<double> incoherent;
    /// 2 Re(conj(psi_U) psi_L).
    std::vector<double> interference;
};
[[nodiscard]] OracleDensities oracle_densities(const OracleSpec &spec, const BinSpec &bins);

/// 2 pi T / d, the far-field fringe period.
[[nodiscard]] double oracle_fringe_period(const OracleSpec &spec);

} // namespace tsmu
