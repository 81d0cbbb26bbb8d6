#pragma once

#include <cstdint>
#include <vector>

#include "qra/core.hpp"

namespace qra {

/// alpha% central prediction interval: bounds taken from the (100-alpha)/2
/// and (100+alpha)/2 percentile columns of a surface.
struct PredictionInterval {
    double alpha = 50.0;  // percent in (0, 100)
    double lower_level = 0.25;
    double upper_level = 0.75;
    std::vector<Timestamp> stamps;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct CoverageResult {
    double aec = 0.0;                 // percent of hits
    std::vector<std::uint8_t> hits;   // 1 when L_t <= P_t <= U_t
    std::size_t n = 0;
};

struct LrTestResult {
    double statistic = 0.0;
    int dof = 1;
    double significance = 0.05;
    double critical_value = 0.0;
    bool reject = false;
    /// Set when the hit sequence was degenerate (all hits or all misses);
    /// the statistic is still computed under the 0*ln(0) := 0 convention.
    bool degenerate = false;
};

/// Requires both levels to be present in the grid (no interpolation).
PredictionInterval build_interval(const QuantileForecastSurface& surface, double alpha);

/// Average Empirical Coverage over the closed interval [L_t, U_t].
CoverageResult aec(const PredictionInterval& interval, const HourlyTimeSeries& actual);

/// Aggregate Pinball Score: mean over timestamps and grid levels of
/// rho_k(P_t - Q_t(k)).
double aps(const QuantileForecastSurface& surface, const HourlyTimeSeries& actual);

/// Kupiec unconditional-coverage LR test of the hit proportion against
/// alpha/100; dof 1.
LrTestResult kupiec_test(const std::vector<std::uint8_t>& hits, double alpha, double significance);

/// Christoffersen conditional-coverage test: LR_cc = LR_uc + LR_ind with the
/// independence part from first-order Markov transition counts; dof 2.
LrTestResult christoffersen_test(const std::vector<std::uint8_t>& hits, double alpha,
                                 double significance);

}  // namespace qra
