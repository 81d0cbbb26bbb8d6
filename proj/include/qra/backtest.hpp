#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "qra/core.hpp"
#include "qra/evaluate.hpp"
#include "qra/variants.hpp"

namespace qra {

struct BacktestConfig {
    int calibration_window_days = 72;
    VariantSpec variant{};
    QuantileGrid grid = QuantileGrid::percentiles();
    std::vector<double> alphas{50.0, 70.0, 90.0};
    bool crossing_repair = true;
    double test_significance = 0.05;
    /// Skip days whose fit fails (logged in the report) instead of aborting.
    bool skip_failed_days = false;
    int jobs = 1;
};

struct AlphaEvaluation {
    double alpha = 0.0;
    CoverageResult coverage;
    LrTestResult kupiec;
    LrTestResult christoffersen;
};

struct BacktestReport {
    std::string variant_name;
    BacktestConfig config;
    std::vector<AlphaEvaluation> per_alpha;
    double aps_value = 0.0;
    QuantileForecastSurface surface;
    std::string input_digest;   // over the serialized X and y
    std::string config_digest;  // over the config echo
    std::vector<CivilDate> skipped_days;
};

/// Slide a one-day-step calibration window over the point predictions: fit the
/// variant on the window_days*24 rows ending at day d-1, predict all 24 rows
/// of day d, and evaluate the concatenated surface against the actuals.
/// Deterministic for fixed inputs and config, independent of `jobs`.
BacktestReport run_backtest(const PointForecastMatrix& x, const HourlyTimeSeries& y,
                            const BacktestConfig& cfg);

/// One report per config on the shared inputs; prediction spans must agree
/// (SpanMismatchError otherwise).
std::vector<BacktestReport> compare_variants(const PointForecastMatrix& x,
                                             const HourlyTimeSeries& y,
                                             const std::vector<BacktestConfig>& cfgs);

/// metrics.csv + aps.csv + surface_<variant>.csv + provenance.json under dir.
/// Byte-identical across reruns with identical inputs.
void write_report_bundle(const std::string& dir, const std::vector<BacktestReport>& reports);

nlohmann::json config_to_json(const BacktestConfig& cfg);

}  // namespace qra
