#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "qra/core.hpp"
#include "qra/ingest.hpp"
#include "qra/transform.hpp"

namespace qra {

/// Lagged-price features per hour (day lags), optional exogenous columns from
/// the panel, optional intercept.
struct FeatureSpec {
    std::vector<int> lags{1, 2, 7};
    std::vector<std::string> exogenous;  // e.g. {"quantity"}
    bool include_intercept = true;
};

enum class PointModelKind {
    LinearRegression,
    Naive,  // prediction for (d, h) is the known price at (d-1, h)
};

PointModelKind parse_point_model_kind(const std::string& name);

struct PointModelConfig {
    PointModelKind model = PointModelKind::LinearRegression;
    ScalerKind scaler = ScalerKind::MeanStd;
    std::optional<VstParams> vst;  // applied to prices (features and target)
    FeatureSpec features;
    std::string label;  // output column label; defaulted from model + window
};

struct CalibrationSchedule {
    int window_days = 364;
    CivilDate first_prediction_day;
    CivilDate last_prediction_day;
    bool per_hour = true;  // one regression per hour; pooled otherwise
};

struct PointMetricsReport {
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    std::optional<double> mape;  // empty when any actual value is 0
    std::optional<double> r2;    // empty when the actuals are constant but errors are not
    int window_days = 0;
};

/// Least-squares fit via column-pivoted QR; X must have full column rank.
Eigen::VectorXd fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Rolling daily recalibration: for every prediction day d, fit on the
/// window_days days ending at d-1 (through the configured scaler + VST) and
/// predict all 24 hours of day d in original units. Never reads data from
/// day d or later.
PointForecastMatrix rolling_point_forecast(const MarketPanel& panel, const PointModelConfig& config,
                                           const CalibrationSchedule& schedule);

/// MAE / MSE / RMSE / MAPE per the 1/(24 N_d) normalization, out-of-sample R^2.
PointMetricsReport point_metrics(const HourlyTimeSeries& actual, const HourlyTimeSeries& predicted);

}  // namespace qra
