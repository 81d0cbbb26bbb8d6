#include "qra/pointmodel.hpp"

#include <algorithm>
#include <cmath>

namespace qra {

PointModelKind parse_point_model_kind(const std::string& name) {
    if (name == "lr" || name == "ols" || name == "linear") return PointModelKind::LinearRegression;
    if (name == "naive") return PointModelKind::Naive;
    throw ParseError("unknown point model: '" + name + "'");
}

Eigen::VectorXd fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw DimensionMismatchError("fit_ols: X rows != y length");
    if (X.rows() < X.cols()) throw ValidationError("fit_ols: fewer rows than columns");
    if (!X.allFinite() || !y.allFinite()) throw ValidationError("fit_ols: non-finite entries");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        throw RankDeficientError("fit_ols: design matrix is rank deficient");
    }
    return qr.solve(y);
}

namespace {

// Scaler that degrades to a pure shift on constant windows instead of
// throwing; a constant calibration window is legitimate input here.
ScalerState fit_scaler_or_shift(std::span<const double> data, ScalerKind kind) {
    try {
        return fit_scaler(data, kind);
    } catch (const ScaleError&) {
        ScalerState s;
        s.kind = kind;
        s.center = data.empty() ? 0.0 : data[0];
        s.spread = 1.0;
        return s;
    }
}

struct DayHour {
    std::int64_t day_index;  // days since epoch of the market day
    int hour;
};

}  // namespace

PointForecastMatrix rolling_point_forecast(const MarketPanel& panel, const PointModelConfig& config,
                                           const CalibrationSchedule& schedule) {
    const FeatureSpec& spec = config.features;
    if (spec.lags.empty()) throw ValidationError("FeatureSpec: lags must be non-empty");
    for (int lag : spec.lags) {
        if (lag < 1) throw ValidationError("FeatureSpec: lags must be >= 1");
    }
    const int max_lag = *std::max_element(spec.lags.begin(), spec.lags.end());
    if (schedule.window_days < max_lag + 1) {
        throw ValidationError("CalibrationSchedule: window_days must be >= max lag + 1");
    }
    if (schedule.last_prediction_day < schedule.first_prediction_day) {
        throw ValidationError("CalibrationSchedule: empty prediction span");
    }

    const HourlyTimeSeries& price = panel.price_da();
    if (!price.covers_whole_days()) {
        throw CoverageError("rolling_point_forecast: panel must cover whole days");
    }

    // History needed: window + lags before the first prediction day; exogenous
    // columns additionally through the prediction span itself.
    const CivilDate earliest_needed =
        add_days(schedule.first_prediction_day, -(schedule.window_days + max_lag));
    if (price.index_of(Timestamp::from_labels(earliest_needed, 0).epoch_seconds) ==
        HourlyTimeSeries::npos) {
        throw CoverageError("rolling_point_forecast: insufficient history (needs prices from " +
                            format_date(earliest_needed) + ")");
    }
    const CivilDate last_fit_day = add_days(schedule.last_prediction_day, -1);
    if (price.index_of(Timestamp::from_labels(last_fit_day, 23).epoch_seconds) ==
        HourlyTimeSeries::npos) {
        throw CoverageError("rolling_point_forecast: prices must reach " + format_date(last_fit_day));
    }
    std::vector<const HourlyTimeSeries*> exog;
    for (const std::string& name : spec.exogenous) {
        exog.push_back(&panel.series(name));
        if (exog.back()->index_of(
                Timestamp::from_labels(schedule.last_prediction_day, 23).epoch_seconds) ==
                HourlyTimeSeries::npos ||
            exog.back()->index_of(Timestamp::from_labels(earliest_needed, 0).epoch_seconds) ==
                HourlyTimeSeries::npos) {
            throw CoverageError("rolling_point_forecast: exogenous '" + name +
                                "' does not cover the required span");
        }
    }

    const std::int64_t first_day_idx = days_from_civil(schedule.first_prediction_day);
    const std::int64_t last_day_idx = days_from_civil(schedule.last_prediction_day);
    const std::size_t n_days = static_cast<std::size_t>(last_day_idx - first_day_idx + 1);
    const auto price_at = [&](std::int64_t day_idx, int hour) {
        const std::size_t i = price.index_of(day_idx * 86400 + hour * 3600);
        if (i == HourlyTimeSeries::npos) {
            throw CoverageError("rolling_point_forecast: missing price at day index " +
                                std::to_string(day_idx));
        }
        return price.value(i);
    };

    Eigen::MatrixXd out(n_days * 24, 1);

    for (std::size_t di = 0; di < n_days; ++di) {
        const std::int64_t day = first_day_idx + static_cast<std::int64_t>(di);

        if (config.model == PointModelKind::Naive) {
            for (int h = 0; h < 24; ++h) out(di * 24 + h, 0) = price_at(day - 1, h);
            continue;
        }

        // Calibration window [day - window, day - 1].
        const std::int64_t w_lo = day - schedule.window_days;
        std::vector<double> window_prices;
        window_prices.reserve(static_cast<std::size_t>(schedule.window_days) * 24);
        for (std::int64_t d = w_lo; d < day; ++d) {
            for (int h = 0; h < 24; ++h) window_prices.push_back(price_at(d, h));
        }
        const ScalerState price_scaler = fit_scaler_or_shift(window_prices, config.scaler);
        Vst vst;
        bool use_vst = config.vst.has_value();
        if (use_vst) {
            vst = Vst::fit(*config.vst, apply_scaler(price_scaler, window_prices));
        }
        const auto tprice = [&](std::int64_t d, int h) {
            const double p = apply_scaler(price_scaler, price_at(d, h));
            return use_vst ? vst.transform(p) : p;
        };

        std::vector<ScalerState> exog_scalers;
        for (const HourlyTimeSeries* series : exog) {
            std::vector<double> window_vals;
            for (std::int64_t d = w_lo; d < day; ++d) {
                for (int h = 0; h < 24; ++h) {
                    window_vals.push_back(
                        series->value(series->index_of(d * 86400 + h * 3600)));
                }
            }
            exog_scalers.push_back(fit_scaler_or_shift(window_vals, ScalerKind::MeanStd));
        }
        const auto texog = [&](std::size_t e, std::int64_t d, int h) {
            return apply_scaler(exog_scalers[e], exog[e]->value(exog[e]->index_of(d * 86400 + h * 3600)));
        };

        const std::size_t n_feat = spec.lags.size() + exog.size();
        const auto feature_row = [&](std::int64_t d, int h, Eigen::VectorXd& row) {
            std::size_t c = 0;
            for (int lag : spec.lags) row[c++] = tprice(d - lag, h);
            for (std::size_t e = 0; e < exog.size(); ++e) row[c++] = texog(e, d, h);
        };

        const auto fit_predict = [&](const std::vector<DayHour>& train, std::int64_t d, int h) {
            Eigen::MatrixXd feats(train.size(), n_feat);
            Eigen::VectorXd target(train.size());
            Eigen::VectorXd row(n_feat);
            for (std::size_t r = 0; r < train.size(); ++r) {
                feature_row(train[r].day_index, train[r].hour, row);
                feats.row(static_cast<Eigen::Index>(r)) = row;
                target[static_cast<Eigen::Index>(r)] = tprice(train[r].day_index, train[r].hour);
            }
            // Constant (zero-variance) feature columns carry no signal and
            // break the rank requirement once an intercept is present; drop
            // them and let the intercept absorb the level.
            std::vector<Eigen::Index> keep;
            for (Eigen::Index c = 0; c < feats.cols(); ++c) {
                const double lo = feats.col(c).minCoeff();
                const double hi = feats.col(c).maxCoeff();
                if (!spec.include_intercept || hi - lo > 1e-12 * (1.0 + std::abs(hi))) {
                    keep.push_back(c);
                }
            }
            Eigen::MatrixXd design(feats.rows(),
                                   static_cast<Eigen::Index>(keep.size()) +
                                       (spec.include_intercept ? 1 : 0));
            Eigen::Index col = 0;
            if (spec.include_intercept) design.col(col++).setOnes();
            for (Eigen::Index c : keep) design.col(col++) = feats.col(c);

            const Eigen::VectorXd beta = fit_ols(design, target);

            feature_row(d, h, row);
            double pred = spec.include_intercept ? beta[0] : 0.0;
            Eigen::Index b = spec.include_intercept ? 1 : 0;
            for (std::size_t kc = 0; kc < keep.size(); ++kc) {
                pred += beta[b + static_cast<Eigen::Index>(kc)] * row[keep[kc]];
            }
            return pred;
        };

        for (int h = 0; h < 24; ++h) {
            std::vector<DayHour> train;
            if (schedule.per_hour) {
                for (std::int64_t d = w_lo; d < day; ++d) train.push_back({d, h});
            } else {
                for (std::int64_t d = w_lo; d < day; ++d) {
                    for (int hh = 0; hh < 24; ++hh) train.push_back({d, hh});
                }
            }
            const double pred_t = fit_predict(train, day, h);
            const double pred_scaled = use_vst ? vst.inverse(pred_t) : pred_t;
            out(di * 24 + h, 0) = invert_scaler(price_scaler, pred_scaled);
            if (!schedule.per_hour && h == 0) {
                // Pooled mode fits one model per day; reuse it for all hours.
                for (int hh = 1; hh < 24; ++hh) {
                    const double p = fit_predict(train, day, hh);
                    out(di * 24 + hh, 0) =
                        invert_scaler(price_scaler, use_vst ? vst.inverse(p) : p);
                }
                break;
            }
        }
    }

    std::string label = config.label;
    if (label.empty()) {
        label = (config.model == PointModelKind::Naive ? "naive" : "lr") + std::string("_w") +
                std::to_string(schedule.window_days);
    }
    return PointForecastMatrix(
        hourly_span(Timestamp::from_labels(schedule.first_prediction_day, 0), n_days * 24),
        {label}, std::move(out));
}

PointMetricsReport point_metrics(const HourlyTimeSeries& actual, const HourlyTimeSeries& predicted) {
    if (actual.size() != predicted.size()) {
        throw AlignmentError("point_metrics: series differ in length");
    }
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual.stamp(i) != predicted.stamp(i)) {
            throw AlignmentError("point_metrics: misaligned at " + format_timestamp(actual.stamp(i)));
        }
    }
    if (actual.size() % 24 != 0 || !actual.covers_whole_days()) {
        throw AlignmentError("point_metrics: full days only");
    }

    const double n = static_cast<double>(actual.size());
    double abs_sum = 0.0, sq_sum = 0.0, ape_sum = 0.0;
    bool mape_defined = true;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double err = actual.value(i) - predicted.value(i);
        abs_sum += std::abs(err);
        sq_sum += err * err;
        if (actual.value(i) == 0.0) {
            mape_defined = false;
        } else {
            ape_sum += std::abs(err) / std::abs(actual.value(i));
        }
    }
    PointMetricsReport report;
    report.mae = abs_sum / n;
    report.mse = sq_sum / n;
    report.rmse = std::sqrt(report.mse);
    if (mape_defined) report.mape = ape_sum / n;

    double mean = 0.0;
    for (double v : actual.values()) mean += v;
    mean /= n;
    double sst = 0.0;
    for (double v : actual.values()) sst += (v - mean) * (v - mean);
    if (sst > 0.0) {
        report.r2 = 1.0 - sq_sum / sst;
    } else if (sq_sum == 0.0) {
        report.r2 = 1.0;
    }
    return report;
}

}  // namespace qra
