#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qra/calendar.hpp"
#include "qra/errors.hpp"

namespace qra {

/// One slot of the canonical hourly grid. `epoch_seconds` is the grid instant:
/// the market-local labels rendered as seconds since 1970-01-01T00:00. For
/// UTC-labelled data it is plain UTC; for DST markets it is market standard
/// time (the grid has exactly 24 slots per market day, which true UTC cannot
/// provide across DST transitions).
struct Timestamp {
    std::int64_t epoch_seconds = 0;
    CivilDate market_day;
    int market_hour = 0;  // 0..23

    static Timestamp from_labels(const CivilDate& day, int hour);

    auto operator<=>(const Timestamp& other) const { return epoch_seconds <=> other.epoch_seconds; }
    bool operator==(const Timestamp& other) const { return epoch_seconds == other.epoch_seconds; }
};

std::string format_timestamp(const Timestamp& ts);          // ISO-8601, e.g. 2015-01-05T13:00:00Z
Timestamp parse_timestamp(const std::string& s);            // accepts "YYYY-MM-DD HH:MM[:SS]" and "...T...Z"

/// Contiguous hourly grid of stamps: `count` hours starting at `first`.
std::vector<Timestamp> hourly_span(const Timestamp& first, std::size_t count);

/// Gap-free, strictly increasing hourly series carrying one value per grid
/// slot. Values must be finite.
class HourlyTimeSeries {
  public:
    HourlyTimeSeries(std::vector<Timestamp> stamps, std::vector<double> values, std::string units);

    std::size_t size() const { return values_.size(); }
    const std::vector<Timestamp>& stamps() const { return stamps_; }
    const std::vector<double>& values() const { return values_; }
    const std::string& units() const { return units_; }

    const Timestamp& stamp(std::size_t i) const { return stamps_[i]; }
    double value(std::size_t i) const { return values_[i]; }

    /// Index of the stamp with the given epoch, or npos.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t index_of(std::int64_t epoch_seconds) const;

    /// Sub-series covering market days [first_day, last_day], all 24 hours.
    HourlyTimeSeries slice_days(const CivilDate& first_day, const CivilDate& last_day) const;

    /// True when the series starts at hour 0, ends at hour 23 (whole days).
    bool covers_whole_days() const;

    HourlyTimeSeries with_values(std::vector<double> values) const;

  private:
    std::vector<Timestamp> stamps_;
    std::vector<double> values_;
    std::string units_;
};

/// Quantile level k in the open interval (0, 1).
struct QuantileLevel {
    double k;
    explicit QuantileLevel(double level);
};

/// Strictly increasing grid of quantile levels.
class QuantileGrid {
  public:
    explicit QuantileGrid(std::vector<double> levels);

    /// The 99 percentiles 0.01, 0.02, ..., 0.99.
    static QuantileGrid percentiles();

    std::size_t size() const { return levels_.size(); }
    const std::vector<double>& levels() const { return levels_; }
    double level(std::size_t i) const { return levels_[i]; }

    /// Index of a level, matched within 1e-9; npos when absent.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t index_of(double level) const;

  private:
    std::vector<double> levels_;
};

/// Matrix X of point predictions: one row per grid slot, one column per
/// forecaster.
class PointForecastMatrix {
  public:
    PointForecastMatrix(std::vector<Timestamp> stamps, std::vector<std::string> forecaster_names,
                        Eigen::MatrixXd values);

    std::size_t rows() const { return stamps_.size(); }
    std::size_t cols() const { return forecaster_names_.size(); }
    const std::vector<Timestamp>& stamps() const { return stamps_; }
    const std::vector<std::string>& forecaster_names() const { return forecaster_names_; }
    const Eigen::MatrixXd& values() const { return values_; }

  private:
    std::vector<Timestamp> stamps_;
    std::vector<std::string> forecaster_names_;
    Eigen::MatrixXd values_;
};

/// Predicted quantiles: one row per grid slot, one column per grid level.
class QuantileForecastSurface {
  public:
    QuantileForecastSurface(std::vector<Timestamp> stamps, QuantileGrid grid, Eigen::MatrixXd values);

    std::size_t rows() const { return stamps_.size(); }
    const std::vector<Timestamp>& stamps() const { return stamps_; }
    const QuantileGrid& grid() const { return grid_; }
    const Eigen::MatrixXd& values() const { return values_; }

    bool rows_monotone() const;

  private:
    std::vector<Timestamp> stamps_;
    QuantileGrid grid_;
    Eigen::MatrixXd values_;
};

/// Check (pinball) loss rho_k(u) = u * (k - 1{u < 0}).
double pinball_loss(double k, double residual);

/// Monotone rearrangement of each row: sorts the predicted quantiles in
/// ascending order, preserving each row's multiset of values. Idempotent.
QuantileForecastSurface repair_crossing(const QuantileForecastSurface& surface);

namespace detail {
void require_finite(const std::vector<double>& values, const char* what);
void require_finite(const Eigen::MatrixXd& values, const char* what);
void require_hourly_grid(const std::vector<Timestamp>& stamps, const char* what);
void require_increasing(const std::vector<Timestamp>& stamps, const char* what);
}  // namespace detail

}  // namespace qra
