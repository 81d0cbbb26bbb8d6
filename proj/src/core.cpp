#include "qra/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qra {

namespace detail {

void require_finite(const std::vector<double>& values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError(std::string(what) + ": non-finite value");
    }
}

void require_finite(const Eigen::MatrixXd& values, const char* what) {
    if (!values.allFinite()) throw ValidationError(std::string(what) + ": non-finite value");
}

void require_hourly_grid(const std::vector<Timestamp>& stamps, const char* what) {
    for (std::size_t i = 0; i < stamps.size(); ++i) {
        const Timestamp& ts = stamps[i];
        if (ts.market_hour < 0 || ts.market_hour > 23) {
            throw ValidationError(std::string(what) + ": market_hour out of [0,23]");
        }
        if (i > 0 && stamps[i].epoch_seconds - stamps[i - 1].epoch_seconds != 3600) {
            throw GapError(std::string(what) + ": grid not gap-free at " + format_timestamp(ts));
        }
    }
}

void require_increasing(const std::vector<Timestamp>& stamps, const char* what) {
    for (std::size_t i = 0; i < stamps.size(); ++i) {
        const Timestamp& ts = stamps[i];
        if (ts.market_hour < 0 || ts.market_hour > 23) {
            throw ValidationError(std::string(what) + ": market_hour out of [0,23]");
        }
        if (i > 0 && stamps[i].epoch_seconds <= stamps[i - 1].epoch_seconds) {
            throw ValidationError(std::string(what) + ": timestamps not strictly increasing at " +
                                  format_timestamp(ts));
        }
    }
}

}  // namespace detail

Timestamp Timestamp::from_labels(const CivilDate& day, int hour) {
    if (hour < 0 || hour > 23) throw ValidationError("market_hour out of [0,23]");
    return Timestamp{days_from_civil(day) * 86400 + static_cast<std::int64_t>(hour) * 3600, day, hour};
}

std::string format_timestamp(const Timestamp& ts) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00Z", ts.market_day.year,
                  ts.market_day.month, ts.market_day.day, ts.market_hour);
    return buf;
}

Timestamp parse_timestamp(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    const int got = std::sscanf(s.c_str(), "%d-%d-%d%*[T ]%d:%d:%d", &y, &mo, &d, &h, &mi, &sec);
    if (got < 5 || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi != 0 || sec != 0) {
        throw ParseError("invalid hourly timestamp: '" + s + "'");
    }
    return Timestamp::from_labels(CivilDate{y, mo, d}, h);
}

std::vector<Timestamp> hourly_span(const Timestamp& first, std::size_t count) {
    std::vector<Timestamp> out;
    out.reserve(count);
    std::int64_t days = days_from_civil(first.market_day);
    int hour = first.market_hour;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(Timestamp{days * 86400 + static_cast<std::int64_t>(hour) * 3600,
                                civil_from_days(days), hour});
        if (++hour == 24) {
            hour = 0;
            ++days;
        }
    }
    return out;
}

HourlyTimeSeries::HourlyTimeSeries(std::vector<Timestamp> stamps, std::vector<double> values,
                                   std::string units)
    : stamps_(std::move(stamps)), values_(std::move(values)), units_(std::move(units)) {
    if (stamps_.size() != values_.size()) {
        throw ValidationError("HourlyTimeSeries: stamps/values size mismatch");
    }
    if (stamps_.empty()) throw ValidationError("HourlyTimeSeries: empty series");
    detail::require_finite(values_, "HourlyTimeSeries");
    detail::require_hourly_grid(stamps_, "HourlyTimeSeries");
}

std::size_t HourlyTimeSeries::index_of(std::int64_t epoch_seconds) const {
    const std::int64_t first = stamps_.front().epoch_seconds;
    if (epoch_seconds < first) return npos;
    const std::int64_t off = (epoch_seconds - first) / 3600;
    if ((epoch_seconds - first) % 3600 != 0) return npos;
    if (off >= static_cast<std::int64_t>(stamps_.size())) return npos;
    return static_cast<std::size_t>(off);
}

HourlyTimeSeries HourlyTimeSeries::slice_days(const CivilDate& first_day,
                                              const CivilDate& last_day) const {
    const std::size_t lo = index_of(Timestamp::from_labels(first_day, 0).epoch_seconds);
    const std::size_t hi = index_of(Timestamp::from_labels(last_day, 23).epoch_seconds);
    if (lo == npos || hi == npos || hi < lo) {
        throw CoverageError("slice_days: series does not cover [" + format_date(first_day) + ", " +
                            format_date(last_day) + "]");
    }
    return HourlyTimeSeries(
        std::vector<Timestamp>(stamps_.begin() + lo, stamps_.begin() + hi + 1),
        std::vector<double>(values_.begin() + lo, values_.begin() + hi + 1), units_);
}

bool HourlyTimeSeries::covers_whole_days() const {
    return stamps_.front().market_hour == 0 && stamps_.back().market_hour == 23;
}

HourlyTimeSeries HourlyTimeSeries::with_values(std::vector<double> values) const {
    return HourlyTimeSeries(stamps_, std::move(values), units_);
}

QuantileLevel::QuantileLevel(double level) : k(level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ValidationError("quantile level must lie in (0, 1)");
    }
}

QuantileGrid::QuantileGrid(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw ValidationError("QuantileGrid: empty grid");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        QuantileLevel check(levels_[i]);
        if (i > 0 && !(levels_[i] > levels_[i - 1])) {
            throw ValidationError("QuantileGrid: levels must be strictly increasing");
        }
    }
}

QuantileGrid QuantileGrid::percentiles() {
    std::vector<double> levels(99);
    for (int i = 1; i <= 99; ++i) levels[i - 1] = i / 100.0;
    return QuantileGrid(std::move(levels));
}

std::size_t QuantileGrid::index_of(double level) const {
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (std::abs(levels_[i] - level) <= 1e-9) return i;
    }
    return npos;
}

PointForecastMatrix::PointForecastMatrix(std::vector<Timestamp> stamps,
                                         std::vector<std::string> forecaster_names,
                                         Eigen::MatrixXd values)
    : stamps_(std::move(stamps)), forecaster_names_(std::move(forecaster_names)),
      values_(std::move(values)) {
    if (stamps_.empty() || forecaster_names_.empty()) {
        throw ValidationError("PointForecastMatrix: needs at least one row and one column");
    }
    if (values_.rows() != static_cast<Eigen::Index>(stamps_.size()) ||
        values_.cols() != static_cast<Eigen::Index>(forecaster_names_.size())) {
        throw DimensionMismatchError("PointForecastMatrix: shape mismatch");
    }
    detail::require_finite(values_, "PointForecastMatrix");
    detail::require_increasing(stamps_, "PointForecastMatrix");
}

QuantileForecastSurface::QuantileForecastSurface(std::vector<Timestamp> stamps, QuantileGrid grid,
                                                 Eigen::MatrixXd values)
    : stamps_(std::move(stamps)), grid_(std::move(grid)), values_(std::move(values)) {
    if (stamps_.empty()) throw ValidationError("QuantileForecastSurface: empty");
    if (values_.rows() != static_cast<Eigen::Index>(stamps_.size()) ||
        values_.cols() != static_cast<Eigen::Index>(grid_.size())) {
        throw DimensionMismatchError("QuantileForecastSurface: shape mismatch");
    }
    detail::require_finite(values_, "QuantileForecastSurface");
    detail::require_increasing(stamps_, "QuantileForecastSurface");
}

bool QuantileForecastSurface::rows_monotone() const {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        for (Eigen::Index j = 1; j < values_.cols(); ++j) {
            if (values_(i, j) < values_(i, j - 1)) return false;
        }
    }
    return true;
}

double pinball_loss(double k, double residual) {
    QuantileLevel check(k);
    return residual >= 0.0 ? k * residual : (k - 1.0) * residual;
}

QuantileForecastSurface repair_crossing(const QuantileForecastSurface& surface) {
    Eigen::MatrixXd sorted = surface.values();
    for (Eigen::Index i = 0; i < sorted.rows(); ++i) {
        auto row = sorted.row(i);
        std::sort(row.begin(), row.end());
    }
    return QuantileForecastSurface(surface.stamps(), surface.grid(), std::move(sorted));
}

}  // namespace qra
