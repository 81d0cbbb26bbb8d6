#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qra/core.hpp"

namespace qra {

/// A labelled hourly observation before grid normalization: market-local
/// calendar labels, possibly with DST artifacts (one duplicated autumn hour,
/// one missing spring hour per year).
struct RawHourlyPoint {
    CivilDate day;
    int hour = 0;
    double value = 0.0;
};

/// Repair DST artifacts and produce a gap-free 24-rows/day series:
/// the duplicated fall-back hour becomes the arithmetic mean of its two
/// observations, the missing spring-forward hour is linearly interpolated
/// from its neighbours. Any other duplicate or gap raises GapError.
HourlyTimeSeries normalize_dst(std::vector<RawHourlyPoint> points, MarketTz tz, std::string units);

/// Identity pass for series already on the grid (kept for symmetry; a
/// constructed HourlyTimeSeries is gap-free by definition).
HourlyTimeSeries normalize_dst(const HourlyTimeSeries& series, MarketTz tz);

/// Day-ahead prices plus (optionally) the load forecast, inner-joined onto a
/// shared timestamp index.
class MarketPanel {
  public:
    explicit MarketPanel(HourlyTimeSeries price_da,
                         std::optional<HourlyTimeSeries> load_forecast = std::nullopt);

    const HourlyTimeSeries& price_da() const { return price_da_; }
    const std::optional<HourlyTimeSeries>& load_forecast() const { return load_forecast_; }

    /// Lookup by column name: "price_da" or "quantity".
    const HourlyTimeSeries& series(const std::string& name) const;

    std::size_t size() const { return price_da_.size(); }

  private:
    HourlyTimeSeries price_da_;
    std::optional<HourlyTimeSeries> load_forecast_;
};

/// CSV schema: a `datetime` column in ISO-8601 plus named value columns.
struct CsvSchema {
    std::string datetime_column = "datetime";
    std::string price_column = "price_da";    // required
    std::string load_column = "quantity";     // optional in the file
};

/// Load a panel from CSV. Rows may arrive shuffled (sorted on load). With a
/// DST market zone, local-labelled files with the standard DST artifacts are
/// repaired; duplicates or gaps elsewhere raise ParseError/GapError with the
/// offending row or timestamps.
MarketPanel load_csv(const std::string& path, const CsvSchema& schema = {},
                     MarketTz tz = MarketTz::Utc);

void save_panel_csv(const std::string& path, const MarketPanel& panel,
                    const CsvSchema& schema = {});

}  // namespace qra
