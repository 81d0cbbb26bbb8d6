#include "qra/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "qra/csvio.hpp"

namespace qra {

HourlyTimeSeries normalize_dst(std::vector<RawHourlyPoint> points, MarketTz tz, std::string units) {
    if (points.empty()) throw ValidationError("normalize_dst: empty input");
    for (const RawHourlyPoint& p : points) {
        if (p.hour < 0 || p.hour > 23) throw ValidationError("normalize_dst: hour out of [0,23]");
        if (!std::isfinite(p.value)) throw ValidationError("normalize_dst: non-finite value");
    }
    std::stable_sort(points.begin(), points.end(), [](const RawHourlyPoint& a, const RawHourlyPoint& b) {
        const std::int64_t ka = days_from_civil(a.day) * 24 + a.hour;
        const std::int64_t kb = days_from_civil(b.day) * 24 + b.hour;
        return ka < kb;
    });

    // Collapse duplicates: the fall-back hour is averaged, anything else is a
    // hard error.
    std::vector<RawHourlyPoint> dedup;
    std::size_t i = 0;
    while (i < points.size()) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < points.size() && points[j].day == points[i].day && points[j].hour == points[i].hour) {
            sum += points[j].value;
            ++j;
        }
        if (j - i > 1) {
            if (j - i > 2 || !is_autumn_duplicate_hour(tz, points[i].day, points[i].hour)) {
                throw GapError("normalize_dst: unexpected duplicate at " + format_date(points[i].day) +
                               " hour " + std::to_string(points[i].hour));
            }
        }
        dedup.push_back({points[i].day, points[i].hour, sum / static_cast<double>(j - i)});
        i = j;
    }

    // Fill gaps: only the spring-forward hour may be missing.
    std::vector<Timestamp> stamps;
    std::vector<double> values;
    std::vector<std::string> other_gaps;
    for (std::size_t idx = 0; idx < dedup.size(); ++idx) {
        const RawHourlyPoint& p = dedup[idx];
        const Timestamp ts = Timestamp::from_labels(p.day, p.hour);
        if (!stamps.empty()) {
            std::int64_t expected = stamps.back().epoch_seconds + 3600;
            while (expected < ts.epoch_seconds) {
                const Timestamp missing{expected, civil_from_days(expected / 86400),
                                        static_cast<int>((expected % 86400) / 3600)};
                if (is_spring_gap_hour(tz, missing.market_day, missing.market_hour)) {
                    stamps.push_back(Timestamp::from_labels(missing.market_day, missing.market_hour));
                    values.push_back(0.5 * (values.back() + p.value));
                } else {
                    other_gaps.push_back(format_timestamp(missing));
                }
                expected += 3600;
            }
        }
        stamps.push_back(ts);
        values.push_back(p.value);
    }
    if (!other_gaps.empty()) {
        std::string msg = "normalize_dst: non-DST gaps remain:";
        for (std::size_t g = 0; g < other_gaps.size() && g < 8; ++g) msg += " " + other_gaps[g];
        if (other_gaps.size() > 8) msg += " (+" + std::to_string(other_gaps.size() - 8) + " more)";
        throw GapError(msg);
    }
    return HourlyTimeSeries(std::move(stamps), std::move(values), std::move(units));
}

HourlyTimeSeries normalize_dst(const HourlyTimeSeries& series, MarketTz) { return series; }

MarketPanel::MarketPanel(HourlyTimeSeries price_da, std::optional<HourlyTimeSeries> load_forecast)
    : price_da_(std::move(price_da)), load_forecast_(std::move(load_forecast)) {
    if (!load_forecast_) return;
    // Inner join onto the shared index.
    const std::int64_t lo =
        std::max(price_da_.stamp(0).epoch_seconds, load_forecast_->stamp(0).epoch_seconds);
    const std::int64_t hi = std::min(price_da_.stamps().back().epoch_seconds,
                                     load_forecast_->stamps().back().epoch_seconds);
    if (lo > hi) throw AlignmentError("MarketPanel: price and load spans do not overlap");
    auto cut = [&](const HourlyTimeSeries& s) {
        const std::size_t a = s.index_of(lo);
        const std::size_t b = s.index_of(hi);
        return HourlyTimeSeries(
            std::vector<Timestamp>(s.stamps().begin() + a, s.stamps().begin() + b + 1),
            std::vector<double>(s.values().begin() + a, s.values().begin() + b + 1), s.units());
    };
    price_da_ = cut(price_da_);
    load_forecast_ = cut(*load_forecast_);
}

const HourlyTimeSeries& MarketPanel::series(const std::string& name) const {
    if (name == "price_da" || name == "price") return price_da_;
    if (name == "quantity" || name == "load" || name == "load_forecast") {
        if (!load_forecast_) throw ValidationError("MarketPanel: no load forecast column");
        return *load_forecast_;
    }
    throw ValidationError("MarketPanel: unknown column '" + name + "'");
}

MarketPanel load_csv(const std::string& path, const CsvSchema& schema, MarketTz tz) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("load_csv: empty file '" + path + "'");
    const std::vector<std::string> header = csv::split_line(line);

    const auto col_of = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const std::ptrdiff_t dt_col = col_of(schema.datetime_column);
    const std::ptrdiff_t price_col = col_of(schema.price_column);
    const std::ptrdiff_t load_col = col_of(schema.load_column);
    if (dt_col < 0 || price_col < 0) {
        throw ParseError("load_csv: header must contain '" + schema.datetime_column + "' and '" +
                         schema.price_column + "'");
    }

    std::vector<RawHourlyPoint> price_points;
    std::vector<RawHourlyPoint> load_points;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = csv::split_line(line);
        if (fields.size() != header.size()) {
            throw ParseError("load_csv: row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        Timestamp ts;
        try {
            ts = parse_timestamp(fields[static_cast<std::size_t>(dt_col)]);
        } catch (const ParseError& e) {
            throw ParseError("load_csv: row " + std::to_string(row) + ": " + e.what());
        }
        const auto number = [&](std::ptrdiff_t col) {
            const std::string& f = fields[static_cast<std::size_t>(col)];
            try {
                return csv::parse_double(f);
            } catch (const ParseError&) {
                throw ParseError("load_csv: row " + std::to_string(row) + ": bad number '" + f + "'");
            }
        };
        price_points.push_back({ts.market_day, ts.market_hour, number(price_col)});
        if (load_col >= 0) load_points.push_back({ts.market_day, ts.market_hour, number(load_col)});
    }
    if (price_points.empty()) throw ParseError("load_csv: no data rows in '" + path + "'");

    HourlyTimeSeries price = normalize_dst(std::move(price_points), tz, "EUR/MWh");
    std::optional<HourlyTimeSeries> load;
    if (!load_points.empty()) load = normalize_dst(std::move(load_points), tz, "MWh");
    return MarketPanel(std::move(price), std::move(load));
}

void save_panel_csv(const std::string& path, const MarketPanel& panel, const CsvSchema& schema) {
    std::ofstream out(path);
    if (!out) throw ParseError("save_panel_csv: cannot open '" + path + "' for writing");
    out << schema.datetime_column << "," << schema.price_column;
    if (panel.load_forecast()) out << "," << schema.load_column;
    out << "\n";
    for (std::size_t i = 0; i < panel.size(); ++i) {
        out << format_timestamp(panel.price_da().stamp(i)) << ","
            << csv::format_double(panel.price_da().value(i));
        if (panel.load_forecast()) out << "," << csv::format_double(panel.load_forecast()->value(i));
        out << "\n";
    }
}

}  // namespace qra
