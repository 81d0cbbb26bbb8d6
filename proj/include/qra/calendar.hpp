#pragma once

#include <cstdint>
#include <compare>
#include <string>

namespace qra {

/// Calendar date (proleptic Gregorian).
struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const CivilDate&) const = default;
};

/// Days since 1970-01-01 (negative before the epoch).
std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t days);

/// 0 = Sunday ... 6 = Saturday.
int weekday_from_days(std::int64_t days);

CivilDate add_days(const CivilDate& d, std::int64_t n);

std::string format_date(const CivilDate& d);               // YYYY-MM-DD
CivilDate parse_date(const std::string& s);                // throws ParseError

/// Market time zones supported by the ingest layer. The library's canonical
/// timeline is the market-local hourly grid; the zone only matters when
/// converting true-UTC instants (ENTSO-E) or repairing DST artifacts.
enum class MarketTz {
    Utc,
    CentralEurope,  // CET/CEST, EU daylight saving rules
};

MarketTz parse_market_tz(const std::string& name);  // "UTC", "CET", "Europe/Berlin", ...
std::string to_string(MarketTz tz);

/// Standard (winter) offset from UTC in seconds.
int standard_offset_seconds(MarketTz tz);

/// Last Sunday of the given month.
CivilDate last_sunday(int year, int month);

/// True if (day, hour) is the local hour skipped at the spring-forward
/// transition (02:xx on the last Sunday of March for CentralEurope).
bool is_spring_gap_hour(MarketTz tz, const CivilDate& day, int hour);

/// True if (day, hour) is the local hour observed twice at the fall-back
/// transition (02:xx on the last Sunday of October for CentralEurope).
bool is_autumn_duplicate_hour(MarketTz tz, const CivilDate& day, int hour);

/// Market-local civil labels for a true-UTC instant.
struct LocalLabel {
    CivilDate day;
    int hour;  // 0..23
};
LocalLabel local_label_from_utc(std::int64_t utc_seconds, MarketTz tz);

/// True-UTC seconds of local midnight of `day` (start of the market day).
std::int64_t utc_from_local_midnight(const CivilDate& day, MarketTz tz);

}  // namespace qra
