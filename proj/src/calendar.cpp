#include "qra/calendar.hpp"

#include <cstdio>
#include <cstring>

#include "qra/errors.hpp"

namespace qra {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(const CivilDate& d) {
    std::int64_t y = d.year;
    const int m = d.month;
    const int dd = d.day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(dd) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int weekday_from_days(std::int64_t z) {
    return static_cast<int>(z >= -4 ? (z + 4) % 7 : (z + 5) % 7 + 6);
}

CivilDate add_days(const CivilDate& d, std::int64_t n) {
    return civil_from_days(days_from_civil(d) + n);
}

std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

CivilDate parse_date(const std::string& s) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31) {
        throw ParseError("invalid date: '" + s + "' (expected YYYY-MM-DD)");
    }
    return CivilDate{y, m, d};
}

MarketTz parse_market_tz(const std::string& name) {
    if (name == "UTC" || name == "utc") return MarketTz::Utc;
    if (name == "CET" || name == "CEST" || name == "Europe/Berlin" || name == "Europe/Warsaw" ||
        name == "Europe/Paris" || name == "CentralEurope") {
        return MarketTz::CentralEurope;
    }
    throw ParseError("unknown market time zone: '" + name + "'");
}

std::string to_string(MarketTz tz) {
    return tz == MarketTz::Utc ? "UTC" : "CentralEurope";
}

int standard_offset_seconds(MarketTz tz) {
    return tz == MarketTz::Utc ? 0 : 3600;
}

CivilDate last_sunday(int year, int month) {
    static const int month_len[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int len = month_len[month - 1];
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) len = 29;
    CivilDate last{year, month, len};
    const int wd = weekday_from_days(days_from_civil(last));  // 0 = Sunday
    return add_days(last, -wd);
}

bool is_spring_gap_hour(MarketTz tz, const CivilDate& day, int hour) {
    if (tz != MarketTz::CentralEurope) return false;
    return hour == 2 && day == last_sunday(day.year, 3);
}

bool is_autumn_duplicate_hour(MarketTz tz, const CivilDate& day, int hour) {
    if (tz != MarketTz::CentralEurope) return false;
    return hour == 2 && day == last_sunday(day.year, 10);
}

namespace {

// EU DST: +2h between 01:00 UTC on the last Sunday of March and
// 01:00 UTC on the last Sunday of October; +1h otherwise.
int utc_offset_seconds(std::int64_t utc_seconds, MarketTz tz) {
    if (tz == MarketTz::Utc) return 0;
    const CivilDate d = civil_from_days(utc_seconds >= 0 ? utc_seconds / 86400
                                                         : (utc_seconds - 86399) / 86400);
    const std::int64_t dst_on = days_from_civil(last_sunday(d.year, 3)) * 86400 + 3600;
    const std::int64_t dst_off = days_from_civil(last_sunday(d.year, 10)) * 86400 + 3600;
    return (utc_seconds >= dst_on && utc_seconds < dst_off) ? 7200 : 3600;
}

}  // namespace

LocalLabel local_label_from_utc(std::int64_t utc_seconds, MarketTz tz) {
    const std::int64_t local = utc_seconds + utc_offset_seconds(utc_seconds, tz);
    std::int64_t days = local >= 0 ? local / 86400 : (local - 86399) / 86400;
    const int secs = static_cast<int>(local - days * 86400);
    return LocalLabel{civil_from_days(days), secs / 3600};
}

std::int64_t utc_from_local_midnight(const CivilDate& day, MarketTz tz) {
    if (tz == MarketTz::Utc) return days_from_civil(day) * 86400;
    // Local midnight is never inside a DST transition (EU shifts at 02:00/03:00
    // local), so the offset at midnight equals the offset of the instant itself.
    const std::int64_t guess = days_from_civil(day) * 86400 - standard_offset_seconds(tz);
    const int off = utc_offset_seconds(guess, tz);
    return days_from_civil(day) * 86400 - off;
}

}  // namespace qra
