#include <doctest.h>

#include "qra/calendar.hpp"
#include "qra/errors.hpp"

using namespace qra;

TEST_CASE("civil date arithmetic") {
    CHECK(days_from_civil({1970, 1, 1}) == 0);
    CHECK(days_from_civil({2015, 1, 5}) == 16440);
    CHECK(civil_from_days(16440) == CivilDate{2015, 1, 5});
    CHECK(add_days({2015, 12, 31}, 1) == CivilDate{2016, 1, 1});
    CHECK(add_days({2016, 3, 1}, -1) == CivilDate{2016, 2, 29});  // leap year
    CHECK(weekday_from_days(days_from_civil({2015, 1, 4})) == 0);  // a Sunday
    CHECK(format_date({2015, 1, 5}) == "2015-01-05");
    CHECK(parse_date("2015-01-05") == CivilDate{2015, 1, 5});
    CHECK_THROWS_AS(parse_date("2015-13-05"), ParseError);
}

TEST_CASE("EU DST transition dates") {
    CHECK(last_sunday(2015, 3) == CivilDate{2015, 3, 29});
    CHECK(last_sunday(2015, 10) == CivilDate{2015, 10, 25});
    CHECK(last_sunday(2016, 3) == CivilDate{2016, 3, 27});
    CHECK(last_sunday(2016, 10) == CivilDate{2016, 10, 30});
    CHECK(is_spring_gap_hour(MarketTz::CentralEurope, {2015, 3, 29}, 2));
    CHECK_FALSE(is_spring_gap_hour(MarketTz::CentralEurope, {2015, 3, 29}, 3));
    CHECK_FALSE(is_spring_gap_hour(MarketTz::Utc, {2015, 3, 29}, 2));
    CHECK(is_autumn_duplicate_hour(MarketTz::CentralEurope, {2015, 10, 25}, 2));
}

TEST_CASE("utc to market-local labels") {
    // Winter: CET = UTC+1.
    const std::int64_t utc = days_from_civil({2015, 1, 4}) * 86400 + 23 * 3600;
    const LocalLabel winter = local_label_from_utc(utc, MarketTz::CentralEurope);
    CHECK(winter.day == CivilDate{2015, 1, 5});
    CHECK(winter.hour == 0);
    // Summer: CEST = UTC+2.
    const std::int64_t july = days_from_civil({2015, 7, 1}) * 86400 + 10 * 3600;
    const LocalLabel summer = local_label_from_utc(july, MarketTz::CentralEurope);
    CHECK(summer.day == CivilDate{2015, 7, 1});
    CHECK(summer.hour == 12);
    // UTC zone is the identity.
    const LocalLabel z = local_label_from_utc(july, MarketTz::Utc);
    CHECK(z.hour == 10);

    CHECK(utc_from_local_midnight({2015, 1, 5}, MarketTz::CentralEurope) == utc);
    CHECK(utc_from_local_midnight({2015, 7, 1}, MarketTz::CentralEurope) ==
          days_from_civil({2015, 7, 1}) * 86400 - 7200);
    CHECK(utc_from_local_midnight({2015, 7, 1}, MarketTz::Utc) ==
          days_from_civil({2015, 7, 1}) * 86400);
}

TEST_CASE("market tz parsing") {
    CHECK(parse_market_tz("UTC") == MarketTz::Utc);
    CHECK(parse_market_tz("CET") == MarketTz::CentralEurope);
    CHECK(parse_market_tz("Europe/Berlin") == MarketTz::CentralEurope);
    CHECK_THROWS_AS(parse_market_tz("Mars/Olympus"), ParseError);
}
