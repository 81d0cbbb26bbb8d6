#include <doctest.h>

#include <random>

#include "qra/core.hpp"

using namespace qra;

TEST_CASE("pinball loss matches the check-function definition") {
    CHECK(pinball_loss(0.5, 2.0) == doctest::Approx(1.0));
    CHECK(pinball_loss(0.9, 1.0) == doctest::Approx(0.9));
    CHECK(pinball_loss(0.9, -1.0) == doctest::Approx(0.1));
    CHECK(pinball_loss(0.3, 0.0) == 0.0);
    CHECK_THROWS_AS(pinball_loss(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(pinball_loss(1.0, 1.0), ValidationError);
}

TEST_CASE("pinball loss is convex and pairs to |u|") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u_dist(-10.0, 10.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double k = 0.01 + 0.98 * unit(rng);
        const double u1 = u_dist(rng);
        const double u2 = u_dist(rng);
        const double t = unit(rng);
        const double lhs = pinball_loss(k, t * u1 + (1.0 - t) * u2);
        const double rhs = t * pinball_loss(k, u1) + (1.0 - t) * pinball_loss(k, u2);
        CHECK(lhs <= rhs + 1e-12);
        CHECK(pinball_loss(k, u1) + pinball_loss(1.0 - k, -u1) ==
              doctest::Approx(std::abs(u1)).epsilon(1e-12));
        CHECK(pinball_loss(k, u1) >= 0.0);
    }
}

TEST_CASE("quantile grid") {
    const QuantileGrid grid = QuantileGrid::percentiles();
    CHECK(grid.size() == 99);
    CHECK(grid.level(0) == doctest::Approx(0.01));
    CHECK(grid.level(98) == doctest::Approx(0.99));
    CHECK(grid.index_of(0.25) == 24);
    CHECK(grid.index_of(0.123) == QuantileGrid::npos);
    CHECK_THROWS_AS(QuantileGrid({0.5, 0.5}), ValidationError);
    CHECK_THROWS_AS(QuantileGrid({0.5, 0.4}), ValidationError);
    CHECK_THROWS_AS(QuantileGrid({0.0, 0.4}), ValidationError);
}

TEST_CASE("hourly series enforces the gap-free grid") {
    const auto stamps = hourly_span(Timestamp::from_labels({2015, 1, 5}, 0), 48);
    CHECK(stamps[24].market_day == CivilDate{2015, 1, 6});
    CHECK(stamps[24].market_hour == 0);
    const HourlyTimeSeries s(stamps, std::vector<double>(48, 1.0), "EUR/MWh");
    CHECK(s.covers_whole_days());
    CHECK(s.index_of(stamps[7].epoch_seconds) == 7);

    auto gappy = stamps;
    gappy.erase(gappy.begin() + 10);
    CHECK_THROWS_AS(HourlyTimeSeries(gappy, std::vector<double>(47, 1.0), "x"), GapError);

    std::vector<double> with_nan(48, 1.0);
    with_nan[3] = std::nan("");
    CHECK_THROWS_AS(HourlyTimeSeries(stamps, with_nan, "x"), ValidationError);
}

TEST_CASE("timestamp format round trip") {
    const Timestamp ts = Timestamp::from_labels({2015, 3, 29}, 13);
    CHECK(format_timestamp(ts) == "2015-03-29T13:00:00Z");
    CHECK(parse_timestamp("2015-03-29T13:00:00Z") == ts);
    CHECK(parse_timestamp("2015-03-29 13:00:00") == ts);
    CHECK(parse_timestamp("2015-03-29T13:00Z").epoch_seconds == ts.epoch_seconds);
    CHECK_THROWS_AS(parse_timestamp("2015-03-29T13:30:00Z"), ParseError);
    CHECK_THROWS_AS(parse_timestamp("not a date"), ParseError);
}

namespace {

QuantileForecastSurface make_surface(const Eigen::MatrixXd& rows,
                                     const std::vector<double>& levels) {
    return QuantileForecastSurface(
        hourly_span(Timestamp::from_labels({2015, 1, 5}, 0), static_cast<std::size_t>(rows.rows())),
        QuantileGrid(levels), rows);
}

}  // namespace

TEST_CASE("crossing repair sorts rows and preserves values") {
    Eigen::MatrixXd v(3, 3);
    v << 10, 9, 11,  //
        1, 2, 3,     //
        5, 5, 5;
    const QuantileForecastSurface repaired = repair_crossing(make_surface(v, {0.25, 0.5, 0.75}));
    CHECK(repaired.values()(0, 0) == 9);
    CHECK(repaired.values()(0, 1) == 10);
    CHECK(repaired.values()(0, 2) == 11);
    CHECK(repaired.values().row(1) == v.row(1));  // already monotone: unchanged
    CHECK(repaired.values().row(2) == v.row(2));  // degenerate: unchanged
    CHECK(repaired.rows_monotone());
}

TEST_CASE("crossing repair is idempotent on random surfaces") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd v(24, 9);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = dist(rng);
    }
    std::vector<double> levels;
    for (int i = 1; i <= 9; ++i) levels.push_back(i / 10.0);
    const auto once = repair_crossing(make_surface(v, levels));
    const auto twice = repair_crossing(once);
    CHECK(once.values() == twice.values());
    CHECK(once.rows_monotone());
    // Multiset preserved per row.
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        CHECK(once.values().row(i).sum() == doctest::Approx(v.row(i).sum()).epsilon(1e-12));
    }
}
