#include <doctest.h>

#include <cmath>

#include "qra/evaluate.hpp"
#include "qra/stats.hpp"
#include "qra/synthetic.hpp"

using namespace qra;

namespace {

QuantileForecastSurface surface_from(const Eigen::MatrixXd& values,
                                     const std::vector<double>& levels,
                                     CivilDate first = {2015, 1, 5}) {
    return QuantileForecastSurface(
        hourly_span(Timestamp::from_labels(first, 0), static_cast<std::size_t>(values.rows())),
        QuantileGrid(levels), values);
}

HourlyTimeSeries actual_from(const std::vector<double>& values, CivilDate first = {2015, 1, 5}) {
    return HourlyTimeSeries(hourly_span(Timestamp::from_labels(first, 0), values.size()), values,
                            "EUR/MWh");
}

// Independent log-likelihood arithmetic for the independence part.
double lr_ind_oracle(const std::vector<std::uint8_t>& hits) {
    double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    for (std::size_t i = 1; i < hits.size(); ++i) {
        if (hits[i - 1] == 0 && hits[i] == 0) n00 += 1;
        if (hits[i - 1] == 0 && hits[i] == 1) n01 += 1;
        if (hits[i - 1] == 1 && hits[i] == 0) n10 += 1;
        if (hits[i - 1] == 1 && hits[i] == 1) n11 += 1;
    }
    const auto xlog = [](double c, double p) { return c > 0 ? c * std::log(p) : 0.0; };
    const double pi = (n01 + n11) / (n00 + n01 + n10 + n11);
    const double p01 = n00 + n01 > 0 ? n01 / (n00 + n01) : 0.0;
    const double p11 = n10 + n11 > 0 ? n11 / (n10 + n11) : 0.0;
    return -2.0 * (xlog(n00 + n10, 1 - pi) + xlog(n01 + n11, pi) - xlog(n00, 1 - p01) -
                   xlog(n01, p01) - xlog(n10, 1 - p11) - xlog(n11, p11));
}

}  // namespace

TEST_CASE("interval construction picks the right grid columns") {
    Eigen::MatrixXd v(24, 99);
    for (int i = 0; i < 24; ++i) {
        for (int j = 0; j < 99; ++j) v(i, j) = j;
    }
    const auto surface = surface_from(v, QuantileGrid::percentiles().levels());

    const PredictionInterval p50 = build_interval(surface, 50.0);
    CHECK(p50.lower_level == doctest::Approx(0.25));
    CHECK(p50.upper_level == doctest::Approx(0.75));
    CHECK(p50.lower[0] == 24.0);  // index of level 0.25
    CHECK(p50.upper[0] == 74.0);

    const PredictionInterval p90 = build_interval(surface, 90.0);
    CHECK(p90.lower_level == doctest::Approx(0.05));
    CHECK(p90.upper_level == doctest::Approx(0.95));

    const auto sparse = surface_from(Eigen::MatrixXd::Zero(24, 2), {0.25, 0.75});
    CHECK_NOTHROW(build_interval(sparse, 50.0));
    CHECK_THROWS_AS(build_interval(sparse, 90.0), MissingLevelError);
    CHECK_THROWS_AS(build_interval(sparse, 0.0), ValidationError);
}

TEST_CASE("empirical coverage counts closed-interval hits") {
    Eigen::MatrixXd v(24, 2);
    v.col(0).setConstant(-1000.0);
    v.col(1).setConstant(1000.0);
    const auto wide = surface_from(v, {0.25, 0.75});
    std::vector<double> values(24, 10.0);
    const CoverageResult all = aec(build_interval(wide, 50.0), actual_from(values));
    CHECK(all.aec == 100.0);

    Eigen::MatrixXd w(24, 2);
    w.col(0).setConstant(0.0);
    w.col(1).setConstant(1.0);
    std::vector<double> mixed(24, 0.5);
    mixed[0] = 2.0;  // out above
    mixed[1] = -1.0; // out below
    mixed[2] = 1.0;  // boundary counts as a hit
    mixed[3] = 0.0;  // boundary counts as a hit
    mixed[4] = 3.0;  // out
    mixed[5] = 4.0;  // out
    const CoverageResult r = aec(build_interval(surface_from(w, {0.25, 0.75}), 50.0),
                                 actual_from(mixed));
    CHECK(r.n == 24);
    CHECK(r.aec == doctest::Approx(100.0 * 20.0 / 24.0));
    CHECK(r.hits[0] == 0);
    CHECK(r.hits[2] == 1);
}

TEST_CASE("aec is invariant under monotone transforms") {
    DeterministicRng rng(61);
    Eigen::MatrixXd v(48, 2);
    std::vector<double> values(48);
    for (int i = 0; i < 48; ++i) {
        v(i, 0) = rng.normal();
        v(i, 1) = v(i, 0) + std::abs(rng.normal());
        values[static_cast<std::size_t>(i)] = rng.normal();
    }
    const CoverageResult base =
        aec(build_interval(surface_from(v, {0.25, 0.75}), 50.0), actual_from(values));
    Eigen::MatrixXd tv = v.unaryExpr([](double x) { return std::exp(0.3 * x); });
    std::vector<double> tvals(48);
    for (int i = 0; i < 48; ++i) tvals[static_cast<std::size_t>(i)] = std::exp(0.3 * values[i]);
    const CoverageResult mapped =
        aec(build_interval(surface_from(tv, {0.25, 0.75}), 50.0), actual_from(tvals));
    CHECK(base.hits == mapped.hits);
}

TEST_CASE("aggregate pinball score") {
    SUBCASE("perfect surface scores zero") {
        std::vector<double> values(24, 7.0);
        Eigen::MatrixXd v(24, 3);
        v.setConstant(7.0);
        CHECK(aps(surface_from(v, {0.25, 0.5, 0.75}), actual_from(values)) == 0.0);
    }
    SUBCASE("constant bias, single median") {
        std::vector<double> values(24, 10.0);
        Eigen::MatrixXd v(24, 1);
        v.setConstant(12.0);
        CHECK(aps(surface_from(v, {0.5}), actual_from(values)) == doctest::Approx(1.0));
    }
    SUBCASE("two-level grid with symmetric offsets") {
        std::vector<double> values(24, 10.0);
        Eigen::MatrixXd v(24, 2);
        v.col(0).setConstant(9.0);
        v.col(1).setConstant(11.0);
        CHECK(aps(surface_from(v, {0.25, 0.75}), actual_from(values)) == doctest::Approx(0.25));
    }
    SUBCASE("aps decomposes into per-level means") {
        DeterministicRng rng(62);
        Eigen::MatrixXd v(48, 3);
        std::vector<double> values(48);
        for (int i = 0; i < 48; ++i) {
            values[static_cast<std::size_t>(i)] = rng.normal();
            v(i, 0) = rng.normal() - 1.0;
            v(i, 1) = rng.normal();
            v(i, 2) = rng.normal() + 1.0;
        }
        const std::vector<double> levels{0.25, 0.5, 0.75};
        const auto surface = surface_from(v, levels);
        const auto actual = actual_from(values);
        double per_level_mean = 0.0;
        for (std::size_t j = 0; j < levels.size(); ++j) {
            double level_sum = 0.0;
            for (int i = 0; i < 48; ++i) {
                level_sum += pinball_loss(levels[j], values[static_cast<std::size_t>(i)] -
                                                         v(i, static_cast<Eigen::Index>(j)));
            }
            per_level_mean += level_sum / 48.0;
        }
        per_level_mean /= 3.0;
        CHECK(aps(surface, actual) == doctest::Approx(per_level_mean).epsilon(1e-12));
    }
}

TEST_CASE("kupiec unconditional coverage test") {
    SUBCASE("exact coverage yields a zero statistic") {
        std::vector<std::uint8_t> hits(100, 0);
        for (int i = 0; i < 50; ++i) hits[static_cast<std::size_t>(i)] = 1;
        const LrTestResult r = kupiec_test(hits, 50.0, 0.05);
        CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
        CHECK_FALSE(r.reject);
        CHECK(r.dof == 1);
        CHECK(r.critical_value == doctest::Approx(3.841458820694124).epsilon(1e-6));
    }
    SUBCASE("90 hits out of 100 against p = 0.5") {
        std::vector<std::uint8_t> hits(100, 1);
        for (int i = 0; i < 10; ++i) hits[static_cast<std::size_t>(i)] = 0;
        const LrTestResult r = kupiec_test(hits, 50.0, 0.05);
        // Frozen from direct high-precision log-likelihood arithmetic.
        CHECK(r.statistic == doctest::Approx(73.61284143369941).epsilon(1e-10));
        CHECK(r.reject);
    }
    SUBCASE("degenerate sequences are flagged, not fatal") {
        const LrTestResult r = kupiec_test(std::vector<std::uint8_t>(50, 1), 50.0, 0.05);
        CHECK(r.degenerate);
        CHECK(std::isfinite(r.statistic));
        CHECK_THROWS_AS(kupiec_test({}, 50.0, 0.05), ValidationError);
    }
    SUBCASE("statistic is non-negative on random sequences") {
        DeterministicRng rng(63);
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<std::uint8_t> hits(200);
            for (auto& h : hits) h = rng.uniform() < 0.7 ? 1 : 0;
            CHECK(kupiec_test(hits, 70.0, 0.05).statistic >= 0.0);
        }
    }
}

TEST_CASE("christoffersen conditional coverage test") {
    SUBCASE("equal transition probabilities give a near-zero independence part") {
        // 0,0,1,1 repeated: pi01 = pi11 = 1/2 and pi = 1/2.
        std::vector<std::uint8_t> hits;
        for (int i = 0; i < 50; ++i) {
            hits.push_back(0);
            hits.push_back(0);
            hits.push_back(1);
            hits.push_back(1);
        }
        CHECK(lr_ind_oracle(hits) <= 0.1);
        const LrTestResult r = christoffersen_test(hits, 50.0, 0.05);
        const LrTestResult uc = kupiec_test(hits, 50.0, 0.05);
        CHECK(r.statistic == doctest::Approx(uc.statistic + lr_ind_oracle(hits)).epsilon(1e-10));
    }
    SUBCASE("strict alternation is rejected") {
        std::vector<std::uint8_t> hits(100);
        for (std::size_t i = 0; i < hits.size(); ++i) hits[i] = i % 2 == 0 ? 0 : 1;
        const LrTestResult r = christoffersen_test(hits, 50.0, 0.05);
        CHECK(r.dof == 2);
        CHECK(r.critical_value == doctest::Approx(5.991464547107980).epsilon(1e-6));
        CHECK(r.statistic > r.critical_value);
        CHECK(r.reject);
        // Independence part alone exceeds the critical value.
        CHECK(lr_ind_oracle(hits) > 5.991464547107980);
    }
    SUBCASE("lr_cc = lr_uc + lr_ind on random sequences") {
        DeterministicRng rng(64);
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<std::uint8_t> hits(150);
            for (auto& h : hits) h = rng.uniform() < 0.6 ? 1 : 0;
            const double cc = christoffersen_test(hits, 60.0, 0.05).statistic;
            const double uc = kupiec_test(hits, 60.0, 0.05).statistic;
            CHECK(cc == doctest::Approx(uc + lr_ind_oracle(hits)).epsilon(1e-10));
        }
    }
    SUBCASE("degenerate all-same hits flagged") {
        const LrTestResult r = christoffersen_test(std::vector<std::uint8_t>(40, 1), 50.0, 0.05);
        CHECK(r.degenerate);
        CHECK(std::isfinite(r.statistic));
    }
}

TEST_CASE("true conditional quantiles reach nominal coverage") {
    // y = mu + eps with eps ~ N(0,1); forecast quantile k as mu + ppf(k).
    DeterministicRng rng(65);
    const int n = 2016;  // 84 days
    std::vector<double> values(n);
    Eigen::MatrixXd v(n, 6);
    const std::vector<double> levels{0.05, 0.15, 0.25, 0.75, 0.85, 0.95};
    for (int i = 0; i < n; ++i) {
        const double mu = 30.0 + 5.0 * std::sin(i / 24.0);
        values[static_cast<std::size_t>(i)] = mu + rng.normal();
        for (std::size_t j = 0; j < levels.size(); ++j) {
            v(i, static_cast<Eigen::Index>(j)) = mu + stats::norm_ppf(levels[j]);
        }
    }
    const auto surface = surface_from(v, levels);
    const auto actual = actual_from(values);
    for (double alpha : {50.0, 70.0, 90.0}) {
        const CoverageResult r = aec(build_interval(surface, alpha), actual);
        CHECK(std::abs(r.aec - alpha) <= 3.0);
    }
}
