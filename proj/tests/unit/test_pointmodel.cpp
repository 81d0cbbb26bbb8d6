#include <doctest.h>

#include "qra/pointmodel.hpp"
#include "qra/synthetic.hpp"

using namespace qra;

TEST_CASE("ols fitting") {
    SUBCASE("exact line") {
        Eigen::MatrixXd x(5, 2);
        x.col(0).setOnes();
        x.col(1) << 1, 2, 3, 4, 5;
        Eigen::VectorXd y = 2.0 * x.col(1);
        const Eigen::VectorXd beta = fit_ols(x, y);
        CHECK(beta[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(beta[1] == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("constant target, intercept only") {
        Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(6, 1);
        const Eigen::VectorXd beta = fit_ols(ones, Eigen::VectorXd::Constant(6, 5.0));
        CHECK(beta[0] == doctest::Approx(5.0));
    }
    SUBCASE("random system matches the normal-equation oracle") {
        DeterministicRng rng(50);
        Eigen::MatrixXd x(50, 3);
        Eigen::VectorXd y(50);
        for (int i = 0; i < 50; ++i) {
            for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
            y[i] = 1.0 + 2.0 * x(i, 0) - x(i, 2) + 0.1 * rng.normal();
        }
        const Eigen::VectorXd beta = fit_ols(x, y);
        // Independent route: solve X'X b = X'y by full-pivot LU.
        const Eigen::MatrixXd xtx = x.transpose() * x;
        const Eigen::VectorXd oracle = Eigen::FullPivLU<Eigen::MatrixXd>(xtx).solve(
            (x.transpose() * y).eval());
        for (int j = 0; j < 3; ++j) CHECK(beta[j] == doctest::Approx(oracle[j]).epsilon(1e-8));
    }
    SUBCASE("errors") {
        Eigen::MatrixXd collinear(5, 2);
        collinear.col(0) << 1, 2, 3, 4, 5;
        collinear.col(1) = 2.0 * collinear.col(0);
        CHECK_THROWS_AS(fit_ols(collinear, Eigen::VectorXd::Zero(5)), RankDeficientError);
        CHECK_THROWS_AS(fit_ols(Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Zero(2)),
                        ValidationError);
    }
}

namespace {

HourlyTimeSeries series_of(const std::vector<double>& values, CivilDate first = {2015, 1, 5}) {
    return HourlyTimeSeries(hourly_span(Timestamp::from_labels(first, 0), values.size()), values,
                            "EUR/MWh");
}

}  // namespace

TEST_CASE("point metrics formulas") {
    SUBCASE("perfect prediction") {
        const auto actual = series_of(std::vector<double>(48, 10.0));
        const PointMetricsReport r = point_metrics(actual, actual);
        CHECK(r.mae == 0.0);
        CHECK(r.rmse == 0.0);
        CHECK(*r.mape == 0.0);
        CHECK(*r.r2 == 1.0);
    }
    SUBCASE("constant offset over two days") {
        const auto actual = series_of(std::vector<double>(48, 10.0));
        const auto predicted = series_of(std::vector<double>(48, 11.0));
        const PointMetricsReport r = point_metrics(actual, predicted);
        CHECK(r.mae == doctest::Approx(1.0));
        CHECK(r.mse == doctest::Approx(1.0));
        CHECK(r.rmse == doctest::Approx(1.0));
        CHECK(*r.mape == doctest::Approx(0.1));
        CHECK(r.rmse == doctest::Approx(std::sqrt(r.mse)).epsilon(1e-12));
    }
    SUBCASE("rmse dominates mae on random fixtures") {
        DeterministicRng rng(51);
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> a(24), p(24);
            for (int i = 0; i < 24; ++i) {
                a[i] = 10.0 + rng.normal();
                p[i] = a[i] + rng.normal();
            }
            const PointMetricsReport r = point_metrics(series_of(a), series_of(p));
            CHECK(r.rmse >= r.mae - 1e-12);
        }
    }
    SUBCASE("mape undefined on zero actuals") {
        std::vector<double> a(24, 10.0);
        a[3] = 0.0;
        const PointMetricsReport r = point_metrics(series_of(a), series_of(std::vector<double>(24, 9.0)));
        CHECK_FALSE(r.mape.has_value());
        CHECK(r.mae > 0.0);
    }
    SUBCASE("alignment and shape errors") {
        const auto a = series_of(std::vector<double>(24, 1.0));
        const auto b = series_of(std::vector<double>(48, 1.0));
        CHECK_THROWS_AS(point_metrics(a, b), AlignmentError);
        const auto shifted = series_of(std::vector<double>(24, 1.0), {2015, 1, 6});
        CHECK_THROWS_AS(point_metrics(a, shifted), AlignmentError);
        const HourlyTimeSeries partial(
            hourly_span(Timestamp::from_labels({2015, 1, 5}, 3), 24),
            std::vector<double>(24, 1.0), "EUR/MWh");
        CHECK_THROWS_AS(point_metrics(partial, partial), AlignmentError);
    }
}

TEST_CASE("naive persistence reproduces the previous day") {
    const MarketPanel panel = synthetic_panel(20, 8);
    PointModelConfig config;
    config.model = PointModelKind::Naive;
    CalibrationSchedule schedule;
    schedule.window_days = 8;
    schedule.first_prediction_day = add_days(panel.price_da().stamp(0).market_day, 10);
    schedule.last_prediction_day = add_days(schedule.first_prediction_day, 5);
    const PointForecastMatrix m = rolling_point_forecast(panel, config, schedule);
    CHECK(m.rows() == 6 * 24);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const Timestamp ts = m.stamps()[i];
        const std::size_t src = panel.price_da().index_of(ts.epoch_seconds - 86400);
        CHECK(m.values()(static_cast<Eigen::Index>(i), 0) == panel.price_da().value(src));
    }
}

TEST_CASE("constant panel forecasts itself exactly") {
    const std::size_t n = 40 * 24;
    const HourlyTimeSeries price(
        hourly_span(Timestamp::from_labels({2015, 1, 1}, 0), n),
        std::vector<double>(n, 42.0), "EUR/MWh");
    const MarketPanel panel{price};
    PointModelConfig config;  // linear regression, meanstd, no vst
    config.vst = VstParams::defaults(VstKind::Arcsinh);
    CalibrationSchedule schedule;
    schedule.window_days = 10;
    schedule.first_prediction_day = add_days(price.stamp(0).market_day, 20);
    schedule.last_prediction_day = add_days(price.stamp(0).market_day, 39);
    const PointForecastMatrix m = rolling_point_forecast(panel, config, schedule);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        CHECK(m.values()(static_cast<Eigen::Index>(i), 0) == doctest::Approx(42.0).epsilon(1e-9));
    }
}

TEST_CASE("autoregressive panel: coefficients and error floor recovered") {
    // Generating process per hour: P_d = 5 + 0.5 P_{d-1} + 0.3 P_{d-2} + eps,
    // eps ~ N(0, 0.5).
    DeterministicRng rng(52);
    const int days = 160;
    std::vector<double> values(static_cast<std::size_t>(days) * 24);
    std::vector<std::vector<double>> per_hour(24, std::vector<double>(days));
    for (int h = 0; h < 24; ++h) {
        per_hour[h][0] = 25.0;
        per_hour[h][1] = 25.0;
        for (int d = 2; d < days; ++d) {
            per_hour[h][d] = 5.0 + 0.5 * per_hour[h][d - 1] + 0.3 * per_hour[h][d - 2] +
                             0.15 * rng.normal();
        }
    }
    for (int d = 0; d < days; ++d) {
        for (int h = 0; h < 24; ++h) values[static_cast<std::size_t>(d) * 24 + h] = per_hour[h][d];
    }
    const HourlyTimeSeries price(
        hourly_span(Timestamp::from_labels({2015, 1, 1}, 0), values.size()), values, "EUR/MWh");
    const MarketPanel panel{price};

    SUBCASE("ols on the generating design recovers the coefficients") {
        // Pooled lag design over a 100-day window, all 24 hours.
        const int window = 100;
        Eigen::MatrixXd x(window * 24, 3);
        Eigen::VectorXd y(window * 24);
        int r = 0;
        for (int d = 0; d < window; ++d) {
            const int day = 40 + d;
            for (int h = 0; h < 24; ++h, ++r) {
                x(r, 0) = 1.0;
                x(r, 1) = per_hour[h][day - 1];
                x(r, 2) = per_hour[h][day - 2];
                y[r] = per_hour[h][day];
            }
        }
        const Eigen::VectorXd beta = fit_ols(x, y);
        CHECK(std::abs(beta[1] - 0.5) <= 0.05);
        CHECK(std::abs(beta[2] - 0.3) <= 0.05);
    }
    SUBCASE("rolling forecast reaches the noise floor") {
        PointModelConfig config;
        config.features.lags = {1, 2};
        CalibrationSchedule schedule;
        schedule.window_days = 100;
        schedule.first_prediction_day = add_days(price.stamp(0).market_day, 110);
        schedule.last_prediction_day = add_days(price.stamp(0).market_day, days - 1);
        const PointForecastMatrix m = rolling_point_forecast(panel, config, schedule);
        const HourlyTimeSeries actual =
            price.slice_days(schedule.first_prediction_day, schedule.last_prediction_day);
        const HourlyTimeSeries predicted(
            m.stamps(), std::vector<double>(m.values().col(0).begin(), m.values().col(0).end()),
            "EUR/MWh");
        const PointMetricsReport r = point_metrics(actual, predicted);
        // Best achievable MAE is E|eps| = sigma * sqrt(2/pi).
        const double floor = 0.15 * 0.7978845608028654;
        CHECK(r.mae <= 1.10 * floor);
        CHECK(r.mae >= 0.80 * floor);
    }
}

TEST_CASE("rolling forecast never looks ahead") {
    const MarketPanel panel = synthetic_panel(30, 9);
    PointModelConfig config;
    config.features.lags = {1, 2, 7};
    config.features.exogenous = {"quantity"};
    CalibrationSchedule schedule;
    schedule.window_days = 15;
    const CivilDate first = panel.price_da().stamp(0).market_day;
    schedule.first_prediction_day = add_days(first, 23);
    schedule.last_prediction_day = add_days(first, 27);
    const PointForecastMatrix base = rolling_point_forecast(panel, config, schedule);

    // Inject a future-only signal: wreck the prices strictly after a target
    // prediction day and assert the target day's forecasts are untouched.
    const CivilDate target = add_days(first, 25);
    std::vector<double> tampered = panel.price_da().values();
    const std::size_t cut =
        panel.price_da().index_of(Timestamp::from_labels(add_days(target, 1), 0).epoch_seconds);
    for (std::size_t i = cut; i < tampered.size(); ++i) tampered[i] += 500.0;
    const MarketPanel moved{panel.price_da().with_values(tampered),
                            panel.load_forecast()};
    CalibrationSchedule upto = schedule;
    upto.last_prediction_day = target;
    const PointForecastMatrix base_upto = rolling_point_forecast(panel, config, upto);
    const PointForecastMatrix tampered_upto = rolling_point_forecast(moved, config, upto);
    CHECK(base_upto.values() == tampered_upto.values());
}

TEST_CASE("insufficient history raises CoverageError") {
    const MarketPanel panel = synthetic_panel(10, 10);
    PointModelConfig config;
    CalibrationSchedule schedule;
    schedule.window_days = 8;
    const CivilDate first = panel.price_da().stamp(0).market_day;
    schedule.first_prediction_day = add_days(first, 9);  // needs 8 + 7 days history
    schedule.last_prediction_day = add_days(first, 9);
    CHECK_THROWS_AS(rolling_point_forecast(panel, config, schedule), CoverageError);
}
