#include "qra/synthetic.hpp"

#include <cmath>

namespace qra {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

SyntheticData linear_gaussian_data(int days, std::uint64_t seed, int forecasters,
                                   CivilDate first_day) {
    if (days < 1 || forecasters < 1) throw ValidationError("linear_gaussian_data: bad shape");
    DeterministicRng rng(seed);
    const std::size_t n = static_cast<std::size_t>(days) * 24;
    const std::vector<Timestamp> stamps = hourly_span(Timestamp::from_labels(first_day, 0), n);

    Eigen::MatrixXd x(n, forecasters);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double hour = static_cast<double>(i % 24);
        const double day = std::floor(static_cast<double>(i) / 24.0);
        const double signal = 40.0 + 12.0 * std::sin(kTwoPi * hour / 24.0) +
                              5.0 * std::sin(kTwoPi * day / 7.0) + 0.01 * day;
        x(static_cast<Eigen::Index>(i), 0) = signal;
        for (int j = 1; j < forecasters; ++j) {
            x(static_cast<Eigen::Index>(i), j) = signal + 0.5 * rng.normal();
        }
        y[i] = signal + rng.normal();
    }

    std::vector<std::string> names;
    for (int j = 0; j < forecasters; ++j) names.push_back("model" + std::to_string(j + 1));
    return SyntheticData{PointForecastMatrix(stamps, std::move(names), std::move(x)),
                         HourlyTimeSeries(stamps, std::move(y), "EUR/MWh")};
}

MarketPanel synthetic_panel(int days, std::uint64_t seed, CivilDate first_day) {
    if (days < 1) throw ValidationError("synthetic_panel: days must be >= 1");
    DeterministicRng rng(seed);
    const std::size_t n = static_cast<std::size_t>(days) * 24;
    const std::vector<Timestamp> stamps = hourly_span(Timestamp::from_labels(first_day, 0), n);

    std::vector<double> price(n), load(n);
    double ar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double hour = static_cast<double>(i % 24);
        const double day = std::floor(static_cast<double>(i) / 24.0);
        const double shape = 10.0 * std::sin(kTwoPi * (hour - 6.0) / 24.0) +
                             4.0 * std::sin(kTwoPi * day / 7.0);
        ar = 0.7 * ar + 3.0 * rng.normal();
        double p = 35.0 + shape + ar;
        if (rng.uniform() < 0.004) p += 60.0 * rng.uniform();  // occasional spike
        price[i] = p;
        load[i] = 50000.0 + 6000.0 * std::sin(kTwoPi * (hour - 7.0) / 24.0) +
                  1500.0 * std::sin(kTwoPi * day / 7.0) + 300.0 * rng.normal();
    }
    return MarketPanel(HourlyTimeSeries(stamps, std::move(price), "EUR/MWh"),
                       HourlyTimeSeries(stamps, std::move(load), "MWh"));
}

}  // namespace qra
