#include "qra/evaluate.hpp"

#include <cmath>

#include "qra/stats.hpp"

namespace qra {

PredictionInterval build_interval(const QuantileForecastSurface& surface, double alpha) {
    if (!(alpha > 0.0 && alpha < 100.0)) {
        throw ValidationError("build_interval: alpha must lie in (0, 100)");
    }
    PredictionInterval interval;
    interval.alpha = alpha;
    interval.lower_level = (100.0 - alpha) / 200.0;
    interval.upper_level = (100.0 + alpha) / 200.0;
    const std::size_t lo = surface.grid().index_of(interval.lower_level);
    const std::size_t hi = surface.grid().index_of(interval.upper_level);
    if (lo == QuantileGrid::npos || hi == QuantileGrid::npos) {
        throw MissingLevelError("grid lacks levels required for alpha=" + std::to_string(alpha));
    }
    interval.stamps = surface.stamps();
    const Eigen::MatrixXd& v = surface.values();
    interval.lower.resize(surface.rows());
    interval.upper.resize(surface.rows());
    for (std::size_t i = 0; i < surface.rows(); ++i) {
        interval.lower[i] = v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(lo));
        interval.upper[i] = v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(hi));
    }
    return interval;
}

CoverageResult aec(const PredictionInterval& interval, const HourlyTimeSeries& actual) {
    if (interval.stamps.size() != actual.size()) {
        throw AlignmentError("aec: interval and actuals differ in length");
    }
    CoverageResult result;
    result.n = actual.size();
    result.hits.resize(result.n);
    std::size_t count = 0;
    for (std::size_t i = 0; i < result.n; ++i) {
        if (interval.stamps[i] != actual.stamp(i)) {
            throw AlignmentError("aec: misaligned at " + format_timestamp(actual.stamp(i)));
        }
        const bool hit =
            interval.lower[i] <= actual.value(i) && actual.value(i) <= interval.upper[i];
        result.hits[i] = hit ? 1 : 0;
        count += hit ? 1u : 0u;
    }
    result.aec = 100.0 * static_cast<double>(count) / static_cast<double>(result.n);
    return result;
}

double aps(const QuantileForecastSurface& surface, const HourlyTimeSeries& actual) {
    if (surface.rows() != actual.size()) {
        throw AlignmentError("aps: surface and actuals differ in length");
    }
    const Eigen::MatrixXd& v = surface.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < surface.rows(); ++i) {
        if (surface.stamps()[i] != actual.stamp(i)) {
            throw AlignmentError("aps: misaligned at " + format_timestamp(actual.stamp(i)));
        }
        for (std::size_t j = 0; j < surface.grid().size(); ++j) {
            sum += pinball_loss(surface.grid().level(j),
                                actual.value(i) - v(static_cast<Eigen::Index>(i),
                                                    static_cast<Eigen::Index>(j)));
        }
    }
    return sum / (static_cast<double>(surface.rows()) * static_cast<double>(surface.grid().size()));
}

namespace {

// n * ln(p) with the 0 * ln(0) := 0 convention.
double xlogp(double count, double p) { return count > 0.0 ? count * std::log(p) : 0.0; }

LrTestResult make_result(double statistic, int dof, double significance, bool degenerate) {
    LrTestResult r;
    // Guard against tiny negative values from cancellation.
    r.statistic = statistic < 0.0 && statistic > -1e-12 ? 0.0 : statistic;
    r.dof = dof;
    r.significance = significance;
    r.critical_value = stats::chi2_quantile(1.0 - significance, dof);
    r.reject = r.statistic > r.critical_value;
    r.degenerate = degenerate;
    return r;
}

double kupiec_statistic(const std::vector<std::uint8_t>& hits, double p) {
    const double n = static_cast<double>(hits.size());
    double n1 = 0.0;
    for (std::uint8_t h : hits) n1 += h;
    const double n0 = n - n1;
    const double pi_hat = n1 / n;
    const double log_null = xlogp(n0, 1.0 - p) + xlogp(n1, p);
    const double log_alt = xlogp(n0, 1.0 - pi_hat) + xlogp(n1, pi_hat);
    return -2.0 * (log_null - log_alt);
}

}  // namespace

LrTestResult kupiec_test(const std::vector<std::uint8_t>& hits, double alpha, double significance) {
    if (hits.empty()) throw ValidationError("kupiec_test: empty hit sequence");
    if (!(alpha > 0.0 && alpha < 100.0)) throw ValidationError("kupiec_test: alpha in (0,100)");
    if (!(significance > 0.0 && significance < 1.0)) {
        throw ValidationError("kupiec_test: significance in (0,1)");
    }
    double n1 = 0.0;
    for (std::uint8_t h : hits) n1 += h;
    const bool degenerate = n1 == 0.0 || n1 == static_cast<double>(hits.size());
    return make_result(kupiec_statistic(hits, alpha / 100.0), 1, significance, degenerate);
}

LrTestResult christoffersen_test(const std::vector<std::uint8_t>& hits, double alpha,
                                 double significance) {
    if (hits.size() < 2) throw ValidationError("christoffersen_test: needs at least 2 observations");
    if (!(alpha > 0.0 && alpha < 100.0)) {
        throw ValidationError("christoffersen_test: alpha in (0,100)");
    }
    if (!(significance > 0.0 && significance < 1.0)) {
        throw ValidationError("christoffersen_test: significance in (0,1)");
    }

    double n00 = 0.0, n01 = 0.0, n10 = 0.0, n11 = 0.0;
    for (std::size_t i = 1; i < hits.size(); ++i) {
        if (hits[i - 1] == 0) {
            (hits[i] == 0 ? n00 : n01) += 1.0;
        } else {
            (hits[i] == 0 ? n10 : n11) += 1.0;
        }
    }
    const double total = n00 + n01 + n10 + n11;
    const double pi = (n01 + n11) / total;
    const double pi01 = n00 + n01 > 0.0 ? n01 / (n00 + n01) : 0.0;
    const double pi11 = n10 + n11 > 0.0 ? n11 / (n10 + n11) : 0.0;

    const double log_null = xlogp(n00 + n10, 1.0 - pi) + xlogp(n01 + n11, pi);
    const double log_markov = xlogp(n00, 1.0 - pi01) + xlogp(n01, pi01) +
                              xlogp(n10, 1.0 - pi11) + xlogp(n11, pi11);
    const double lr_ind = -2.0 * (log_null - log_markov);

    double n1 = 0.0;
    for (std::uint8_t h : hits) n1 += h;
    const bool degenerate = n1 == 0.0 || n1 == static_cast<double>(hits.size());
    const double lr_cc = kupiec_statistic(hits, alpha / 100.0) + lr_ind;
    return make_result(lr_cc, 2, significance, degenerate);
}

}  // namespace qra
