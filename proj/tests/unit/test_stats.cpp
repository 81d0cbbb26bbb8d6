#include <doctest.h>

#include <cmath>
#include <random>

#include "qra/errors.hpp"
#include "qra/stats.hpp"

using namespace qra;

TEST_CASE("normal distribution helpers") {
    CHECK(stats::norm_cdf(0.0) == doctest::Approx(0.5));
    CHECK(stats::norm_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
    CHECK(stats::norm_ppf(0.5) == doctest::Approx(0.0));
    CHECK(stats::norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(stats::norm_ppf(0.9) == doctest::Approx(1.2815515655446004).epsilon(1e-12));
    CHECK(stats::norm_ppf(0.1) == doctest::Approx(-1.2815515655446004).epsilon(1e-12));
    CHECK_THROWS_AS(stats::norm_ppf(0.0), DomainError);
    CHECK_THROWS_AS(stats::norm_ppf(1.0), DomainError);

    // ppf inverts cdf across the range, including tails.
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(1e-6, 1.0 - 1e-6);
    for (int i = 0; i < 500; ++i) {
        const double p = unit(rng);
        CHECK(stats::norm_cdf(stats::norm_ppf(p)) == doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("regularized incomplete gamma against erf identity") {
    // P(1/2, x) = erf(sqrt(x)).
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        CHECK(stats::lower_regularized_gamma(0.5, x) ==
              doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-13));
    }
    // P(1, x) = 1 - exp(-x).
    for (double x : {0.3, 1.0, 4.0}) {
        CHECK(stats::lower_regularized_gamma(1.0, x) ==
              doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-13));
    }
    CHECK(stats::lower_regularized_gamma(2.0, 0.0) == 0.0);
    CHECK_THROWS_AS(stats::lower_regularized_gamma(-1.0, 1.0), DomainError);
}

TEST_CASE("chi-square quantiles reproduce published critical values") {
    CHECK(stats::chi2_quantile(0.95, 1) == doctest::Approx(3.841458820694124).epsilon(1e-9));
    CHECK(stats::chi2_quantile(0.95, 2) == doctest::Approx(5.991464547107980).epsilon(1e-9));
    CHECK(stats::chi2_quantile(0.99, 1) == doctest::Approx(6.634896601021214).epsilon(1e-6));
    // Quantile inverts the CDF.
    for (int dof : {1, 2, 5}) {
        for (double p : {0.05, 0.5, 0.95}) {
            CHECK(stats::chi2_cdf(stats::chi2_quantile(p, dof), dof) ==
                  doctest::Approx(p).epsilon(1e-9));
        }
    }
}
