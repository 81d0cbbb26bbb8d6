#include <doctest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "qra/core.hpp"
#include "qra/qrsolve.hpp"
#include "qra/synthetic.hpp"

using namespace qra;

namespace {

double pinball_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double k,
                         double intercept, const Eigen::VectorXd& w) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        s += pinball_loss(k, y[i] - intercept - x.row(i).dot(w));
    }
    return s;
}

// Brute-force oracle: best intercept on a fixed grid for an intercept-only fit.
double grid_search_intercept_objective(const Eigen::VectorXd& y, double k, double lo, double hi,
                                       double step) {
    double best = std::numeric_limits<double>::infinity();
    for (double b = lo; b <= hi + 1e-12; b += step) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) s += pinball_loss(k, y[i] - b);
        best = std::min(best, s);
    }
    return best;
}

QrProblem one_to_nine(double k) {
    QrProblem p;
    p.X = Eigen::MatrixXd::Zero(9, 0);
    p.y = Eigen::VectorXd::LinSpaced(9, 1.0, 9.0);
    p.quantile = k;
    p.include_intercept = true;
    return p;
}

}  // namespace

TEST_CASE("intercept-only exact fit hits the sample quantile") {
    const QrCoefficients median = solve_qr(one_to_nine(0.5));
    CHECK(median.intercept == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(median.weights.size() == 0);
    CHECK(median.diagnostics.converged);

    const QrCoefficients q25 = solve_qr(one_to_nine(0.25));
    CHECK(q25.intercept == doctest::Approx(3.0).epsilon(1e-5));

    // Objective agrees with the 0.01-step brute-force oracle at every decile.
    for (int i = 1; i <= 9; ++i) {
        const double k = i / 10.0;
        const QrCoefficients fit = solve_qr(one_to_nine(k));
        const double oracle = grid_search_intercept_objective(one_to_nine(k).y, k, 0.0, 10.0, 0.01);
        CHECK(fit.diagnostics.objective <= oracle + 1e-6);
        CHECK(fit.diagnostics.objective >= oracle - 1e-6);
    }
}

TEST_CASE("zero-residual fit is optimal for every quantile") {
    Eigen::MatrixXd x(12, 1);
    x.col(0) = Eigen::VectorXd::LinSpaced(12, -3.0, 8.0);
    const Eigen::VectorXd y = 2.0 * x.col(0);
    for (double k : {0.1, 0.5, 0.9}) {
        const QrCoefficients fit = solve_qr({x, y, k, true});
        CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-6));
        CHECK(fit.weights[0] == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(fit.diagnostics.objective == doctest::Approx(0.0).epsilon(1e-6));
    }
}

TEST_CASE("solver optimality against perturbed candidates") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> noise;
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 80;
        Eigen::MatrixXd x(n, 2);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = noise(rng);
            x(i, 1) = noise(rng);
            y[i] = 1.5 + 0.8 * x(i, 0) - 2.0 * x(i, 1) + noise(rng);
        }
        const double k = 0.3;
        const QrCoefficients fit = solve_qr({x, y, k, true});
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::VectorXd w = fit.weights;
            double b = fit.intercept;
            b += 0.3 * noise(rng);
            w[0] += 0.3 * noise(rng);
            w[1] += 0.3 * noise(rng);
            CHECK(pinball_objective(x, y, k, b, w) >= fit.diagnostics.objective - 1e-6);
        }

        // LP complementary slackness: counts of negative / non-positive
        // residuals bracket n*(1-k) up to the number of basis rows.
        Eigen::VectorXd resid = y - fit.intercept * Eigen::VectorXd::Ones(n) - x * fit.weights;
        int strictly_neg = 0;
        int non_pos = 0;
        const double tol = 1e-7 * (1.0 + y.cwiseAbs().maxCoeff());
        for (int i = 0; i < n; ++i) {
            if (resid[i] < -tol) ++strictly_neg;
            if (resid[i] <= tol) ++non_pos;
        }
        const double bound = n * (1.0 - k);
        CHECK(strictly_neg <= bound + 3.0);
        CHECK(non_pos >= bound - 3.0);
    }
}

TEST_CASE("scaling y scales coefficients and objective") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise;
    Eigen::MatrixXd x(40, 1);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) {
        x(i, 0) = noise(rng);
        y[i] = 3.0 + x(i, 0) + noise(rng);
    }
    const QrCoefficients base = solve_qr({x, y, 0.7, true});
    const double s = 137.5;
    const QrCoefficients scaled = solve_qr({x, s * y, 0.7, true});
    CHECK(scaled.intercept == doctest::Approx(s * base.intercept).epsilon(1e-9));
    CHECK(scaled.weights[0] == doctest::Approx(s * base.weights[0]).epsilon(1e-9));
    CHECK(scaled.diagnostics.objective ==
          doctest::Approx(s * base.diagnostics.objective).epsilon(1e-9));
}

TEST_CASE("solver input validation") {
    Eigen::MatrixXd x(5, 2);
    x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;  // second column collinear
    Eigen::VectorXd y(5);
    y << 1, 2, 3, 4, 5;
    CHECK_THROWS_AS(solve_qr({x, y, 0.5, false}), RankDeficientError);

    Eigen::MatrixXd ok = Eigen::MatrixXd::Random(3, 3);
    CHECK_THROWS_AS(solve_qr({ok, Eigen::VectorXd::Zero(3), 0.5, false}), ValidationError);
    CHECK_THROWS_AS(solve_qr({x, Eigen::VectorXd::Zero(4), 0.5, false}),
                    DimensionMismatchError);
    CHECK_THROWS_AS(solve_qr({x, y, 1.5, false}), ValidationError);
}

TEST_CASE("l1 penalty: lambda 0 reduces to the exact solver") {
    DeterministicRng rng(21);
    Eigen::MatrixXd x(60, 3);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
        y[i] = 2.0 + x(i, 0) - 0.5 * x(i, 1) + 0.3 * rng.normal();
    }
    const QrProblem problem{x, y, 0.4, true};
    const QrCoefficients plain = solve_qr(problem);
    const QrCoefficients l1 = solve_qr_l1(problem, L1Penalty{0.0, false, true});
    CHECK(l1.intercept == doctest::Approx(plain.intercept).epsilon(1e-6));
    for (int j = 0; j < 3; ++j) {
        CHECK(l1.weights[j] == doctest::Approx(plain.weights[j]).epsilon(1e-6));
    }
    CHECK(l1.diagnostics.objective == doctest::Approx(plain.diagnostics.objective).epsilon(1e-6));
}

TEST_CASE("l1 penalty: huge lambda zeroes the weights") {
    DeterministicRng rng(22);
    Eigen::MatrixXd x(101, 2);
    Eigen::VectorXd y(101);
    for (int i = 0; i < 101; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        y[i] = 5.0 + x(i, 0) + rng.normal();
    }
    const double k = 0.75;
    const QrCoefficients fit = solve_qr_l1({x, y, k, true}, L1Penalty{1e6, false, true});
    CHECK(std::abs(fit.weights[0]) <= 1e-6);
    CHECK(std::abs(fit.weights[1]) <= 1e-6);
    // Intercept collapses to the sample k-quantile (order statistic oracle).
    std::vector<double> sorted(y.begin(), y.end());
    std::sort(sorted.begin(), sorted.end());
    const double order_stat = sorted[static_cast<std::size_t>(std::ceil(k * 101.0)) - 1];
    CHECK(fit.intercept == doctest::Approx(order_stat).epsilon(1e-4));
}

TEST_CASE("l1 penalty: objective matches a 2-D grid oracle") {
    DeterministicRng rng(23);
    const int n = 40;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        y[i] = 1.0 + 0.8 * x(i, 0) + 0.4 * rng.normal();
    }
    const double k = 0.5;
    const double lambda = 1.0;
    // Standardization off so the oracle can work in the raw coordinates.
    const QrCoefficients fit = solve_qr_l1({x, y, k, true}, L1Penalty{lambda, false, false});
    const double fit_obj = pinball_objective(x, y, k, fit.intercept, fit.weights) +
                           lambda * std::abs(fit.weights[0]);

    double oracle = std::numeric_limits<double>::infinity();
    for (double b = -1.0; b <= 3.0; b += 0.005) {
        for (double w = -1.0; w <= 2.0; w += 0.005) {
            Eigen::VectorXd wv(1);
            wv[0] = w;
            oracle = std::min(oracle,
                              pinball_objective(x, y, k, b, wv) + lambda * std::abs(w));
        }
    }
    CHECK(fit_obj <= oracle + 1e-6);
    CHECK(fit.diagnostics.objective == doctest::Approx(fit_obj).epsilon(1e-9));
}

TEST_CASE("l1 solution path is monotone in lambda") {
    DeterministicRng rng(24);
    const int n = 80;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
        y[i] = 1.0 + x(i, 0) - 2.0 * x(i, 1) + 0.5 * rng.normal();
    }
    const QrProblem problem{x, y, 0.5, true};
    double prev_total = -1.0;
    double prev_pinball = -1.0;
    for (int e = -10; e <= 6; e += 2) {
        const double lambda = std::pow(2.0, e);
        const QrCoefficients fit = solve_qr_l1(problem, L1Penalty{lambda, false, true});
        const double pinball = pinball_objective(x, y, 0.5, fit.intercept, fit.weights);
        CHECK(fit.diagnostics.objective >= prev_total - 1e-7);
        CHECK(pinball >= prev_pinball - 1e-7);
        prev_total = fit.diagnostics.objective;
        prev_pinball = pinball;
    }
}

TEST_CASE("smoothed check function") {
    CHECK(smoothed_check_loss(0.5, 1.0, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(smoothed_check_loss(0.5, 0.25, 0.0) ==
          doctest::Approx(0.25 * 0.3989422804014327).epsilon(1e-12));

    SUBCASE("pointwise limit to the check function") {
        for (double u : {-2.0, -0.5, 0.3, 1.7}) {
            for (double k : {0.1, 0.5, 0.9}) {
                CHECK(smoothed_check_loss(k, 1e-6, u) ==
                      doctest::Approx(pinball_loss(k, u)).epsilon(1e-6));
            }
        }
    }
    SUBCASE("analytic gradient matches central finite differences") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> u_dist(-3.0, 3.0);
        std::uniform_real_distribution<double> h_dist(0.05, 2.0);
        std::uniform_real_distribution<double> k_dist(0.05, 0.95);
        for (int i = 0; i < 100; ++i) {
            const double u = u_dist(rng);
            const double h = h_dist(rng);
            const double k = k_dist(rng);
            const double step = 1e-6;
            const double fd =
                (smoothed_check_loss(k, h, u + step) - smoothed_check_loss(k, h, u - step)) /
                (2.0 * step);
            CHECK(std::abs(smoothed_check_gradient(k, h, u) - fd) <= 1e-6);
        }
    }
    SUBCASE("midpoint convexity never violated") {
        std::mt19937_64 rng(32);
        std::uniform_real_distribution<double> u_dist(-4.0, 4.0);
        for (int i = 0; i < 1000; ++i) {
            const double a = u_dist(rng);
            const double b = u_dist(rng);
            const double mid = smoothed_check_loss(0.3, 0.4, 0.5 * (a + b));
            const double avg =
                0.5 * (smoothed_check_loss(0.3, 0.4, a) + smoothed_check_loss(0.3, 0.4, b));
            CHECK(mid <= avg + 1e-12);
        }
    }
}

TEST_CASE("smoothed solver approaches the exact solver as h -> 0") {
    DeterministicRng rng(33);
    const int n = 120;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        y[i] = 0.5 + x(i, 0) - 0.7 * x(i, 1) + 0.6 * rng.normal();
    }
    const QrProblem problem{x, y, 0.5, true};
    const QrCoefficients exact = solve_qr(problem);
    const QrCoefficients smooth = solve_qr_smoothed(problem, SmoothingBandwidth::fixed(1e-4));
    const double smooth_pinball = pinball_objective(x, y, 0.5, smooth.intercept, smooth.weights);
    CHECK(std::abs(smooth_pinball - exact.diagnostics.objective) <= 1e-3);
    CHECK(std::abs(smooth.diagnostics.objective - exact.diagnostics.objective) <= 1e-3);
}

TEST_CASE("rule-of-thumb bandwidth resolves positive") {
    DeterministicRng rng(34);
    Eigen::MatrixXd x(50, 1);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) {
        x(i, 0) = rng.normal();
        y[i] = x(i, 0) + rng.normal();
    }
    const QrProblem problem{x, y, 0.5, true};
    const double h = resolve_bandwidth(problem, SmoothingBandwidth::rule_of_thumb());
    CHECK(h >= 0.05);
    CHECK_THROWS_AS(SmoothingBandwidth::fixed(0.0), ParamError);
    CHECK_THROWS_AS(resolve_bandwidth(problem, SmoothingBandwidth{BandwidthRule::Fixed, -1.0}),
                    ParamError);
    const QrCoefficients fit = solve_qr_smoothed(problem, SmoothingBandwidth::rule_of_thumb());
    CHECK(fit.diagnostics.converged);
}

TEST_CASE("prediction and serialization") {
    QrCoefficients c;
    c.intercept = 7.0;
    c.weights = Eigen::VectorXd::Zero(0);
    c.quantile = 0.5;
    CHECK(predict_quantile(c, Eigen::VectorXd::Zero(0)) == 7.0);

    QrCoefficients slope;
    slope.intercept = 0.0;
    slope.weights = Eigen::VectorXd::Constant(1, 2.0);
    slope.quantile = 0.5;
    Eigen::VectorXd x3 = Eigen::VectorXd::Constant(1, 3.0);
    CHECK(predict_quantile(slope, x3) == 6.0);
    CHECK_THROWS_AS(predict_quantile(slope, Eigen::VectorXd::Zero(2)), DimensionMismatchError);

    slope.diagnostics.objective = 0.123456789012345678;
    slope.diagnostics.iterations = 17;
    slope.diagnostics.converged = true;
    const nlohmann::json j = slope;
    const QrCoefficients back = j.get<QrCoefficients>();
    CHECK(back.intercept == slope.intercept);
    CHECK(back.weights[0] == slope.weights[0]);
    CHECK(back.diagnostics.objective == slope.diagnostics.objective);
    CHECK(back.diagnostics.iterations == 17);
}
