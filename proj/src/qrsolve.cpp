#include "qra/qrsolve.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <vector>

#include "qra/stats.hpp"

namespace qra {

namespace {

constexpr double kGapTol = 1e-8;       // duality gap <= kGapTol * (1 + |objective|)
constexpr double kRidge = 1e-10;       // normal-matrix ridge; min-norm tie break
constexpr double kStepFraction = 0.9995;

void validate_problem(const QrProblem& p) {
    const Eigen::Index n = p.X.rows();
    const Eigen::Index m = p.X.cols();
    if (n == 0) throw ValidationError("QrProblem: no rows");
    if (m == 0 && !p.include_intercept) throw ValidationError("QrProblem: empty design");
    if (p.y.size() != n) throw DimensionMismatchError("QrProblem: X rows != y length");
    if (n < m + 1) throw ValidationError("QrProblem: needs n >= m + 1 rows");
    if (!p.X.allFinite() || !p.y.allFinite()) throw ValidationError("QrProblem: non-finite entries");
    if (!(p.quantile > 0.0 && p.quantile < 1.0)) {
        throw ValidationError("QrProblem: quantile must lie in (0, 1)");
    }
}

Eigen::MatrixXd build_design(const QrProblem& p) {
    if (!p.include_intercept) return p.X;
    Eigen::MatrixXd a(p.X.rows(), p.X.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(p.X.cols()) = p.X;
    return a;
}

double pinball_sum(const Eigen::VectorXd& r, double tau) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        s += r[i] >= 0.0 ? tau * r[i] : (tau - 1.0) * r[i];
    }
    return s;
}

// Largest alpha in (0, 1] with x + alpha*dx >= 0 componentwise.
double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (dx[i] < 0.0) alpha = std::min(alpha, -x[i] / dx[i]);
    }
    return alpha;
}

struct IpmResult {
    Eigen::VectorXd beta;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;  // pinball sum over the rows given to the kernel
};

// Primal-dual interior point method for
//   min_beta sum_i rho_tau(y_i - a_i' beta)
// in LP form  min tau e'u + (1-tau) e'v  s.t.  A beta + u - v = y, u,v >= 0.
// Dual vector d lives in [tau-1, tau] with slacks s_u = tau - d, s_v = 1-tau+d.
// Start is primal and dual feasible (d = 0), so only the complementarity gap
// has to be driven down; Mehrotra predictor-corrector steps do that.
IpmResult ipm_pinball(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double tau,
                      const Eigen::VectorXd& beta0) {
    const Eigen::Index n = A.rows();
    const Eigen::Index p = A.cols();
    const int max_iter = static_cast<int>(10 * (n + p));

    IpmResult res;
    res.beta = beta0;

    Eigen::VectorXd r = y - A * res.beta;
    const double eps0 = std::max(1e-3, 0.5 * r.cwiseAbs().mean());
    Eigen::VectorXd u = r.cwiseMax(0.0).array() + eps0;
    Eigen::VectorXd v = (-r).cwiseMax(0.0).array() + eps0;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd s_u = Eigen::VectorXd::Constant(n, tau);
    Eigen::VectorXd s_v = Eigen::VectorXd::Constant(n, 1.0 - tau);

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    for (int iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter;
        const double gap = u.dot(s_u) + v.dot(s_v);
        res.objective = pinball_sum(y - A * res.beta, tau);
        if (gap <= kGapTol * (1.0 + std::abs(res.objective))) {
            res.converged = true;
            return res;
        }

        const Eigen::ArrayXd dinv = 1.0 / (u.array() / s_u.array() + v.array() / s_v.array());
        Eigen::MatrixXd m = A.transpose() * dinv.matrix().asDiagonal() * A;
        m.diagonal().array() += kRidge;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(m);

        const Eigen::VectorXd r_p = y - A * res.beta - u + v;
        const Eigen::VectorXd r_d = A.transpose() * d;

        auto solve_direction = [&](const Eigen::VectorXd& t_u, const Eigen::VectorXd& t_v,
                                   Eigen::VectorXd& dbeta, Eigen::VectorXd& dd, Eigen::VectorXd& du,
                                   Eigen::VectorXd& dv) {
            const Eigen::VectorXd g =
                r_p + u - v - (t_u.array() / s_u.array()).matrix() + (t_v.array() / s_v.array()).matrix();
            dbeta = ldlt.solve(A.transpose() * (dinv * g.array()).matrix() - r_d);
            dd = (dinv * (g - A * dbeta).array()).matrix();
            du = (t_u.array() / s_u.array() - u.array() + u.array() / s_u.array() * dd.array()).matrix();
            dv = (t_v.array() / s_v.array() - v.array() - v.array() / s_v.array() * dd.array()).matrix();
        };

        // Predictor (affine scaling) step.
        Eigen::VectorXd dbeta, dd, du, dv;
        solve_direction(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), dbeta, dd, du, dv);
        const double ap_aff = std::min({1.0, max_step(u, du), max_step(v, dv)});
        const double ad_aff = std::min({1.0, max_step(s_u, -dd), max_step(s_v, dd)});
        const double mu = gap / static_cast<double>(2 * n);
        const double mu_aff = ((u + ap_aff * du).dot(s_u - ad_aff * dd) +
                               (v + ap_aff * dv).dot(s_v + ad_aff * dd)) /
                              static_cast<double>(2 * n);
        double sigma = mu_aff / mu;
        sigma = std::clamp(sigma * sigma * sigma, 0.0, 1.0);

        // Corrector step with centering target sigma*mu.
        const Eigen::VectorXd t_u = sigma * mu * ones - (du.array() * (-dd.array())).matrix();
        const Eigen::VectorXd t_v = sigma * mu * ones - (dv.array() * dd.array()).matrix();
        solve_direction(t_u, t_v, dbeta, dd, du, dv);

        const double ap = std::min(1.0, kStepFraction * std::min(max_step(u, du), max_step(v, dv)));
        const double ad =
            std::min(1.0, kStepFraction * std::min(max_step(s_u, -dd), max_step(s_v, dd)));
        if (ap <= 1e-14 && ad <= 1e-14) break;  // stalled

        res.beta += ap * dbeta;
        u += ap * du;
        v += ap * dv;
        d += ad * dd;
        s_u -= ad * dd;
        s_v += ad * dd;
    }

    res.objective = pinball_sum(y - A * res.beta, tau);
    const double gap = u.dot(s_u) + v.dot(s_v);
    res.converged = gap <= kGapTol * (1.0 + std::abs(res.objective));
    return res;
}

// Rank check and least-squares start, sharing one factorization.
Eigen::VectorXd check_rank_and_ls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < A.cols()) {
        throw RankDeficientError("design matrix is rank deficient (collinear features)");
    }
    return qr.solve(y);
}

QrCoefficients pack(const QrProblem& problem, const Eigen::VectorXd& beta, const IpmResult& res,
                    double y_scale) {
    QrCoefficients out;
    out.quantile = problem.quantile;
    if (problem.include_intercept) {
        out.intercept = beta[0] * y_scale;
        out.weights = beta.tail(beta.size() - 1) * y_scale;
    } else {
        out.intercept = 0.0;
        out.weights = beta * y_scale;
    }
    out.diagnostics.iterations = res.iterations;
    out.diagnostics.converged = res.converged;
    out.diagnostics.objective = res.objective * y_scale;
    return out;
}

}  // namespace

QrCoefficients solve_qr(const QrProblem& problem) {
    validate_problem(problem);
    const Eigen::MatrixXd a = build_design(problem);

    // Internal response scaling keeps tolerances scale-free and makes the
    // solver exactly equivariant under y -> s*y.
    const double y_scale = std::max(1e-12, problem.y.cwiseAbs().maxCoeff());
    const Eigen::VectorXd y = problem.y / y_scale;

    const Eigen::VectorXd beta0 = check_rank_and_ls(a, y);
    const IpmResult res = ipm_pinball(a, y, problem.quantile, beta0);
    if (!res.converged) {
        throw NotConvergedError("solve_qr: interior point method did not converge in " +
                                std::to_string(res.iterations + 1) + " iterations");
    }
    return pack(problem, res.beta, res, y_scale);
}

QrCoefficients solve_qr_l1(const QrProblem& problem, const L1Penalty& penalty) {
    if (penalty.lambda_l1 < 0.0) throw ParamError("L1Penalty: lambda must be >= 0");
    if (penalty.lambda_l1 == 0.0) return solve_qr(problem);
    validate_problem(problem);

    const Eigen::Index n = problem.X.rows();
    const Eigen::Index m = problem.X.cols();

    // Standardize regressor columns for the penalized solve (centering only
    // makes sense with an intercept to absorb it).
    Eigen::VectorXd means = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sds = Eigen::VectorXd::Ones(m);
    Eigen::MatrixXd xs = problem.X;
    if (penalty.standardize) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (problem.include_intercept) means[j] = xs.col(j).mean();
            const double var = (xs.col(j).array() - means[j]).square().mean();
            sds[j] = var > 0.0 ? std::sqrt(var) : 1.0;
            xs.col(j) = (xs.col(j).array() - means[j]) / sds[j];
        }
    }

    const double y_scale = std::max(1e-12, problem.y.cwiseAbs().maxCoeff());

    // Augmented system: two pseudo-rows (+/- lambda e_j, y = 0) per penalized
    // coefficient contribute rho_k(lambda b) + rho_k(-lambda b) = lambda |b|.
    const bool pen_intercept = penalty.penalize_intercept && problem.include_intercept;
    const Eigen::Index p = problem.include_intercept ? m + 1 : m;
    const Eigen::Index first_pen = (problem.include_intercept && !pen_intercept) ? 1 : 0;
    const Eigen::Index n_pen = p - first_pen;

    Eigen::MatrixXd a_aug = Eigen::MatrixXd::Zero(n + 2 * n_pen, p);
    if (problem.include_intercept) {
        a_aug.block(0, 0, n, 1).setOnes();
        a_aug.block(0, 1, n, m) = xs;
    } else {
        a_aug.topRows(n) = xs;
    }
    Eigen::VectorXd y_aug = Eigen::VectorXd::Zero(n + 2 * n_pen);
    y_aug.head(n) = problem.y / y_scale;
    for (Eigen::Index j = 0; j < n_pen; ++j) {
        a_aug(n + 2 * j, first_pen + j) = penalty.lambda_l1;
        a_aug(n + 2 * j + 1, first_pen + j) = -penalty.lambda_l1;
    }

    // The augmented design always has full column rank for lambda > 0, so the
    // penalized problem is well posed even under collinearity.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a_aug);
    const Eigen::VectorXd beta0 = qr.solve(y_aug);
    const IpmResult res = ipm_pinball(a_aug, y_aug, problem.quantile, beta0);
    if (!res.converged) {
        throw NotConvergedError("solve_qr_l1: interior point method did not converge");
    }

    QrCoefficients out = pack(problem, res.beta, res, y_scale);
    // Undo the standardization.
    double shift = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        shift += out.weights[j] * means[j] / sds[j];
        out.weights[j] /= sds[j];
    }
    out.intercept -= shift;
    return out;
}

double smoothed_check_loss(double k, double h, double u) {
    const double z = u / h;
    return u * (k - stats::norm_cdf(-z)) + h * stats::norm_pdf(z);
}

double smoothed_check_gradient(double k, double h, double u) {
    return k - stats::norm_cdf(-u / h);
}

SmoothingBandwidth SmoothingBandwidth::fixed(double h) {
    if (!(h > 0.0)) throw ParamError("SmoothingBandwidth: h must be > 0");
    return SmoothingBandwidth{BandwidthRule::Fixed, h};
}

namespace {

double rule_of_thumb_bandwidth(const Eigen::VectorXd& residuals) {
    const double n = static_cast<double>(residuals.size());
    const double mean = residuals.mean();
    const double sigma = std::sqrt((residuals.array() - mean).square().mean());
    return std::max(0.05, sigma * std::pow(n, -0.2));
}

}  // namespace

double resolve_bandwidth(const QrProblem& problem, const SmoothingBandwidth& bw) {
    if (bw.rule == BandwidthRule::Fixed) {
        if (!(bw.h > 0.0)) throw ParamError("SmoothingBandwidth: h must be > 0");
        return bw.h;
    }
    const QrCoefficients exact = solve_qr(problem);
    const Eigen::MatrixXd a = build_design(problem);
    Eigen::VectorXd beta(a.cols());
    if (problem.include_intercept) {
        beta[0] = exact.intercept;
        beta.tail(exact.weights.size()) = exact.weights;
    } else {
        beta = exact.weights;
    }
    return rule_of_thumb_bandwidth(problem.y - a * beta);
}

QrCoefficients solve_qr_smoothed(const QrProblem& problem, const SmoothingBandwidth& bw) {
    validate_problem(problem);
    const Eigen::MatrixXd a = build_design(problem);
    const Eigen::Index n = a.rows();
    const Eigen::Index p = a.cols();
    const double tau = problem.quantile;

    // Exact fit: rank check, bandwidth residuals, and the Newton start.
    const QrCoefficients exact = solve_qr(problem);
    Eigen::VectorXd beta(p);
    if (problem.include_intercept) {
        beta[0] = exact.intercept;
        beta.tail(exact.weights.size()) = exact.weights;
    } else {
        beta = exact.weights;
    }

    double h = bw.h;
    if (bw.rule == BandwidthRule::RuleOfThumb) {
        h = rule_of_thumb_bandwidth(problem.y - a * beta);
    } else if (!(h > 0.0)) {
        throw ParamError("SmoothingBandwidth: h must be > 0");
    }

    // Work on y/y_scale with bandwidth h/y_scale; l_{k,h}(s u) = s l_{k,h/s}(u)
    // makes this exact, and it keeps tolerances scale-free.
    const double y_scale = std::max(1e-12, problem.y.cwiseAbs().maxCoeff());
    const Eigen::VectorXd y = problem.y / y_scale;
    const double hs = h / y_scale;
    beta /= y_scale;

    const double inv_n = 1.0 / static_cast<double>(n);
    auto objective = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd r = y - a * b;
        double f = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) f += smoothed_check_loss(tau, hs, r[i]);
        return f * inv_n;
    };

    double f = objective(beta);
    bool converged = false;
    int iter = 0;
    const int max_iter = 200;
    for (; iter < max_iter; ++iter) {
        const Eigen::VectorXd r = y - a * beta;
        Eigen::VectorXd psi(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            psi[i] = smoothed_check_gradient(tau, hs, r[i]);
            w[i] = stats::norm_pdf(r[i] / hs) / hs * inv_n;
        }
        const Eigen::VectorXd grad = -inv_n * (a.transpose() * psi);
        if (grad.cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + std::abs(f))) {
            converged = true;
            break;
        }

        Eigen::MatrixXd hess = a.transpose() * w.asDiagonal() * a;
        double nu = 0.0;
        Eigen::VectorXd step;
        for (int attempt = 0; attempt < 60; ++attempt) {
            Eigen::MatrixXd hd = hess;
            hd.diagonal().array() += nu + 1e-14;
            step = Eigen::LDLT<Eigen::MatrixXd>(hd).solve(-grad);
            if (step.allFinite() && grad.dot(step) < 0.0) break;
            nu = nu == 0.0 ? 1e-10 : nu * 10.0;
        }

        // Armijo backtracking; convexity guarantees descent along step.
        const double slope = grad.dot(step);
        double t = 1.0;
        bool moved = false;
        while (t >= 1e-14) {
            const double f_new = objective(beta + t * step);
            if (f_new <= f + 1e-4 * t * slope) {
                beta += t * step;
                f = f_new;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) {
            converged = grad.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + std::abs(f));
            break;
        }
    }
    if (!converged) {
        throw NotConvergedError("solve_qr_smoothed: Newton did not reach gradient tolerance");
    }

    QrCoefficients out;
    out.quantile = tau;
    if (problem.include_intercept) {
        out.intercept = beta[0] * y_scale;
        out.weights = beta.tail(p - 1) * y_scale;
    } else {
        out.intercept = 0.0;
        out.weights = beta * y_scale;
    }
    out.diagnostics.iterations = iter;
    out.diagnostics.converged = true;
    // Report the sum-form smoothed objective in original units.
    double total = 0.0;
    {
        Eigen::VectorXd b(p);
        if (problem.include_intercept) {
            b[0] = out.intercept;
            b.tail(out.weights.size()) = out.weights;
        } else {
            b = out.weights;
        }
        const Eigen::VectorXd r = problem.y - a * b;
        for (Eigen::Index i = 0; i < n; ++i) total += smoothed_check_loss(tau, h, r[i]);
    }
    out.diagnostics.objective = total;
    return out;
}

double predict_quantile(const QrCoefficients& coeffs, const Eigen::VectorXd& x_row) {
    if (x_row.size() != coeffs.weights.size()) {
        throw DimensionMismatchError("predict_quantile: row length != number of weights");
    }
    return coeffs.intercept + coeffs.weights.dot(x_row);
}

Eigen::VectorXd predict_quantile(const QrCoefficients& coeffs, const Eigen::MatrixXd& X) {
    if (X.cols() != coeffs.weights.size()) {
        throw DimensionMismatchError("predict_quantile: column count != number of weights");
    }
    return (X * coeffs.weights).array() + coeffs.intercept;
}

void to_json(nlohmann::json& j, const QrCoefficients& c) {
    j = nlohmann::json{{"intercept", c.intercept},
                       {"weights", std::vector<double>(c.weights.begin(), c.weights.end())},
                       {"quantile", c.quantile},
                       {"iterations", c.diagnostics.iterations},
                       {"objective", c.diagnostics.objective},
                       {"converged", c.diagnostics.converged}};
}

void from_json(const nlohmann::json& j, QrCoefficients& c) {
    c.intercept = j.at("intercept").get<double>();
    const auto w = j.at("weights").get<std::vector<double>>();
    c.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    c.quantile = j.at("quantile").get<double>();
    c.diagnostics.iterations = j.at("iterations").get<int>();
    c.diagnostics.objective = j.at("objective").get<double>();
    c.diagnostics.converged = j.at("converged").get<bool>();
}

}  // namespace qra
