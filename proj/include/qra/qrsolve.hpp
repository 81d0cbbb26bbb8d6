#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "qra/errors.hpp"

namespace qra {

/// One quantile-regression instance: minimize sum_i rho_k(y_i - x_i beta).
struct QrProblem {
    Eigen::MatrixXd X;  // n x m regressors (intercept handled separately)
    Eigen::VectorXd y;  // n responses
    double quantile = 0.5;
    bool include_intercept = true;
};

struct SolverDiagnostics {
    int iterations = 0;
    double objective = 0.0;  // >= 0; for L1 solves includes the penalty term
    bool converged = false;
};

struct QrCoefficients {
    double intercept = 0.0;  // 0 when disabled
    Eigen::VectorXd weights;
    double quantile = 0.5;
    SolverDiagnostics diagnostics;
};

struct L1Penalty {
    double lambda_l1 = 0.0;
    bool penalize_intercept = false;
    /// Standardize regressor columns internally before penalizing; fitted
    /// coefficients are reported in the original coordinates either way.
    bool standardize = true;
};

enum class BandwidthRule { Fixed, RuleOfThumb };

/// Bandwidth of the Gaussian smoothing kernel for the smoothed solver.
/// RuleOfThumb resolves to max(0.05, sigma_resid * n^(-1/5)) with sigma_resid
/// taken from a preliminary exact fit.
struct SmoothingBandwidth {
    BandwidthRule rule = BandwidthRule::RuleOfThumb;
    double h = 0.0;  // used when rule == Fixed; must be > 0

    static SmoothingBandwidth fixed(double h);
    static SmoothingBandwidth rule_of_thumb() { return SmoothingBandwidth{}; }
};

/// Exact pinball-loss minimization via a deterministic primal-dual interior
/// point method (Mehrotra predictor-corrector on the quantile-regression LP).
/// Converges to duality gap <= 1e-8 * (1 + |objective|); among flat optima a
/// 1e-10 ridge on the per-iteration normal matrix biases toward the
/// minimum-norm solution.
QrCoefficients solve_qr(const QrProblem& problem);

/// L1-penalized pinball minimization: objective + lambda * sum_j |beta_j|
/// (intercept unpenalized by default). Reduced to the exact LP kernel by
/// adding two pseudo-rows (+/- lambda e_j, y = 0) per penalized coefficient.
QrCoefficients solve_qr_l1(const QrProblem& problem, const L1Penalty& penalty);

/// Convolution-smoothed pinball minimization: sum_i l_{k,h}(y_i - x_i beta)
/// with l_{k,h}(u) = u (k - Phi(-u/h)) + h phi(u/h). Smooth and convex;
/// solved by damped Newton started from the exact fit.
QrCoefficients solve_qr_smoothed(const QrProblem& problem, const SmoothingBandwidth& bw);

double predict_quantile(const QrCoefficients& coeffs, const Eigen::VectorXd& x_row);
Eigen::VectorXd predict_quantile(const QrCoefficients& coeffs, const Eigen::MatrixXd& X);

/// The smoothed check function l_{k,h} and its derivative in u.
double smoothed_check_loss(double k, double h, double u);
double smoothed_check_gradient(double k, double h, double u);

/// Resolved bandwidth for a problem (RuleOfThumb runs the preliminary fit).
double resolve_bandwidth(const QrProblem& problem, const SmoothingBandwidth& bw);

void to_json(nlohmann::json& j, const QrCoefficients& c);
void from_json(const nlohmann::json& j, QrCoefficients& c);

}  // namespace qra
