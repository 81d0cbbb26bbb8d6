#pragma once

namespace qra::stats {

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF, computed via erfc for accuracy in the tails.
double norm_cdf(double x);

/// Standard normal quantile (inverse CDF). Wichura's AS241 PPND16 rational
/// approximation, |error| < 1e-15 on (0, 1). Throws DomainError outside (0, 1).
double norm_ppf(double p);

/// Regularized lower incomplete gamma P(a, x), series/continued-fraction form.
double lower_regularized_gamma(double a, double x);

/// Chi-square CDF with `dof` degrees of freedom.
double chi2_cdf(double x, int dof);

/// Chi-square quantile: smallest x with CDF(x) >= prob.
double chi2_quantile(double prob, int dof);

}  // namespace qra::stats
