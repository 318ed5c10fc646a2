#pragma once

// Distribution functions backing the statistical tests. Classic
// series/continued-fraction evaluations, accurate to ~1e-12 over the
// ranges the tests use.

namespace glomkit::special {

double normal_cdf(double z);
double normal_sf(double z);

/// Inverse standard normal CDF (Wichura's AS 241, ~1e-15).
double normal_ppf(double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Survival function of the chi-squared distribution with k dof.
double chi2_sf(double x, double k);

/// Regularized incomplete beta I_x(a, b).
double incbeta(double a, double b, double x);

/// Two-sided-ready survival function of Student's t with v dof.
double student_t_sf(double t, double v);

/// Survival function of the Kolmogorov distribution,
/// Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2),
/// truncated when |term| < 1e-12.
double kolmogorov_q(double lambda);

}  // namespace glomkit::special
