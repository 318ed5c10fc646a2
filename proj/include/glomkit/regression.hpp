#pragma once

#include <string>
#include <vector>

#include "glomkit/types.hpp"

namespace glomkit::stats {

struct RankDeficient : ValidationError {
  using ValidationError::ValidationError;
};
struct SingleClass : ValidationError {
  using ValidationError::ValidationError;
};

struct RegressionTerm {
  std::string name;
  double coef = 0.0;
  double stderr_ = 0.0;
  double p = 0.0;
};

struct RegressionResult {
  std::string outcome;
  std::string model;  // "linear" | "logistic"
  std::vector<RegressionTerm> terms;
  double r_squared = 0.0;  // linear only
  int n = 0;
  bool converged = true;
  int iterations = 0;
};

/// Ordinary least squares via column-pivoted QR. `design` must include
/// the intercept column explicitly and have full column rank; otherwise
/// RankDeficient names the collinear columns. Standard errors from
/// sigma^2 (X'X)^-1, two-sided t p-values, centered R^2.
RegressionResult ols_regression(const MatrixXd& design, const VectorXd& y,
                                const std::vector<std::string>& names,
                                const std::string& outcome = {});

/// L2-penalized logistic regression by Newton/IRLS with step halving.
/// The penalty (default strength 1.0) applies to every non-intercept
/// term, where `intercept_col` indexes the unpenalized column (-1 for
/// none). Wald standard errors from the penalized Hessian. Convergence:
/// max-norm of the penalized gradient below `tol`.
RegressionResult logistic_regression_mv(const MatrixXd& design, const VectorXd& y,
                                        const std::vector<std::string>& names,
                                        const std::string& outcome = {},
                                        double l2 = 1.0, int intercept_col = 0,
                                        double tol = 1e-8, int max_iter = 200);

/// Fitted coefficients in design order (convenience for scoring).
VectorXd coefficients(const RegressionResult& r);

}  // namespace glomkit::stats
