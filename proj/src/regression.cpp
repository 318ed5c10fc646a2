#include "glomkit/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>

#include "glomkit/special.hpp"

namespace glomkit::stats {

RegressionResult ols_regression(const MatrixXd& design, const VectorXd& y,
                                const std::vector<std::string>& names,
                                const std::string& outcome) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (y.size() != n) throw ValidationError("ols_regression: y length mismatch");
  if (names.size() != static_cast<std::size_t>(p))
    throw ValidationError("ols_regression: name count mismatch");
  if (n <= p) throw ValidationError("ols_regression: need n > p");

  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    const auto perm = qr.colsPermutation().indices();
    std::string cols;
    for (Eigen::Index i = qr.rank(); i < p; ++i) {
      if (!cols.empty()) cols += ", ";
      cols += names[static_cast<std::size_t>(perm[i])];
    }
    throw RankDeficient("ols_regression: design is rank deficient; collinear columns: " + cols);
  }

  const VectorXd beta = qr.solve(y);
  const VectorXd resid = y - design * beta;
  const double ssr = resid.squaredNorm();
  const double dof = static_cast<double>(n - p);
  const double sigma2 = ssr / dof;

  // (X'X)^-1 via the R factor: R^-1 R^-T permuted back.
  const MatrixXd r_factor =
      qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const MatrixXd r_inv =
      r_factor.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(p, p));
  const MatrixXd xtx_inv_permuted = r_inv * r_inv.transpose();
  const auto perm = qr.colsPermutation();
  const MatrixXd xtx_inv = perm * xtx_inv_permuted * perm.transpose();

  RegressionResult result;
  result.outcome = outcome;
  result.model = "linear";
  result.n = static_cast<int>(n);
  for (Eigen::Index j = 0; j < p; ++j) {
    RegressionTerm t;
    t.name = names[static_cast<std::size_t>(j)];
    t.coef = beta[j];
    t.stderr_ = std::sqrt(std::max(0.0, sigma2 * xtx_inv(j, j)));
    const double tval = t.stderr_ > 0.0 ? t.coef / t.stderr_ : 0.0;
    t.p = t.stderr_ > 0.0
              ? 2.0 * special::student_t_sf(std::fabs(tval), dof)
              : 1.0;
    result.terms.push_back(std::move(t));
  }

  const double mean_y = y.mean();
  const double sst = (y.array() - mean_y).matrix().squaredNorm();
  result.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  return result;
}

RegressionResult logistic_regression_mv(const MatrixXd& design, const VectorXd& y,
                                        const std::vector<std::string>& names,
                                        const std::string& outcome, double l2,
                                        int intercept_col, double tol,
                                        int max_iter) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (y.size() != n) throw ValidationError("logistic_regression_mv: y length mismatch");
  if (names.size() != static_cast<std::size_t>(p))
    throw ValidationError("logistic_regression_mv: name count mismatch");

  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] == 0.0) has0 = true;
    else if (y[i] == 1.0) has1 = true;
    else throw ValidationError("logistic_regression_mv: labels must be 0/1");
  }
  if (!has0 || !has1)
    throw SingleClass("logistic_regression_mv: only one class present");

  VectorXd penalty = VectorXd::Constant(p, l2);
  if (intercept_col >= 0 && intercept_col < p) penalty[intercept_col] = 0.0;

  auto objective = [&](const VectorXd& beta) {
    const VectorXd eta = design * beta;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // -log p(y | eta), numerically stable via log1p(exp(-|eta|)).
      const double e = eta[i];
      const double softplus = e > 0.0 ? e + std::log1p(std::exp(-e))
                                      : std::log1p(std::exp(e));
      nll += softplus - y[i] * e;
    }
    return nll + 0.5 * (penalty.array() * beta.array().square()).sum();
  };

  VectorXd beta = VectorXd::Zero(p);
  double obj = objective(beta);
  RegressionResult result;
  result.outcome = outcome;
  result.model = "logistic";
  result.n = static_cast<int>(n);
  result.converged = false;

  MatrixXd hessian(p, p);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const VectorXd eta = design * beta;
    const VectorXd mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    const VectorXd grad =
        design.transpose() * (y - mu) - (penalty.array() * beta.array()).matrix();
    if (grad.lpNorm<Eigen::Infinity>() < tol) {
      result.converged = true;
      break;
    }
    const VectorXd w = (mu.array() * (1.0 - mu.array())).matrix();
    hessian = design.transpose() * w.asDiagonal() * design;
    hessian.diagonal() += penalty;
    const VectorXd step = hessian.ldlt().solve(grad);

    // Step halving keeps the penalized deviance non-increasing.
    double scale = 1.0;
    VectorXd candidate = beta + step;
    double cand_obj = objective(candidate);
    while (!(cand_obj <= obj) && scale > 1e-8) {
      scale *= 0.5;
      candidate = beta + scale * step;
      cand_obj = objective(candidate);
    }
    beta = candidate;
    obj = cand_obj;
  }
  result.iterations = iter;

  // Wald covariance from the penalized observed information at the solution.
  const VectorXd eta = design * beta;
  const VectorXd mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
  const VectorXd w = (mu.array() * (1.0 - mu.array())).matrix();
  hessian = design.transpose() * w.asDiagonal() * design;
  hessian.diagonal() += penalty;
  const MatrixXd cov = hessian.ldlt().solve(MatrixXd::Identity(p, p));

  for (Eigen::Index j = 0; j < p; ++j) {
    RegressionTerm t;
    t.name = names[static_cast<std::size_t>(j)];
    t.coef = beta[j];
    t.stderr_ = std::sqrt(std::max(0.0, cov(j, j)));
    const double z = t.stderr_ > 0.0 ? t.coef / t.stderr_ : 0.0;
    t.p = t.stderr_ > 0.0 ? 2.0 * special::normal_sf(std::fabs(z)) : 1.0;
    result.terms.push_back(std::move(t));
  }
  return result;
}

VectorXd coefficients(const RegressionResult& r) {
  VectorXd beta(static_cast<Eigen::Index>(r.terms.size()));
  for (std::size_t i = 0; i < r.terms.size(); ++i) beta[static_cast<Eigen::Index>(i)] = r.terms[i].coef;
  return beta;
}

}  // namespace glomkit::stats
