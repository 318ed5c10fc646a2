#pragma once

#include <span>
#include <string>
#include <vector>

#include "glomkit/types.hpp"

namespace glomkit::stats {

struct Sample {
  std::vector<double> values;
  std::string group;
};

struct SampleTooSmall : ValidationError {
  using ValidationError::ValidationError;
};
struct ConstantSample : ValidationError {
  using ValidationError::ValidationError;
};
struct EmptySample : ValidationError {
  using ValidationError::ValidationError;
};
struct FewerThanThreeGroups : ValidationError {
  using ValidationError::ValidationError;
};

struct ShapiroWilkResult {
  double w = 0.0;
  double p = 0.0;
};

/// Shapiro-Wilk normality test, Royston's AS R94 approximation.
/// Requires 3 <= n <= 5000 and a non-constant sample.
ShapiroWilkResult shapiro_wilk(std::span<const double> x);

struct KsResult {
  double d = 0.0;
  double p = 0.0;
};

/// Two-sample Kolmogorov-Smirnov test. D is the exact sup-gap between the
/// right-continuous ECDFs over the pooled support; p comes from the
/// asymptotic Kolmogorov distribution at sqrt(n_x*n_y/(n_x+n_y)) * D.
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

struct KruskalWallisResult {
  double h = 0.0;
  double p = 0.0;
  double eps2 = 0.0;  // rank epsilon-squared, H / (N - 1)
};

/// Kruskal-Wallis H with mid-rank tie correction; p from chi-squared with
/// k-1 dof. An all-equal pooled sample is the defined limit H=0, p=1.
KruskalWallisResult kruskal_wallis(const std::vector<Sample>& groups);

struct DunnResult {
  MatrixXd z;           // pairwise z statistics
  MatrixXd p_raw;       // two-sided unadjusted p
  MatrixXd p_adjusted;  // Bonferroni over the k(k-1)/2 pairs, clamped to 1
};

/// Dunn's post-hoc test after Kruskal-Wallis, Bonferroni-adjusted.
/// Requires at least three groups.
DunnResult dunn_posthoc(const std::vector<Sample>& groups);

enum class Stars { ns, one, two, three };

/// *** below 0.001, ** below 0.01, * below 0.05, boundaries exclusive.
Stars significance_stars(double p);
std::string to_string(Stars s);

/// Mid-ranks of the pooled vector (1-based, ties averaged).
std::vector<double> mid_ranks(std::span<const double> pooled);

}  // namespace glomkit::stats
