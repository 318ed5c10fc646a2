#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glomkit/types.hpp"

namespace glomkit::metrics {

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct NoRelevantItems : ValidationError {
  using ValidationError::ValidationError;
};
struct SingleClass : ValidationError {
  using ValidationError::ValidationError;
};
struct NoPositives : ValidationError {
  using ValidationError::ValidationError;
};
struct ShapeMismatch : ValidationError {
  using ValidationError::ValidationError;
};

/// F1 = 2PR/(P+R); defined 0 when tp == 0. Throws when tp+fp+fn == 0.
double f1_score(const ConfusionCounts& c);

/// Probability a random positive outranks a random negative, ties
/// counted half (Mann-Whitney formulation over mid-ranks).
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Average precision: sum over recall steps of (R_k - R_{k-1}) * P_k in
/// descending score order with tied scores grouped.
double pr_auc(std::span<const double> scores, std::span<const int> labels);

/// |a AND b| / |a OR b| over equal-sized binary masks; 1 when both empty.
double iou(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

}  // namespace glomkit::metrics
