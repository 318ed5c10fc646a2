#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glomkit/clinical.hpp"
#include "glomkit/morphometry.hpp"
#include "glomkit/stats.hpp"

namespace glomkit::stats {

struct GroupTooSmall : ValidationError {
  using ValidationError::ValidationError;
};
struct EmptyRegion : ValidationError {
  using ValidationError::ValidationError;
};

enum class TestKind { KS, KW };

/// One (phenotype feature, clinical variable) association.
struct AssociationResult {
  std::string phenotype;
  std::string variable;
  TestKind test = TestKind::KS;
  double statistic = 0.0;  // D or H
  double p = 1.0;
  double effect = 0.0;  // D for KS, epsilon^2 for KW
  Stars stars = Stars::ns;
  std::vector<std::pair<std::string, int>> group_sizes;
  bool flagged = false;  // some group below 3 cases, or untestable
  std::string note;
  std::optional<DunnResult> dunn;  // post-hoc matrix for KW runs
};

/// Join bookkeeping: cases used plus everything excluded and why.
struct JoinReport {
  std::vector<std::string> feature_only;   // cases lacking clinical data
  std::vector<std::string> clinical_only;  // cases lacking features
  int used_cases = 0;
  std::vector<std::pair<std::string, int>> missing_by_variable;
};

struct AssociationRun {
  std::vector<AssociationResult> results;  // canonical (variable, feature) order
  JoinReport join;
};

/// Association matrix over the 14 case features and the requested
/// clinical variables (all spec variables when empty). Two groups run a
/// KS test, three or more run KW with Dunn post-hoc; missing values are
/// excluded pairwise per variable.
AssociationRun associate(const std::vector<CaseFeatureVector>& features,
                         const std::vector<ClinicalRecord>& clinical,
                         const BinningSpec& spec,
                         const std::vector<std::string>& variables = {});

struct AttentionAlignment {
  double mean_in = 0.0;
  double mean_out = 0.0;
  double d = 0.0;
  double p = 1.0;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
};

struct Box {
  int x = 0, y = 0, width = 0, height = 0;
};

/// Split the attention grid into in-box and out-of-box pixel sets and
/// compare the two distributions with the KS test.
AttentionAlignment attention_alignment(const MatrixXd& attention,
                                       const std::vector<Box>& boxes);

}  // namespace glomkit::stats
