#pragma once

#include <string>
#include <vector>

#include "glomkit/associate.hpp"
#include "glomkit/distill.hpp"
#include "glomkit/fewshot.hpp"
#include "glomkit/morphometry.hpp"
#include "glomkit/regression.hpp"

namespace glomkit::reports {

struct EmptyResults : ValidationError {
  using ValidationError::ValidationError;
};

/// Paper-table mirrors round to 4 decimals in CSV; the JSON companions
/// carry full precision. All writers emit canonical (sorted) ordering so
/// identical inputs produce byte-identical files.

struct CaseGlomerulusRow {
  std::string case_id;
  MorphometryRecord record;
};

std::string glomerulus_csv(const std::vector<CaseGlomerulusRow>& rows,
                           const std::string& length_unit);
std::string case_csv(std::vector<CaseFeatureVector> features);

std::string association_matrix_csv(const stats::AssociationRun& run,
                                   const std::string& variable);
std::string association_json(const stats::AssociationRun& run);
std::string exclusions_csv(const stats::JoinReport& join);

struct RegressionRow {
  std::string phenotype;
  stats::RegressionResult result;
};

/// One row per phenotype: R2 then coef/p per covariate, the phenotype
/// term tagged (P). `tags` maps covariate term names to the short column
/// tags; the intercept is omitted from the CSV mirror.
std::string regression_csv(const std::vector<RegressionRow>& rows,
                           const std::vector<std::pair<std::string, std::string>>& tags);
std::string regression_json(const std::vector<RegressionRow>& rows);

std::string fewshot_csv(const fewshot::ProtocolTable& table);
std::string fewshot_json(const fewshot::ProtocolTable& table);

struct MetricRow {
  std::string task;
  std::string metric;
  double value = 0.0;
};
std::string metrics_csv(const std::vector<MetricRow>& rows);

std::string distill_log_csv(const std::vector<distill::StepLog>& log);
std::string distill_summary_json(const distill::TrainResult& result);

struct AttentionRow {
  std::string id;
  stats::AttentionAlignment alignment;
};
std::string attention_csv(const std::vector<AttentionRow>& rows);
std::string attention_json(const std::vector<AttentionRow>& rows);

}  // namespace glomkit::reports
