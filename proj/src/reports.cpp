#include "glomkit/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "glomkit/io.hpp"

namespace glomkit::reports {

using nlohmann::ordered_json;

namespace {

std::string fmt(const char* spec, double v) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string f4(double v) { return fmt("%.4f", v); }
std::string f9(double v) { return fmt("%.9g", v); }
std::string f17(double v) { return fmt("%.17g", v); }

ordered_json json_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::string test_name(stats::TestKind t) {
  return t == stats::TestKind::KS ? "KS" : "KW";
}

}  // namespace

std::string glomerulus_csv(const std::vector<CaseGlomerulusRow>& rows,
                           const std::string& length_unit) {
  if (rows.empty()) throw EmptyResults("glomerulus_csv: no records");
  std::vector<CaseGlomerulusRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const CaseGlomerulusRow& a, const CaseGlomerulusRow& b) {
              return std::tie(a.case_id, a.record.id) <
                     std::tie(b.case_id, b.record.id);
            });

  std::string out = "# length_unit: " + length_unit + "\n";
  out +=
      "case_id,glomerulus_id,S_bow,P_bow,a_bow,b_bow,Cir_bow,Ecc_bow,"
      "S_tuft,P_tuft,a_tuft,b_tuft,Cir_tuft,Ecc_tuft,R,flags\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const CaseGlomerulusRow& row : sorted) {
    const MorphometryRecord& r = row.record;
    auto emit = [&](const std::optional<ShapeParams>& s) {
      if (!s) {
        for (int i = 0; i < 6; ++i) out += ",-";
        return;
      }
      out += "," + f9(s->area) + "," + f9(s->perimeter) + "," + f9(s->major_axis) +
             "," + f9(s->minor_axis) + "," + f9(s->circularity) + "," +
             f9(s->eccentricity);
    };
    out += io::csv_escape(row.case_id) + "," + io::csv_escape(r.id);
    emit(r.bow);
    emit(r.tuft);
    out += "," + f9(r.complete() ? r.ratio : nan);
    std::string flags;
    if (!r.bow) flags += "bow_missing;";
    else if (r.bow->degenerate) flags += "bow_degenerate;";
    if (!r.tuft) flags += "tuft_missing;";
    else if (r.tuft->degenerate) flags += "tuft_degenerate;";
    if (flags.empty()) flags = "ok";
    else flags.pop_back();
    out += "," + flags + "\n";
  }
  return out;
}

std::string case_csv(std::vector<CaseFeatureVector> features) {
  if (features.empty()) throw EmptyResults("case_csv: no cases");
  std::sort(features.begin(), features.end(),
            [](const CaseFeatureVector& a, const CaseFeatureVector& b) {
              return a.case_id < b.case_id;
            });
  std::string out = "case_id,n_glomeruli";
  for (const std::string& name : case_feature_names()) out += "," + name;
  out += "\n";
  for (const CaseFeatureVector& f : features) {
    out += io::csv_escape(f.case_id) + "," + std::to_string(f.n_glomeruli);
    for (double v : f.values) out += "," + f9(v);
    out += "\n";
  }
  return out;
}

std::string association_matrix_csv(const stats::AssociationRun& run,
                                   const std::string& variable) {
  std::vector<const stats::AssociationResult*> rows;
  for (const auto& r : run.results)
    if (r.variable == variable) rows.push_back(&r);
  if (rows.empty())
    throw EmptyResults("association_matrix_csv: no results for " + variable);

  const bool ks = rows.front()->test == stats::TestKind::KS;
  std::string out = "Pathology Phenotype,";
  out += ks ? "p (D)" : "p (eps2)";
  out += ",stars,n\n";
  for (const auto* r : rows) {
    std::string n;
    for (const auto& [label, count] : r->group_sizes) {
      if (!n.empty()) n += "/";
      n += std::to_string(count);
    }
    out += io::csv_escape(r->phenotype) + "," +
           (r->flagged && std::isnan(r->p)
                ? "-"
                : f4(r->p) + " (" + f4(r->effect) + ")") +
           "," + stats::to_string(r->stars) + "," + n + "\n";
  }
  return out;
}

std::string association_json(const stats::AssociationRun& run) {
  if (run.results.empty()) throw EmptyResults("association_json: no results");
  ordered_json j;
  j["results"] = ordered_json::array();
  for (const auto& r : run.results) {
    ordered_json e;
    e["phenotype"] = r.phenotype;
    e["variable"] = r.variable;
    e["test"] = test_name(r.test);
    e["statistic"] = json_or_null(r.statistic);
    e["p"] = json_or_null(r.p);
    e["effect_size"] = json_or_null(r.effect);
    e["stars"] = stats::to_string(r.stars);
    e["flagged"] = r.flagged;
    if (!r.note.empty()) e["note"] = r.note;
    ordered_json sizes = ordered_json::object();
    for (const auto& [label, count] : r.group_sizes) sizes[label] = count;
    e["group_sizes"] = std::move(sizes);
    if (r.dunn) {
      ordered_json dunn = ordered_json::array();
      for (Eigen::Index a = 0; a < r.dunn->p_adjusted.rows(); ++a) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index b = 0; b < r.dunn->p_adjusted.cols(); ++b)
          row.push_back(r.dunn->p_adjusted(a, b));
        dunn.push_back(std::move(row));
      }
      e["dunn_adjusted_p"] = std::move(dunn);
    }
    j["results"].push_back(std::move(e));
  }
  ordered_json join;
  join["used_cases"] = run.join.used_cases;
  join["feature_only"] = run.join.feature_only;
  join["clinical_only"] = run.join.clinical_only;
  ordered_json missing = ordered_json::object();
  for (const auto& [var, count] : run.join.missing_by_variable)
    missing[var] = count;
  join["missing_by_variable"] = std::move(missing);
  j["join"] = std::move(join);
  return j.dump(2) + "\n";
}

std::string exclusions_csv(const stats::JoinReport& join) {
  std::string out = "kind,case_id\n";
  out += "used_count," + std::to_string(join.used_cases) + "\n";
  for (const auto& id : join.feature_only)
    out += "feature_only," + io::csv_escape(id) + "\n";
  for (const auto& id : join.clinical_only)
    out += "clinical_only," + io::csv_escape(id) + "\n";
  return out;
}

std::string regression_csv(
    const std::vector<RegressionRow>& rows,
    const std::vector<std::pair<std::string, std::string>>& tags) {
  if (rows.empty()) throw EmptyResults("regression_csv: no rows");
  std::string out = "Pathology Phenotype,R2";
  for (const auto& [term, tag] : tags) out += ",coef (" + tag + "),p (" + tag + ")";
  out += ",coef (P),p (P)\n";
  for (const RegressionRow& row : rows) {
    out += io::csv_escape(row.phenotype) + "," + f4(row.result.r_squared);
    auto term_of = [&](const std::string& name) -> const stats::RegressionTerm* {
      for (const auto& t : row.result.terms)
        if (t.name == name) return &t;
      return nullptr;
    };
    for (const auto& [term, tag] : tags) {
      const auto* t = term_of(term);
      out += t ? "," + f4(t->coef) + "," + f4(t->p) : ",-,-";
    }
    const auto* t = term_of(row.phenotype);
    out += t ? "," + f4(t->coef) + "," + f4(t->p) : ",-,-";
    out += "\n";
  }
  return out;
}

std::string regression_json(const std::vector<RegressionRow>& rows) {
  if (rows.empty()) throw EmptyResults("regression_json: no rows");
  ordered_json j = ordered_json::array();
  for (const RegressionRow& row : rows) {
    ordered_json e;
    e["phenotype"] = row.phenotype;
    e["outcome"] = row.result.outcome;
    e["model"] = row.result.model;
    e["n"] = row.result.n;
    e["converged"] = row.result.converged;
    if (row.result.model == "linear") e["R2"] = row.result.r_squared;
    ordered_json terms = ordered_json::array();
    for (const auto& t : row.result.terms) {
      ordered_json tj;
      tj["name"] = t.name;
      tj["coef"] = t.coef;
      tj["stderr"] = t.stderr_;
      tj["p"] = t.p;
      terms.push_back(std::move(tj));
    }
    e["terms"] = std::move(terms);
    j.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::string fewshot_csv(const fewshot::ProtocolTable& table) {
  if (table.cells.empty()) throw EmptyResults("fewshot_csv: empty table");
  std::string out = "Method";
  for (int k : table.ks) out += ",k=" + std::to_string(k);
  out += "\n";
  for (fewshot::Classifier c : table.classifiers) {
    out += fewshot::to_string(c);
    for (int k : table.ks) out += "," + f4(table.cell(c, k).mean_auc);
    out += "\n";
  }
  return out;
}

std::string fewshot_json(const fewshot::ProtocolTable& table) {
  if (table.cells.empty()) throw EmptyResults("fewshot_json: empty table");
  ordered_json j;
  j["master_seed"] = table.master_seed;
  j["repeats"] = table.repeats;
  j["cells"] = ordered_json::array();
  for (const auto& cell : table.cells) {
    ordered_json e;
    e["classifier"] = fewshot::to_string(cell.classifier);
    e["k"] = cell.k;
    e["mean_auc"] = json_or_null(cell.mean_auc);
    e["std_auc"] = json_or_null(cell.std_auc);
    ordered_json runs = ordered_json::array();
    for (double a : cell.run_aucs) runs.push_back(json_or_null(a));
    e["run_aucs"] = std::move(runs);
    e["failed"] = cell.failed;
    if (!cell.note.empty()) e["note"] = cell.note;
    j["cells"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  if (rows.empty()) throw EmptyResults("metrics_csv: no rows");
  std::vector<MetricRow> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MetricRow& a, const MetricRow& b) {
                     return a.task < b.task;
                   });
  std::string out = "task,metric,value\n";
  for (const MetricRow& r : sorted)
    out += io::csv_escape(r.task) + "," + r.metric + "," + fmt("%.6f", r.value) + "\n";
  return out;
}

std::string distill_log_csv(const std::vector<distill::StepLog>& log) {
  std::string out = "step,loss,embedding_std,teacher_entropy\n";
  for (const auto& e : log)
    out += std::to_string(e.step) + "," + f17(e.loss) + "," +
           f17(e.embedding_std) + "," + f17(e.teacher_entropy) + "\n";
  return out;
}

std::string distill_summary_json(const distill::TrainResult& result) {
  ordered_json j;
  j["steps"] = result.state.step;
  j["student_temp"] = result.state.student_temp;
  j["teacher_temp"] = result.state.teacher_temp;
  j["ema_momentum"] = result.state.ema_momentum;
  if (!result.log.empty()) {
    j["final_loss"] = result.log.back().loss;
    j["final_embedding_std"] = result.log.back().embedding_std;
    j["final_teacher_entropy"] = result.log.back().teacher_entropy;
  }
  const auto collapse = distill::collapse_metric(result.final_embeddings);
  ordered_json per_dim = ordered_json::array();
  for (Eigen::Index i = 0; i < collapse.per_dim_std.size(); ++i)
    per_dim.push_back(collapse.per_dim_std[i]);
  j["embedding_per_dim_std"] = std::move(per_dim);
  ordered_json center = ordered_json::array();
  for (Eigen::Index i = 0; i < result.state.center.size(); ++i)
    center.push_back(result.state.center[i]);
  j["center"] = std::move(center);
  j["student_param_norm"] = result.state.student.norm();
  j["teacher_param_norm"] = result.state.teacher.norm();
  return j.dump(2) + "\n";
}

std::string attention_csv(const std::vector<AttentionRow>& rows) {
  if (rows.empty()) throw EmptyResults("attention_csv: no rows");
  std::vector<AttentionRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const AttentionRow& a, const AttentionRow& b) { return a.id < b.id; });
  std::string out = "id,mean_in,mean_out,D,p\n";
  for (const AttentionRow& r : sorted)
    out += io::csv_escape(r.id) + "," + f4(r.alignment.mean_in) + "," +
           f4(r.alignment.mean_out) + "," + f4(r.alignment.d) + "," +
           f4(r.alignment.p) + "\n";
  return out;
}

std::string attention_json(const std::vector<AttentionRow>& rows) {
  if (rows.empty()) throw EmptyResults("attention_json: no rows");
  std::vector<AttentionRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const AttentionRow& a, const AttentionRow& b) { return a.id < b.id; });
  ordered_json j = ordered_json::array();
  for (const AttentionRow& r : sorted) {
    ordered_json e;
    e["id"] = r.id;
    e["mean_in"] = r.alignment.mean_in;
    e["mean_out"] = r.alignment.mean_out;
    e["D"] = r.alignment.d;
    e["p"] = r.alignment.p;
    e["n_in"] = r.alignment.n_in;
    e["n_out"] = r.alignment.n_out;
    j.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace glomkit::reports
