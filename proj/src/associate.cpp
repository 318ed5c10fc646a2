#include "glomkit/associate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace glomkit {

void VariableSpec::validate(const std::string& name) const {
  if (labels.size() < 2)
    throw ValidationError("binning spec '" + name + "': need at least 2 groups");
  if (kind == Kind::Thresholded) {
    if (thresholds.size() + 1 != labels.size())
      throw ValidationError("binning spec '" + name +
                            "': thresholds/labels count mismatch");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
      if (!(thresholds[i - 1] < thresholds[i]))
        throw ValidationError("binning spec '" + name +
                              "': thresholds not strictly increasing");
  }
}

const VariableSpec* BinningSpec::find(const std::string& name) const {
  for (const auto& [n, v] : variables)
    if (n == name) return &v;
  return nullptr;
}

std::vector<std::string> BinningSpec::variable_names() const {
  std::vector<std::string> names;
  names.reserve(variables.size());
  for (const auto& [n, v] : variables) names.push_back(n);
  return names;
}

std::string bin_variable(const ClinicalValue& value, const std::string& variable,
                         const BinningSpec& spec) {
  const VariableSpec* vs = spec.find(variable);
  if (!vs) throw ValidationError("bin_variable: unknown variable " + variable);
  if (value.is_missing())
    throw ValidationError("bin_variable: missing value for " + variable);

  if (vs->kind == VariableSpec::Kind::Categorical) {
    std::string cat = value.kind == ClinicalValue::Kind::Categorical
                          ? value.category
                          : std::to_string(value.number);
    if (auto it = vs->aliases.find(cat); it != vs->aliases.end()) cat = it->second;
    if (std::find(vs->labels.begin(), vs->labels.end(), cat) == vs->labels.end())
      throw OutOfDomain("bin_variable: value '" + cat + "' not a declared " +
                        variable + " category");
    return cat;
  }

  if (value.kind != ClinicalValue::Kind::Numeric)
    throw ValidationError("bin_variable: " + variable + " expects a number");
  std::size_t idx = 0;
  for (double t : vs->thresholds) {
    const bool above = vs->boundary == VariableSpec::Boundary::Above
                           ? value.number >= t
                           : value.number > t;
    if (above) ++idx;
    else break;
  }
  return vs->labels[idx];
}

BinningSpec default_binning_xj_light1() {
  BinningSpec spec;
  VariableSpec gender;
  gender.kind = VariableSpec::Kind::Categorical;
  gender.labels = {"Male", "Female"};
  gender.aliases = {{"M", "Male"}, {"F", "Female"}, {"male", "Male"},
                    {"female", "Female"}, {"m", "Male"}, {"f", "Female"}};
  spec.variables.emplace_back("Gender", gender);

  VariableSpec age;
  age.kind = VariableSpec::Kind::Thresholded;
  age.thresholds = {43.0};
  age.labels = {"≤43", ">43"};
  age.boundary = VariableSpec::Boundary::Below;  // 43 belongs to "≤43"
  spec.variables.emplace_back("Age", age);

  VariableSpec creatinine;
  creatinine.kind = VariableSpec::Kind::Thresholded;
  creatinine.thresholds = {59.0};
  creatinine.labels = {"≤59", ">59"};
  creatinine.boundary = VariableSpec::Boundary::Below;
  spec.variables.emplace_back("Creatinine", creatinine);

  VariableSpec iga;
  iga.kind = VariableSpec::Kind::Categorical;
  iga.labels = {"non-IgA", "IgA"};
  spec.variables.emplace_back("IgA", iga);

  VariableSpec lee;
  lee.kind = VariableSpec::Kind::Categorical;
  lee.labels = {"II", "III", "IV"};
  spec.variables.emplace_back("IgA Lee Score", lee);

  VariableSpec disease;
  disease.kind = VariableSpec::Kind::Categorical;
  disease.labels = {"IgAN", "LN", "MN", "DN", "MCD"};
  spec.variables.emplace_back("Disease", disease);

  VariableSpec lesion;
  lesion.kind = VariableSpec::Kind::Categorical;
  lesion.labels = {"0-Mild", "1-Moderate", "2-Severe"};
  spec.variables.emplace_back("Lesion", lesion);
  return spec;
}

BinningSpec default_binning_kpmp_g() {
  BinningSpec spec;
  VariableSpec enrollment;
  enrollment.kind = VariableSpec::Kind::Categorical;
  enrollment.labels = {"CKD", "AKI", "DM-R"};
  spec.variables.emplace_back("Enrollment Category", enrollment);

  VariableSpec gender;
  gender.kind = VariableSpec::Kind::Categorical;
  gender.labels = {"Male", "Female"};
  gender.aliases = {{"M", "Male"}, {"F", "Female"}};
  spec.variables.emplace_back("Gender", gender);

  VariableSpec age;
  age.kind = VariableSpec::Kind::Thresholded;
  age.thresholds = {30, 40, 50, 60, 70};
  age.labels = {"<30", "30-39", "40-49", "50-59", "60-69", "≥70"};
  spec.variables.emplace_back("Age", age);

  VariableSpec proteinuria;
  proteinuria.kind = VariableSpec::Kind::Thresholded;
  proteinuria.thresholds = {150, 500, 1000};
  proteinuria.labels = {"<150", "150-500", "500-1000", "≥1000"};
  spec.variables.emplace_back("Proteinuria", proteinuria);

  VariableSpec a1c;
  a1c.kind = VariableSpec::Kind::Thresholded;
  a1c.thresholds = {6.5, 7.5, 8.5};
  a1c.labels = {"<6.5", "6.5-7.5", "7.5-8.5", "≥8.5"};
  spec.variables.emplace_back("A1c", a1c);

  VariableSpec albuminuria;
  albuminuria.kind = VariableSpec::Kind::Thresholded;
  albuminuria.thresholds = {300};
  albuminuria.labels = {"<300", "≥300"};
  spec.variables.emplace_back("Albuminuria", albuminuria);

  VariableSpec diabetes;
  diabetes.kind = VariableSpec::Kind::Categorical;
  diabetes.labels = {"Yes", "No"};
  spec.variables.emplace_back("Diabetes History", diabetes);

  VariableSpec hypertension;
  hypertension.kind = VariableSpec::Kind::Categorical;
  hypertension.labels = {"Yes", "No"};
  spec.variables.emplace_back("Hypertension History", hypertension);

  VariableSpec egfr;
  egfr.kind = VariableSpec::Kind::Thresholded;
  egfr.thresholds = {50, 100};
  egfr.labels = {"<50", "50-100", ">100"};
  spec.variables.emplace_back("eGFR", egfr);
  return spec;
}

}  // namespace glomkit

namespace glomkit::stats {

AssociationRun associate(const std::vector<CaseFeatureVector>& features,
                         const std::vector<ClinicalRecord>& clinical,
                         const BinningSpec& spec,
                         const std::vector<std::string>& variables) {
  for (const auto& [name, vs] : spec.variables) vs.validate(name);
  std::vector<std::string> vars =
      variables.empty() ? spec.variable_names() : variables;
  for (const std::string& v : vars)
    if (!spec.find(v))
      throw ValidationError("associate: variable '" + v + "' not in binning spec");

  std::map<std::string, const CaseFeatureVector*> by_case;
  for (const CaseFeatureVector& f : features) {
    if (by_case.count(f.case_id))
      throw ValidationError("associate: duplicate case id " + f.case_id);
    by_case[f.case_id] = &f;
  }
  std::map<std::string, const ClinicalRecord*> clin_by_case;
  for (const ClinicalRecord& r : clinical) {
    if (clin_by_case.count(r.case_id))
      throw ValidationError("associate: duplicate clinical case id " + r.case_id);
    clin_by_case[r.case_id] = &r;
  }

  AssociationRun run;
  for (const auto& [id, f] : by_case)
    if (!clin_by_case.count(id)) run.join.feature_only.push_back(id);
  for (const auto& [id, r] : clin_by_case)
    if (!by_case.count(id)) run.join.clinical_only.push_back(id);

  std::vector<std::pair<const CaseFeatureVector*, const ClinicalRecord*>> joined;
  for (const auto& [id, f] : by_case) {
    auto it = clin_by_case.find(id);
    if (it != clin_by_case.end()) joined.emplace_back(f, it->second);
  }
  run.join.used_cases = static_cast<int>(joined.size());

  const auto& feature_names = case_feature_names();
  for (const std::string& var : vars) {
    const VariableSpec* vs = spec.find(var);
    // Pairwise deletion: cases with a usable value for this variable.
    std::map<std::string, std::vector<const CaseFeatureVector*>> groups;
    int missing = 0;
    for (const auto& [f, r] : joined) {
      auto it = r->values.find(var);
      if (it == r->values.end() || it->second.is_missing()) {
        ++missing;
        continue;
      }
      groups[bin_variable(it->second, var, spec)].push_back(f);
    }
    run.join.missing_by_variable.emplace_back(var, missing);

    // Canonical group order: spec label order, empty groups dropped.
    std::vector<std::pair<std::string, std::vector<const CaseFeatureVector*>>>
        ordered;
    for (const std::string& label : vs->labels) {
      auto it = groups.find(label);
      if (it != groups.end()) ordered.emplace_back(label, it->second);
    }

    for (int fi = 0; fi < kCaseFeatureCount; ++fi) {
      AssociationResult res;
      res.phenotype = feature_names[static_cast<std::size_t>(fi)];
      res.variable = var;
      std::size_t smallest = ordered.empty() ? 0 : SIZE_MAX;
      for (const auto& [label, members] : ordered) {
        res.group_sizes.emplace_back(label, static_cast<int>(members.size()));
        smallest = std::min(smallest, members.size());
      }
      if (ordered.size() < 2) {
        res.flagged = true;
        res.note = "fewer than 2 non-empty groups";
        res.p = std::numeric_limits<double>::quiet_NaN();
        res.statistic = res.effect = std::numeric_limits<double>::quiet_NaN();
        run.results.push_back(std::move(res));
        continue;
      }
      if (smallest < 3) {
        res.flagged = true;
        res.note = "group below 3 cases";
      }

      std::vector<Sample> samples;
      for (const auto& [label, members] : ordered) {
        Sample s;
        s.group = label;
        for (const CaseFeatureVector* f : members) s.values.push_back((*f)[fi]);
        samples.push_back(std::move(s));
      }
      if (samples.size() == 2) {
        const KsResult ks = ks_two_sample(samples[0].values, samples[1].values);
        res.test = TestKind::KS;
        res.statistic = ks.d;
        res.effect = ks.d;
        res.p = ks.p;
      } else {
        const KruskalWallisResult kw = kruskal_wallis(samples);
        res.test = TestKind::KW;
        res.statistic = kw.h;
        res.effect = kw.eps2;
        res.p = kw.p;
        res.dunn = dunn_posthoc(samples);
      }
      res.stars = significance_stars(res.p);
      run.results.push_back(std::move(res));
    }
  }
  return run;
}

AttentionAlignment attention_alignment(const MatrixXd& attention,
                                       const std::vector<Box>& boxes) {
  const int h = static_cast<int>(attention.rows());
  const int w = static_cast<int>(attention.cols());
  for (const Box& b : boxes) {
    if (b.x < 0 || b.y < 0 || b.width <= 0 || b.height <= 0 ||
        b.x + b.width > w || b.y + b.height > h)
      throw ValidationError("attention_alignment: box outside the grid");
  }
  std::vector<std::uint8_t> in_box(static_cast<std::size_t>(h) * w, 0);
  for (const Box& b : boxes)
    for (int y = b.y; y < b.y + b.height; ++y)
      for (int x = b.x; x < b.x + b.width; ++x)
        in_box[static_cast<std::size_t>(y) * w + x] = 1;

  std::vector<double> inside, outside;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = attention(y, x);
      if (in_box[static_cast<std::size_t>(y) * w + x]) inside.push_back(v);
      else outside.push_back(v);
    }
  if (inside.empty() || outside.empty())
    throw EmptyRegion("attention_alignment: need pixels on both sides of the boxes");

  AttentionAlignment a;
  a.n_in = inside.size();
  a.n_out = outside.size();
  for (double v : inside) a.mean_in += v;
  for (double v : outside) a.mean_out += v;
  a.mean_in /= static_cast<double>(inside.size());
  a.mean_out /= static_cast<double>(outside.size());
  const KsResult ks = ks_two_sample(inside, outside);
  a.d = ks.d;
  a.p = ks.p;
  return a;
}

}  // namespace glomkit::stats
