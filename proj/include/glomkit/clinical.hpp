#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "glomkit/types.hpp"

namespace glomkit {

struct OutOfDomain : ValidationError {
  using ValidationError::ValidationError;
};

/// One clinical cell: a number, a category string, or missing.
struct ClinicalValue {
  enum class Kind { Missing, Numeric, Categorical };
  Kind kind = Kind::Missing;
  double number = 0.0;
  std::string category;

  static ClinicalValue missing() { return {}; }
  static ClinicalValue numeric(double v) {
    return {Kind::Numeric, v, {}};
  }
  static ClinicalValue categorical(std::string v) {
    return {Kind::Categorical, 0.0, std::move(v)};
  }
  bool is_missing() const { return kind == Kind::Missing; }
};

struct ClinicalRecord {
  std::string case_id;
  std::map<std::string, ClinicalValue> values;
};

/// How one clinical variable maps to groups.
struct VariableSpec {
  enum class Kind { Categorical, Thresholded };
  /// Which neighboring group a value equal to a threshold joins: the
  /// interval above it ("150-500" style half-open bins) or below it
  /// ("<=43" style labels).
  enum class Boundary { Above, Below };

  Kind kind = Kind::Categorical;
  std::vector<double> thresholds;        // strictly increasing
  std::vector<std::string> labels;       // ascending interval order, or categories
  std::map<std::string, std::string> aliases;  // raw value -> canonical category
  Boundary boundary = Boundary::Above;

  void validate(const std::string& name) const;
};

struct BinningSpec {
  // Declaration order preserved for canonical reporting.
  std::vector<std::pair<std::string, VariableSpec>> variables;

  const VariableSpec* find(const std::string& name) const;
  std::vector<std::string> variable_names() const;
};

/// Deterministic group assignment for one value under the spec.
/// Throws OutOfDomain for categorical values outside the declared list.
std::string bin_variable(const ClinicalValue& value, const std::string& variable,
                         const BinningSpec& spec);

/// Built-in binning specs replicating the two shipped cohort designs.
BinningSpec default_binning_xj_light1();
BinningSpec default_binning_kpmp_g();

}  // namespace glomkit
