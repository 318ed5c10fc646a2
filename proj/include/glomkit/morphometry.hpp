#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "glomkit/contour.hpp"
#include "glomkit/mask.hpp"

namespace glomkit {

/// Per-structure shape descriptors. Lengths are in physical units when
/// the mask carries a resolution, else pixels.
struct ShapeParams {
  double area = 0.0;        // S
  double perimeter = 0.0;   // P, smoothed boundary length
  double major_axis = 0.0;  // a, semi-axis of the moment-equivalent ellipse
  double minor_axis = 0.0;  // b
  double circularity = 0.0; // 4*pi*S / P^2
  double eccentricity = 0.0;
  bool degenerate = false;  // b collapsed to zero; eccentricity is a limit value
};

ShapeParams shape_params(const PixelComponent& component, double resolution = 1.0);

/// The seven glomerulus-level parameters of one entity. A structure that
/// is absent in the mask leaves its slot empty; such records are dropped
/// from case aggregation.
struct MorphometryRecord {
  std::string id;
  std::optional<ShapeParams> bow;
  std::optional<ShapeParams> tuft;
  double ratio = 0.0;  // S_tuft / S_bow, valid when complete()

  bool complete() const { return bow.has_value() && tuft.has_value(); }
  bool usable() const {
    return complete() && !bow->degenerate && !tuft->degenerate;
  }
};

MorphometryRecord glomerulus_morphometry(const EntityMask& mask,
                                         const std::string& id = {});

inline constexpr int kCaseFeatureCount = 14;

/// Case-level feature names, in table order: each parameter's mean then
/// median.
const std::array<std::string, kCaseFeatureCount>& case_feature_names();

struct CaseFeatureVector {
  std::string case_id;
  std::array<double, kCaseFeatureCount> values{};
  int n_glomeruli = 0;

  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

struct EmptyCase : ValidationError {
  using ValidationError::ValidationError;
};

/// Mean/median aggregation over the usable records of one case.
/// Records are processed in id-sorted order so results do not depend on
/// input ordering. Throws EmptyCase when no usable record remains.
CaseFeatureVector aggregate_case(const std::string& case_id,
                                 std::vector<MorphometryRecord> records);

}  // namespace glomkit
