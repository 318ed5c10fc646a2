#include "glomkit/morphometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace glomkit {

ShapeParams shape_params(const PixelComponent& component, double resolution) {
  if (component.pixel_count == 0)
    throw ValidationError("shape_params: empty component");

  ShapeParams p;
  p.area = static_cast<double>(component.pixel_count) * resolution * resolution;

  const CrackChain chain = trace_crack_chain(component);
  p.perimeter = smoothed_perimeter(chain) * resolution;
  p.circularity = 4.0 * std::numbers::pi * p.area / (p.perimeter * p.perimeter);

  // Central second moments of the pixel centers.
  double sx = 0.0, sy = 0.0;
  for (int y = 0; y < component.height; ++y)
    for (int x = 0; x < component.width; ++x)
      if (component.inside(x, y)) {
        sx += x;
        sy += y;
      }
  const double n = static_cast<double>(component.pixel_count);
  const double mx = sx / n, my = sy / n;
  double mxx = 0.0, myy = 0.0, mxy = 0.0;
  for (int y = 0; y < component.height; ++y)
    for (int x = 0; x < component.width; ++x)
      if (component.inside(x, y)) {
        const double dx = x - mx, dy = y - my;
        mxx += dx * dx;
        myy += dy * dy;
        mxy += dx * dy;
      }
  mxx /= n;
  myy /= n;
  mxy /= n;

  const double trace_half = 0.5 * (mxx + myy);
  const double disc =
      std::sqrt(std::max(0.0, trace_half * trace_half - (mxx * myy - mxy * mxy)));
  const double lambda1 = std::max(0.0, trace_half + disc);
  const double lambda2 = std::max(0.0, trace_half - disc);

  p.major_axis = 2.0 * std::sqrt(lambda1) * resolution;
  p.minor_axis = 2.0 * std::sqrt(lambda2) * resolution;

  if (lambda2 <= 1e-12 * std::max(1.0, lambda1)) {
    p.degenerate = true;
    p.eccentricity = 1.0 - 1e-9;  // limit of sqrt(1 - b^2/a^2) as b -> 0
  } else {
    p.eccentricity = std::sqrt(1.0 - lambda2 / lambda1);
  }
  return p;
}

MorphometryRecord glomerulus_morphometry(const EntityMask& mask,
                                         const std::string& id) {
  MorphometryRecord rec;
  rec.id = id;
  try {
    rec.bow = shape_params(extract_component(mask, kLabelBow), mask.resolution);
  } catch (const NoPixelsForLabel&) {
  }
  try {
    rec.tuft = shape_params(extract_component(mask, kLabelTuft), mask.resolution);
  } catch (const NoPixelsForLabel&) {
  }
  if (rec.complete()) rec.ratio = rec.tuft->area / rec.bow->area;
  return rec;
}

const std::array<std::string, kCaseFeatureCount>& case_feature_names() {
  static const std::array<std::string, kCaseFeatureCount> names = {
      "AreaBow_mean",  "AreaBow_med",  "AreaTuft_mean", "AreaTuft_med",
      "Ratio_mean",    "Ratio_med",    "CirBow_mean",   "CirBow_med",
      "CirTuft_mean",  "CirTuft_med",  "EccBow_mean",   "EccBow_med",
      "EccTuft_mean",  "EccTuft_med"};
  return names;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CaseFeatureVector aggregate_case(const std::string& case_id,
                                 std::vector<MorphometryRecord> records) {
  if (records.empty()) throw EmptyCase("aggregate_case: no records for " + case_id);
  std::sort(records.begin(), records.end(),
            [](const MorphometryRecord& a, const MorphometryRecord& b) {
              return a.id < b.id;
            });

  std::vector<double> area_bow, area_tuft, ratio, cir_bow, cir_tuft, ecc_bow, ecc_tuft;
  for (const MorphometryRecord& r : records) {
    if (!r.usable()) continue;
    area_bow.push_back(r.bow->area);
    area_tuft.push_back(r.tuft->area);
    ratio.push_back(r.ratio);
    cir_bow.push_back(r.bow->circularity);
    cir_tuft.push_back(r.tuft->circularity);
    ecc_bow.push_back(r.bow->eccentricity);
    ecc_tuft.push_back(r.tuft->eccentricity);
  }
  if (area_bow.empty())
    throw EmptyCase("aggregate_case: no usable records for " + case_id);

  CaseFeatureVector f;
  f.case_id = case_id;
  f.n_glomeruli = static_cast<int>(area_bow.size());
  const std::vector<double>* params[7] = {&area_bow, &area_tuft, &ratio,
                                          &cir_bow,  &cir_tuft,  &ecc_bow,
                                          &ecc_tuft};
  for (int i = 0; i < 7; ++i) {
    f.values[2 * i] = mean_of(*params[i]);
    f.values[2 * i + 1] = median_of(*params[i]);
  }
  return f;
}

}  // namespace glomkit
