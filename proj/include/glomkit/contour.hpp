#pragma once

#include <cstdint>
#include <vector>

#include "glomkit/mask.hpp"

namespace glomkit {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Outer boundary of a component as a chain of unit steps along pixel
/// cracks. Directions: 0 = +x, 1 = +y, 2 = -x, 3 = -y. The chain starts
/// at the top-left corner of the topmost-leftmost pixel and keeps the
/// component on the right of the travel direction, which makes the
/// resulting polygon counterclockwise under the shoelace convention
/// (x = column, y = row treated as Cartesian).
struct CrackChain {
  int start_x = 0;
  int start_y = 0;
  std::vector<std::uint8_t> dirs;
};

CrackChain trace_crack_chain(const PixelComponent& component);

/// Closed outer-boundary polygon, collinear runs merged, vertices at
/// pixel-corner coordinates of the source mask. Last vertex is not
/// repeated.
std::vector<Point> trace_contour(const PixelComponent& component);

/// Signed shoelace area; positive for counterclockwise polygons.
double polygon_area(const std::vector<Point>& polygon);

/// Boundary length estimate: corner-cut crack chain (straight
/// transitions weigh 1, turns sqrt(2)/2) scaled by pi*(1+sqrt(2))/8,
/// the factor that makes the estimator asymptotically exact on disks.
double smoothed_perimeter(const CrackChain& chain);

}  // namespace glomkit
