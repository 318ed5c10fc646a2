#include "glomkit/contour.hpp"

#include <cmath>
#include <numbers>

namespace glomkit {

namespace {

constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

// Pixels flanking the edge leaving corner (cx, cy) in direction d:
// front-left and front-right relative to travel.
struct Flank {
  int flx, fly, frx, fry;
};

Flank flank(int cx, int cy, int d) {
  switch (d) {
    case 0: return {cx, cy - 1, cx, cy};          // +x: left is north
    case 1: return {cx, cy, cx - 1, cy};          // +y: left is east
    case 2: return {cx - 1, cy, cx - 1, cy - 1};  // -x: left is south
    default: return {cx - 1, cy - 1, cx, cy - 1}; // -y: left is west
  }
}

}  // namespace

CrackChain trace_crack_chain(const PixelComponent& component) {
  CrackChain chain;
  // Topmost, then leftmost member pixel; its top-left corner starts the walk.
  int sx = -1, sy = -1;
  for (int y = 0; y < component.height && sx < 0; ++y)
    for (int x = 0; x < component.width; ++x)
      if (component.inside(x, y)) {
        sx = x;
        sy = y;
        break;
      }
  if (sx < 0) throw ValidationError("trace_crack_chain: empty component");

  chain.start_x = sx + component.x0;
  chain.start_y = sy + component.y0;

  auto boundary_edge = [&](int cx, int cy, int d) {
    const Flank f = flank(cx, cy, d);
    return component.inside(f.frx, f.fry) && !component.inside(f.flx, f.fly);
  };

  const int first_dir = 0;  // top edge of the start pixel, eastbound
  int cx = sx, cy = sy, d = first_dir;
  do {
    chain.dirs.push_back(static_cast<std::uint8_t>(d));
    cx += kDx[d];
    cy += kDy[d];
    // Turn priority: left, straight, right. Keeps the walk hugging the
    // component and pinches correctly through corner-touching lobes.
    const int candidates[3] = {(d + 3) % 4, d, (d + 1) % 4};
    int next = -1;
    for (int cand : candidates) {
      if (boundary_edge(cx, cy, cand)) {
        next = cand;
        break;
      }
    }
    if (next < 0) throw ValidationError("trace_crack_chain: broken boundary");
    d = next;
  } while (cx != sx || cy != sy || d != first_dir);
  return chain;
}

std::vector<Point> trace_contour(const PixelComponent& component) {
  const CrackChain chain = trace_crack_chain(component);
  std::vector<Point> polygon;
  polygon.reserve(chain.dirs.size());
  double x = chain.start_x, y = chain.start_y;
  const std::size_t n = chain.dirs.size();
  for (std::size_t i = 0; i < n; ++i) {
    // Emit a vertex only where the direction changes (wrapping start).
    const std::uint8_t prev = chain.dirs[(i + n - 1) % n];
    if (chain.dirs[i] != prev || n == 1) polygon.push_back({x, y});
    x += kDx[chain.dirs[i]];
    y += kDy[chain.dirs[i]];
  }
  return polygon;
}

double polygon_area(const std::vector<Point>& polygon) {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = polygon[i];
    const Point& q = polygon[(i + 1) % n];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * twice;
}

double smoothed_perimeter(const CrackChain& chain) {
  const std::size_t n = chain.dirs.size();
  std::size_t turns = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (chain.dirs[i] != chain.dirs[(i + 1) % n]) ++turns;
  const double straight = static_cast<double>(n - turns);
  const double corner = static_cast<double>(turns) * (std::numbers::sqrt2 / 2.0);
  // Circle calibration: the corner-cut length overshoots smooth boundaries
  // by 8(sqrt(2)-1)/pi on average; the factor below is its exact inverse.
  const double calibration = std::numbers::pi * (1.0 + std::numbers::sqrt2) / 8.0;
  return (straight + corner) * calibration;
}

}  // namespace glomkit
