#include "glomkit/mask.hpp"

#include <algorithm>
#include <vector>

namespace glomkit {

bool EntityMask::has_label(std::uint8_t label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

void EntityMask::validate() const {
  if (width <= 0 || height <= 0)
    throw ValidationError("EntityMask: non-positive dimensions");
  if (labels.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("EntityMask: label buffer size does not match width*height");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 2)
      throw ValidationError("EntityMask: label value " + std::to_string(labels[i]) +
                            " outside {0,1,2} at index " + std::to_string(i));
  }
  if (!(resolution > 0.0))
    throw ValidationError("EntityMask: resolution must be positive");
}

namespace {

// 8-connected flood fill over equal labels; returns pixel indices.
void flood8(const EntityMask& mask, std::uint8_t label, std::size_t start,
            std::vector<std::uint8_t>& seen, std::vector<std::size_t>& out) {
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  const int w = mask.width, h = mask.height;
  while (!stack.empty()) {
    const std::size_t idx = stack.back();
    stack.pop_back();
    out.push_back(idx);
    const int x = static_cast<int>(idx % w);
    const int y = static_cast<int>(idx / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
        if (seen[nidx] || mask.labels[nidx] != label) continue;
        seen[nidx] = 1;
        stack.push_back(nidx);
      }
    }
  }
}

}  // namespace

PixelComponent extract_component(const EntityMask& mask, std::uint8_t label) {
  mask.validate();
  const int w = mask.width, h = mask.height;
  std::vector<std::uint8_t> seen(mask.labels.size(), 0);
  std::vector<std::size_t> best;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    if (mask.labels[i] != label || seen[i]) continue;
    current.clear();
    flood8(mask, label, i, seen, current);
    if (current.size() > best.size()) best = current;
  }
  if (best.empty())
    throw NoPixelsForLabel("no pixels with label " + std::to_string(label));

  int xmin = w, xmax = -1, ymin = h, ymax = -1;
  for (std::size_t idx : best) {
    const int x = static_cast<int>(idx % w);
    const int y = static_cast<int>(idx / w);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  PixelComponent c;
  c.x0 = xmin;
  c.y0 = ymin;
  c.width = xmax - xmin + 1;
  c.height = ymax - ymin + 1;
  c.grid.assign(static_cast<std::size_t>(c.width) * c.height, 0);
  for (std::size_t idx : best) {
    const int x = static_cast<int>(idx % w) - xmin;
    const int y = static_cast<int>(idx / w) - ymin;
    c.grid[static_cast<std::size_t>(y) * c.width + x] = 1;
  }
  c.pixel_count = best.size();
  fill_holes(c);
  return c;
}

void fill_holes(PixelComponent& component) {
  // Flood the complement 4-connectedly from a 1-pixel pad around the
  // bounding box; unreached background pixels are interior holes.
  const int w = component.width + 2, h = component.height + 2;
  std::vector<std::uint8_t> outside(static_cast<std::size_t>(w) * h, 0);
  auto member = [&](int px, int py) {
    return component.inside(px - 1, py - 1);
  };
  std::vector<std::pair<int, int>> stack{{0, 0}};
  outside[0] = 1;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k], ny = y + dy[k];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
      if (outside[nidx] || member(nx, ny)) continue;
      outside[nidx] = 1;
      stack.emplace_back(nx, ny);
    }
  }
  std::size_t count = 0;
  for (int y = 0; y < component.height; ++y) {
    for (int x = 0; x < component.width; ++x) {
      const std::size_t padded = static_cast<std::size_t>(y + 1) * w + (x + 1);
      auto& cell = component.grid[static_cast<std::size_t>(y) * component.width + x];
      if (!outside[padded]) cell = 1;
      if (cell) ++count;
    }
  }
  component.pixel_count = count;
}

}  // namespace glomkit
