#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glomkit/types.hpp"

namespace glomkit {

inline constexpr std::uint8_t kLabelBackground = 0;
inline constexpr std::uint8_t kLabelBow = 1;
inline constexpr std::uint8_t kLabelTuft = 2;

/// Labeled raster of one glomerulus: 0 = background, 1 = Bowman's
/// capsule, 2 = tuft. `resolution` is micrometers per pixel.
struct EntityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;  // row-major, size width*height
  double resolution = 1.0;

  std::uint8_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return labels[static_cast<std::size_t>(y) * width + x];
  }

  bool has_label(std::uint8_t label) const;
  void validate() const;  // throws ValidationError on shape/label violations
};

struct NoPixelsForLabel : ValidationError {
  using ValidationError::ValidationError;
};

/// One connected blob of pixels, stored on its bounding box so that all
/// geometry downstream is translation invariant by construction.
struct PixelComponent {
  int x0 = 0, y0 = 0;  // bounding-box offset in the source mask
  int width = 0, height = 0;
  std::vector<std::uint8_t> grid;  // bbox-local, 1 = member
  std::size_t pixel_count = 0;

  bool inside(int x, int y) const {  // bbox-local coordinates
    return x >= 0 && x < width && y >= 0 && y < height &&
           grid[static_cast<std::size_t>(y) * width + x] != 0;
  }
};

/// Largest 8-connected component of `label`, holes filled.
/// Throws NoPixelsForLabel when the label does not occur.
PixelComponent extract_component(const EntityMask& mask, std::uint8_t label);

/// Fill interior holes in place (4-connected background flood from the
/// bounding-box border; everything unreached becomes foreground).
void fill_holes(PixelComponent& component);

}  // namespace glomkit
