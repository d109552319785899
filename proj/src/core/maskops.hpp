#pragma once

#include <cstdint>
#include <vector>

#include "core/geometry.hpp"
#include "core/imagecore.hpp"

namespace adforge {

// Per-pixel billboard probability, values in [0,1].
using Heatmap = GrayImage;

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y);
  }

  std::size_t count() const noexcept;
  bool empty_foreground() const noexcept { return count() == 0; }

  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

struct PixelCoord {
  int x = 0;
  int y = 0;
  bool operator==(const PixelCoord&) const = default;
};

// One 8-connected foreground component. `boundary` is the Moore-traced outer
// contour, clockwise on screen, starting at the first pixel in raster order.
// Pixels of one-pixel-wide parts may appear more than once.
struct Region {
  int label = 0;
  std::size_t area = 0;
  std::vector<PixelCoord> pixels;  // raster order
  std::vector<PixelCoord> boundary;
};

BinaryMask threshold(const Heatmap& heatmap, double t);

// Labels are assigned in raster order of each region's first pixel.
std::vector<Region> connected_components(const BinaryMask& mask);

// Ties go to the region whose first raster pixel comes first.
const Region& largest_region(const std::vector<Region>& regions);

inline constexpr double kDefaultThreshold = 0.5;
inline constexpr double kDefaultMinAreaFraction = 0.001;

// threshold -> components -> largest -> hull -> min-area rect -> canonical
// corners. Hull points are boundary pixel centres; the rectangle is then
// grown by half a pixel on each side to cover the pixel footprints.
Quad localize_quad(const Heatmap& heatmap, double t, double min_area);

// Pixel (i, j) is set when its centre (i + 0.5, j + 0.5) lies inside or on
// the quad.
BinaryMask rasterize_quad(const Quad& quad, int width, int height);

}  // namespace adforge
