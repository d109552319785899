#pragma once

#include <cstddef>
#include <vector>

namespace adforge {

// Interleaved RGB raster with intensities on the unit scale. 8-bit data is
// converted at I/O boundaries only.
class Frame {
 public:
  static constexpr int kChannels = 3;

  Frame() = default;
  Frame(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Frame&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Single-channel real raster. Used for luma (values in [0,1]) and for signed
// derivative fields.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

struct Gradients {
  GrayImage ix;
  GrayImage iy;
};

// Level 0 is full resolution; each level halves the previous one (floor).
struct Pyramid {
  std::vector<GrayImage> levels;

  std::size_t size() const noexcept { return levels.size(); }
  const GrayImage& operator[](std::size_t i) const { return levels[i]; }
};

// Smallest side a pyramid level may have.
inline constexpr int kMinPyramidSide = 8;

GrayImage to_grayscale(const Frame& frame);

// Bilinear interpolation in sample coordinates: (x, y) integer addresses pixel
// (x, y) exactly. Coordinates outside [0, w-1] x [0, h-1] are clamped.
double bilinear_sample(const GrayImage& image, double x, double y) noexcept;

// Per-channel variant of bilinear_sample.
void bilinear_sample_rgb(const Frame& frame, double x, double y, double out[3]) noexcept;

// Central differences with replicated borders. Throws TooSmall below 3x3.
Gradients gradient(const GrayImage& image);

// Smooths with the separable [1,4,6,4,1]/16 kernel (replicated borders) and
// keeps even samples. The level count is capped so no level is smaller than
// kMinPyramidSide on either axis.
Pyramid build_pyramid(const GrayImage& image, int levels);

}  // namespace adforge
