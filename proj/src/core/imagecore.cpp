#include "core/imagecore.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace adforge {

namespace {

void check_dimensions(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument, "raster dimensions must be at least 1x1");
  }
}

struct SampleCell {
  int x0, y0, x1, y1;
  double fx, fy;
};

SampleCell locate(int width, int height, double x, double y) noexcept {
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  SampleCell cell{};
  cell.x0 = static_cast<int>(std::floor(x));
  cell.y0 = static_cast<int>(std::floor(y));
  cell.x1 = std::min(cell.x0 + 1, width - 1);
  cell.y1 = std::min(cell.y0 + 1, height - 1);
  cell.fx = x - cell.x0;
  cell.fy = y - cell.y0;
  return cell;
}

GrayImage smooth_and_decimate(const GrayImage& src) {
  static constexpr double kKernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  const int w = src.width();
  const int h = src.height();

  // Horizontal pass only on the columns we keep.
  const int out_w = w / 2;
  const int out_h = h / 2;
  GrayImage horizontal(out_w, h);
  for (int y = 0; y < h; ++y) {
    for (int ox = 0; ox < out_w; ++ox) {
      const int cx = 2 * ox;
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) {
        const int sx = std::clamp(cx + k, 0, w - 1);
        acc += kKernel[k + 2] * src.at(sx, y);
      }
      horizontal.at(ox, y) = acc;
    }
  }

  GrayImage out(out_w, out_h);
  for (int oy = 0; oy < out_h; ++oy) {
    const int cy = 2 * oy;
    for (int ox = 0; ox < out_w; ++ox) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) {
        const int sy = std::clamp(cy + k, 0, h - 1);
        acc += kKernel[k + 2] * horizontal.at(ox, sy);
      }
      out.at(ox, oy) = acc;
    }
  }
  return out;
}

}  // namespace

Frame::Frame(int width, int height, double fill) : width_(width), height_(height) {
  check_dimensions(width, height);
  data_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
}

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
  check_dimensions(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage to_grayscale(const Frame& frame) {
  GrayImage gray(frame.width(), frame.height());
  const auto& src = frame.data();
  auto& dst = gray.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
  }
  return gray;
}

double bilinear_sample(const GrayImage& image, double x, double y) noexcept {
  const SampleCell c = locate(image.width(), image.height(), x, y);
  const double top = image.at(c.x0, c.y0) + c.fx * (image.at(c.x1, c.y0) - image.at(c.x0, c.y0));
  const double bottom = image.at(c.x0, c.y1) + c.fx * (image.at(c.x1, c.y1) - image.at(c.x0, c.y1));
  return top + c.fy * (bottom - top);
}

void bilinear_sample_rgb(const Frame& frame, double x, double y, double out[3]) noexcept {
  const SampleCell c = locate(frame.width(), frame.height(), x, y);
  for (int ch = 0; ch < 3; ++ch) {
    const double top =
        frame.at(c.x0, c.y0, ch) + c.fx * (frame.at(c.x1, c.y0, ch) - frame.at(c.x0, c.y0, ch));
    const double bottom =
        frame.at(c.x0, c.y1, ch) + c.fx * (frame.at(c.x1, c.y1, ch) - frame.at(c.x0, c.y1, ch));
    out[ch] = top + c.fy * (bottom - top);
  }
}

Gradients gradient(const GrayImage& image) {
  const int w = image.width();
  const int h = image.height();
  if (w < 3 || h < 3) {
    throw Error(ErrorCode::TooSmall, "gradient needs at least a 3x3 image");
  }
  Gradients g{GrayImage(w, h), GrayImage(w, h)};
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0);
    const int yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0);
      const int xp = std::min(x + 1, w - 1);
      g.ix.at(x, y) = (image.at(xp, y) - image.at(xm, y)) / 2.0;
      g.iy.at(x, y) = (image.at(x, yp) - image.at(x, ym)) / 2.0;
    }
  }
  return g;
}

Pyramid build_pyramid(const GrayImage& image, int levels) {
  if (levels < 1) {
    throw Error(ErrorCode::InvalidArgument, "pyramid needs at least one level");
  }
  Pyramid pyramid;
  pyramid.levels.push_back(image);
  while (static_cast<int>(pyramid.size()) < levels) {
    const GrayImage& last = pyramid.levels.back();
    if (last.width() / 2 < kMinPyramidSide || last.height() / 2 < kMinPyramidSide) {
      break;
    }
    pyramid.levels.push_back(smooth_and_decimate(last));
  }
  return pyramid;
}

}  // namespace adforge
