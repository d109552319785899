#include "core/maskops.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

#include "core/error.hpp"

namespace adforge {

namespace {

// Clockwise on screen, starting east.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kWest = 4;

int direction_of(int dx, int dy) noexcept {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  return -1;
}

struct Step {
  PixelCoord next;
  int backtrack;  // direction from `next` to the last background neighbour examined
};

// Moore neighbourhood search: rotate clockwise from the backtrack direction
// and stop at the first foreground pixel.
std::optional<Step> moore_step(const BinaryMask& mask, PixelCoord c, int backtrack) {
  for (int k = 1; k < 8; ++k) {
    const int d = (backtrack + k) % 8;
    const PixelCoord q{c.x + kDx[d], c.y + kDy[d]};
    if (mask.contains(q.x, q.y)) {
      const int prev = (backtrack + k - 1) % 8;
      const int bx = c.x + kDx[prev] - q.x;
      const int by = c.y + kDy[prev] - q.y;
      return Step{q, direction_of(bx, by)};
    }
  }
  return std::nullopt;
}

std::vector<PixelCoord> trace_outer_boundary(const BinaryMask& mask, PixelCoord start) {
  std::vector<PixelCoord> boundary{start};
  const std::optional<Step> first = moore_step(mask, start, kWest);
  if (!first) return boundary;

  PixelCoord current = first->next;
  int backtrack = first->backtrack;
  // Each pixel can be entered from at most 8 directions.
  const std::size_t guard = 8 * mask.count() + 8;
  for (std::size_t iter = 0; iter < guard; ++iter) {
    const std::optional<Step> step = moore_step(mask, current, backtrack);
    if (current == start && step->next == first->next) break;
    boundary.push_back(current);
    current = step->next;
    backtrack = step->backtrack;
  }
  return boundary;
}

int clamp_index(double v, int size) noexcept {
  return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(size - 1)));
}

}  // namespace

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument, "mask dimensions must be at least 1x1");
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

BinaryMask threshold(const Heatmap& heatmap, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0,1]");
  }
  BinaryMask mask(heatmap.width(), heatmap.height());
  for (int y = 0; y < heatmap.height(); ++y) {
    for (int x = 0; x < heatmap.width(); ++x) mask.set(x, y, heatmap.at(x, y) >= t);
  }
  return mask;
}

std::vector<Region> connected_components(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * h, -1);
  std::vector<Region> regions;
  std::deque<PixelCoord> queue;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || labels[static_cast<std::size_t>(y) * w + x] >= 0) continue;
      const int label = static_cast<int>(regions.size());
      regions.push_back(Region{label, 0, {}, {}});
      labels[static_cast<std::size_t>(y) * w + x] = label;
      queue.push_back({x, y});
      while (!queue.empty()) {
        const PixelCoord p = queue.front();
        queue.pop_front();
        for (int d = 0; d < 8; ++d) {
          const int nx = p.x + kDx[d];
          const int ny = p.y + kDy[d];
          if (!mask.contains(nx, ny)) continue;
          int& l = labels[static_cast<std::size_t>(ny) * w + nx];
          if (l < 0) {
            l = label;
            queue.push_back({nx, ny});
          }
        }
      }
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int l = labels[static_cast<std::size_t>(y) * w + x];
      if (l >= 0) regions[l].pixels.push_back({x, y});
    }
  }
  for (Region& r : regions) {
    r.area = r.pixels.size();
    r.boundary = trace_outer_boundary(mask, r.pixels.front());
  }
  return regions;
}

const Region& largest_region(const std::vector<Region>& regions) {
  if (regions.empty()) {
    throw Error(ErrorCode::NoRegion, "no foreground region");
  }
  const auto first_index = [](const Region& r) {
    return std::pair{r.pixels.front().y, r.pixels.front().x};
  };
  const Region* best = &regions.front();
  for (const Region& r : regions) {
    if (r.area > best->area || (r.area == best->area && first_index(r) < first_index(*best))) best = &r;
  }
  return *best;
}

Quad localize_quad(const Heatmap& heatmap, double t, double min_area) {
  const BinaryMask mask = threshold(heatmap, t);
  const std::vector<Region> regions = connected_components(mask);
  if (regions.empty()) {
    throw Error(ErrorCode::NoRegion, "nothing above threshold");
  }
  const Region& region = largest_region(regions);
  if (static_cast<double>(region.area) < min_area) {
    throw Error(ErrorCode::RegionTooSmall,
                "largest region has " + std::to_string(region.area) + " pixels, below the minimum");
  }

  std::vector<Point> centres;
  centres.reserve(region.boundary.size());
  for (const PixelCoord& p : region.boundary) centres.push_back({p.x + 0.5, p.y + 0.5});
  const Quad rect = min_area_rect(centres).quad;

  const auto unit = [](Point v) { return (1.0 / std::hypot(v.x, v.y)) * v; };
  const Point u = unit(rect[kTopRight] - rect[kTopLeft]);
  const Point v = unit(rect[kBottomLeft] - rect[kTopLeft]);
  const Point hu = 0.5 * u;
  const Point hv = 0.5 * v;
  return order_corners({rect[kTopLeft] - hu - hv, rect[kTopRight] + hu - hv, rect[kBottomRight] + hu + hv,
                        rect[kBottomLeft] - hu + hv});
}

BinaryMask rasterize_quad(const Quad& quad, int width, int height) {
  BinaryMask mask(width, height);
  const auto& c = quad.corners();
  double min_y = c[0].y, max_y = c[0].y;
  for (const Point& p : c) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const int row_begin = clamp_index(std::ceil(min_y - 0.5), height);
  const int row_end = clamp_index(std::floor(max_y - 0.5), height);
  if (max_y - 0.5 < 0.0 || min_y - 0.5 > height - 1) return mask;

  for (int j = row_begin; j <= row_end; ++j) {
    const double yc = j + 0.5;
    double x_lo = INFINITY;
    double x_hi = -INFINITY;
    for (int i = 0; i < 4; ++i) {
      const Point a = c[i];
      const Point b = c[(i + 1) % 4];
      if (yc < std::min(a.y, b.y) || yc > std::max(a.y, b.y)) continue;
      if (a.y == b.y) {
        x_lo = std::min({x_lo, a.x, b.x});
        x_hi = std::max({x_hi, a.x, b.x});
      } else {
        const double x = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
      }
    }
    if (x_lo > x_hi) continue;
    if (x_hi - 0.5 < 0.0 || x_lo - 0.5 > width - 1) continue;
    const int col_begin = clamp_index(std::ceil(x_lo - 0.5), width);
    const int col_end = clamp_index(std::floor(x_hi - 0.5), width);
    for (int i = col_begin; i <= col_end; ++i) mask.set(i, j, true);
  }
  return mask;
}

}  // namespace adforge
