#include "oracles.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace oracle {

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (a[pivot * n + col] == 0.0) throw std::runtime_error("singular system");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

std::array<double, 9> homography_8x8(const std::array<Point, 4>& src, const std::array<Point, 4>& dst) {
  std::vector<double> a(64, 0.0), b(8, 0.0);
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
    double* r0 = &a[(2 * i) * 8];
    double* r1 = &a[(2 * i + 1) * 8];
    r0[0] = x, r0[1] = y, r0[2] = 1, r0[6] = -u * x, r0[7] = -u * y;
    r1[3] = x, r1[4] = y, r1[5] = 1, r1[6] = -v * x, r1[7] = -v * y;
    b[2 * i] = u;
    b[2 * i + 1] = v;
  }
  const std::vector<double> h = solve_dense(a, b, 8);
  return {h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0};
}

Point apply(const std::array<double, 9>& h, Point p) {
  const double w = h[6] * p.x + h[7] * p.y + h[8];
  return {(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

namespace {

void fill(const BinaryMask& m, std::vector<int>& labels, int x, int y, int label) {
  if (x < 0 || y < 0 || x >= m.width() || y >= m.height()) return;
  const std::size_t i = static_cast<std::size_t>(y) * m.width() + x;
  if (!m.at(x, y) || labels[i] != 0) return;
  labels[i] = label;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx != 0 || dy != 0) fill(m, labels, x + dx, y + dy, label);
    }
  }
}

}  // namespace

std::vector<int> flood_fill_labels(const BinaryMask& mask) {
  std::vector<int> labels(static_cast<std::size_t>(mask.width()) * mask.height(), 0);
  int next = 1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y) && labels[static_cast<std::size_t>(y) * mask.width() + x] == 0) fill(mask, labels, x, y, next++);
    }
  }
  return labels;
}

std::vector<Point> brute_force_hull(const std::vector<Point>& pts) {
  std::vector<Point> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    bool vertex = false;
    for (std::size_t j = 0; j < n && !vertex; ++j) {
      if (pts[j] == pts[i]) continue;
      bool ok = true;
      for (std::size_t k = 0; k < n && ok; ++k) {
        if (pts[k] == pts[i]) continue;
        const double c = adforge::cross(pts[i], pts[j], pts[k]);
        ok = c > 0 || (c == 0 && adforge::dot(pts[k] - pts[i], pts[j] - pts[i]) > 0);
      }
      vertex = ok;
    }
    if (vertex) out.push_back(pts[i]);
  }
  std::sort(out.begin(), out.end(), [](Point a, Point b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double angle_sweep_min_area(const std::vector<Point>& pts, double step_degrees) {
  double best = INFINITY;
  const int steps = static_cast<int>(std::round(90.0 / step_degrees));
  for (int s = 0; s < steps; ++s) {
    const double a = s * step_degrees * M_PI / 180.0;
    const double c = std::cos(a), sn = std::sin(a);
    double u0 = INFINITY, u1 = -INFINITY, v0 = INFINITY, v1 = -INFINITY;
    for (const Point& p : pts) {
      const double u = c * p.x + sn * p.y, v = -sn * p.x + c * p.y;
      u0 = std::min(u0, u), u1 = std::max(u1, u), v0 = std::min(v0, v), v1 = std::max(v1, v);
    }
    best = std::min(best, (u1 - u0) * (v1 - v0));
  }
  return best;
}

double pair_direction_min_area(const std::vector<Point>& pts) {
  double best = INFINITY;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double len = adforge::distance(pts[i], pts[j]);
      if (len == 0) continue;
      const double c = (pts[j].x - pts[i].x) / len, sn = (pts[j].y - pts[i].y) / len;
      double u0 = INFINITY, u1 = -INFINITY, v0 = INFINITY, v1 = -INFINITY;
      for (const Point& p : pts) {
        const double u = c * p.x + sn * p.y, v = -sn * p.x + c * p.y;
        u0 = std::min(u0, u), u1 = std::max(u1, u), v0 = std::min(v0, v), v1 = std::max(v1, v);
      }
      best = std::min(best, (u1 - u0) * (v1 - v0));
    }
  }
  return best;
}

bool inside_or_on(const std::array<Point, 4>& poly, Point p) {
  for (int i = 0; i < 4; ++i) {
    const Point a = poly[i], b = poly[(i + 1) % 4];
    const double c = adforge::cross(a, b, p);
    const bool within = std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
                        p.y <= std::max(a.y, b.y);
    if (std::abs(c) <= 1e-12 * (1.0 + adforge::distance(a, b)) && within) return true;
  }
  bool in = false;
  for (int i = 0, j = 3; i < 4; j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

double brute_min_eigenvalue(const GrayImage& img, int x, int y, int window) {
  const int w = img.width(), h = img.height();
  const auto v = [&](int i, int j) { return img.at(std::clamp(i, 0, w - 1), std::clamp(j, 0, h - 1)); };
  double a = 0, b = 0, c = 0;
  for (int j = std::max(0, y - window); j <= std::min(h - 1, y + window); ++j) {
    for (int i = std::max(0, x - window); i <= std::min(w - 1, x + window); ++i) {
      const double gx = (v(i + 1, j) - v(i - 1, j)) / 2.0;
      const double gy = (v(i, j + 1) - v(i, j - 1)) / 2.0;
      a += gx * gx, b += gx * gy, c += gy * gy;
    }
  }
  const double tr = (a + c) / 2.0;
  return tr - std::sqrt(std::max(0.0, (a - c) * (a - c) / 4.0 + b * b));
}

Frame dense_poisson(const Frame& target, const Frame& source, const BinaryMask& omega) {
  const int w = target.width(), h = target.height();
  std::vector<int> index(static_cast<std::size_t>(w) * h, -1);
  std::vector<std::pair<int, int>> cells;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (omega.at(x, y)) {
        index[static_cast<std::size_t>(y) * w + x] = static_cast<int>(cells.size());
        cells.emplace_back(x, y);
      }
    }
  }
  const int n = static_cast<int>(cells.size());
  Frame out = target;
  for (int ch = 0; ch < 3; ++ch) {
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0), b(n, 0.0);
    for (int r = 0; r < n; ++r) {
      const auto [x, y] = cells[r];
      a[static_cast<std::size_t>(r) * n + r] = 4.0;
      const int nx[4] = {x + 1, x - 1, x, x};
      const int ny[4] = {y, y, y + 1, y - 1};
      for (int k = 0; k < 4; ++k) {
        b[r] += source.at(x, y, ch) - source.at(nx[k], ny[k], ch);
        const int q = index[static_cast<std::size_t>(ny[k]) * w + nx[k]];
        if (q >= 0) {
          a[static_cast<std::size_t>(r) * n + q] -= 1.0;
        } else {
          b[r] += target.at(nx[k], ny[k], ch);
        }
      }
    }
    const std::vector<double> f = solve_dense(std::move(a), std::move(b), n);
    for (int r = 0; r < n; ++r) out.at(cells[r].first, cells[r].second, ch) = f[r];
  }
  return out;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

GrayImage smooth_texture(int w, int h, std::mt19937_64& rng, double min_period, double max_period) {
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 12; ++i) {
    const double period = uniform(rng, min_period, max_period);
    const double theta = uniform(rng, 0.0, M_PI);
    waves.push_back({std::cos(theta) * 2 * M_PI / period, std::sin(theta) * 2 * M_PI / period,
                     uniform(rng, 0.0, 2 * M_PI), uniform(rng, 0.5, 1.0)});
  }
  double total = 0;
  for (const Wave& wv : waves) total += wv.amp;
  GrayImage g(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 0;
      for (const Wave& wv : waves) v += wv.amp * std::sin(wv.fx * x + wv.fy * y + wv.phase);
      g.at(x, y) = 0.5 + 0.45 * v / total;
    }
  }
  return g;
}

Frame gray_to_frame(const GrayImage& g) {
  Frame f(g.width(), g.height());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      for (int c = 0; c < 3; ++c) f.at(x, y, c) = g.at(x, y);
    }
  }
  return f;
}

Frame random_frame(int w, int h, std::mt19937_64& rng, bool quantized) {
  Frame f(w, h);
  std::uniform_int_distribution<int> byte(0, 255);
  for (double& v : f.data()) v = quantized ? byte(rng) / 255.0 : uniform(rng, 0.0, 1.0);
  return f;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("adforge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace oracle
