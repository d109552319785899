#include "core/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/error.hpp"

namespace adforge {

namespace {

constexpr int kNx[4] = {1, -1, 0, 0};
constexpr int kNy[4] = {0, 0, 1, -1};

Quad full_rect(const Frame& image) {
  if (image.width() < 2 || image.height() < 2) {
    throw Error(ErrorCode::InvalidArgument, "advert must be at least 2x2");
  }
  return Quad::from_rect(0.0, 0.0, image.width(), image.height());
}

void require_same_size(const Frame& a, const Frame& b, const BinaryMask& m) {
  if (a.width() != b.width() || a.height() != b.height() || a.width() != m.width() || a.height() != m.height()) {
    throw Error(ErrorCode::DimensionMismatch, "target, source and omega must have equal dimensions");
  }
}

// Sparse 5-point operator restricted to omega: (A f)_p = 4 f_p - sum of
// in-omega neighbours.
struct LaplaceSystem {
  std::vector<int> xs, ys;
  std::vector<std::array<int, 4>> neighbours;  // unknown index or -1

  void apply(const std::vector<double>& f, std::vector<double>& out) const {
    for (std::size_t p = 0; p < f.size(); ++p) {
      double acc = 4.0 * f[p];
      for (int q : neighbours[p]) {
        if (q >= 0) acc -= f[q];
      }
      out[p] = acc;
    }
  }
};

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct SolveStats {
  double residual = 0.0;
  int iterations = 0;
};

SolveStats conjugate_gradient(const LaplaceSystem& sys, const std::vector<double>& b, std::vector<double>& x,
                              const BlendConfig& cfg) {
  const std::size_t n = b.size();
  const double b_norm = norm(b);
  SolveStats stats;
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }

  std::vector<double> r(n), p(n), ap(n);
  sys.apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  p = r;
  double rr = 0.0;
  for (double v : r) rr += v * v;
  const double stop = cfg.solver_tolerance * b_norm;

  while (std::sqrt(rr) > stop && stats.iterations < cfg.max_iterations) {
    sys.apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    const double alpha = rr / pap;
    double rr_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr_next += r[i] * r[i];
    }
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_next;
    ++stats.iterations;
  }

  // Report the true residual, not the recurrence.
  sys.apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  stats.residual = norm(r) / b_norm;
  return stats;
}

}  // namespace

Advert::Advert(Frame image) : image_(std::move(image)), source_quad_(full_rect(image_)) {}

void BlendConfig::validate() const {
  if (!(solver_tolerance > 0.0) || max_iterations < 1) {
    throw Error(ErrorCode::InvalidArgument, "solver tolerance and iteration cap must be positive");
  }
}

Warped warp_advert(const Advert& ad, const Homography& h, int width, int height) {
  std::array<Point, 4> dst{};
  for (int i = 0; i < 4; ++i) dst[i] = project(h, ad.source_quad()[i]);
  const Quad dest(dst);
  Warped out{Frame(width, height), rasterize_quad(dest, width, height)};
  if (out.omega.count() == 0) {
    throw Error(ErrorCode::EmptyOmega, "destination quad lies outside the frame");
  }

  const Homography inv = h.inverse();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool near = false;
      for (int dy = -1; dy <= 1 && !near; ++dy) {
        for (int dx = -1; dx <= 1 && !near; ++dx) near = out.omega.contains(x + dx, y + dy);
      }
      if (!near) continue;
      const Point s = project(inv, {x + 0.5, y + 0.5});
      double rgb[3];
      bilinear_sample_rgb(ad.image(), s.x - 0.5, s.y - 0.5, rgb);
      for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = rgb[c];
    }
  }
  return out;
}

BlendResult poisson_blend(const Frame& target, const Frame& source, const BinaryMask& omega,
                          const BlendConfig& cfg) {
  cfg.validate();
  require_same_size(target, source, omega);
  const int w = target.width();
  const int h = target.height();

  LaplaceSystem sys;
  std::vector<int> index(static_cast<std::size_t>(w) * h, -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!omega.at(x, y)) continue;
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
        throw Error(ErrorCode::OmegaTouchesBorder, "omega reaches the frame border");
      }
      index[static_cast<std::size_t>(y) * w + x] = static_cast<int>(sys.xs.size());
      sys.xs.push_back(x);
      sys.ys.push_back(y);
    }
  }
  if (sys.xs.empty()) throw Error(ErrorCode::EmptyOmega, "omega has no pixels");

  const std::size_t n = sys.xs.size();
  sys.neighbours.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (int k = 0; k < 4; ++k) {
      sys.neighbours[p][k] = index[static_cast<std::size_t>(sys.ys[p] + kNy[k]) * w + sys.xs[p] + kNx[k]];
    }
  }

  BlendResult result{target, 0.0, 0, true};
  std::vector<double> b(n), f(n);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < n; ++p) {
      const int x = sys.xs[p], y = sys.ys[p];
      const double sp = source.at(x, y, c);
      double rhs = 0.0;
      for (int k = 0; k < 4; ++k) {
        const int qx = x + kNx[k], qy = y + kNy[k];
        if (sys.neighbours[p][k] < 0) rhs += target.at(qx, qy, c);
        rhs += sp - source.at(qx, qy, c);
      }
      b[p] = rhs;
      f[p] = sp;
    }
    const SolveStats stats = conjugate_gradient(sys, b, f, cfg);
    result.residual = std::max(result.residual, stats.residual);
    result.iterations = std::max(result.iterations, stats.iterations);
    for (std::size_t p = 0; p < n; ++p) result.image.at(sys.xs[p], sys.ys[p], c) = f[p];
  }
  result.converged = result.residual <= 10.0 * cfg.solver_tolerance;
  return result;
}

Frame direct_composite(const Frame& target, const Frame& source, const BinaryMask& omega) {
  require_same_size(target, source, omega);
  Frame out = target;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (!omega.at(x, y)) continue;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = source.at(x, y, c);
    }
  }
  return out;
}

Frame clamp_frame(Frame f) {
  for (double& v : f.data()) v = std::clamp(v, 0.0, 1.0);
  return f;
}

}  // namespace adforge
