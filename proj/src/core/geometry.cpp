#include "core/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/error.hpp"

namespace adforge {

namespace {

constexpr double kDepthEpsilon = 1e-12;
constexpr double kSingularDeterminant = 1e-12;
constexpr double kCollinearFraction = 1e-9;
constexpr double kTurnTolerance = 1e-12;
constexpr double kAreaTieTolerance = 1e-12;

// Squared length of the longest edge, the scale for relative turn tests.
double scale_squared(const std::array<Point, 4>& c) noexcept {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point e = c[(i + 1) % 4] - c[i];
    s = std::max(s, dot(e, e));
  }
  return s;
}

bool any_three_collinear(std::span<const Point, 4> p) noexcept {
  double min_x = p[0].x, max_x = p[0].x, min_y = p[0].y, max_y = p[0].y;
  for (const Point& q : p) {
    min_x = std::min(min_x, q.x);
    max_x = std::max(max_x, q.x);
    min_y = std::min(min_y, q.y);
    max_y = std::max(max_y, q.y);
  }
  const double bbox_area = (max_x - min_x) * (max_y - min_y);
  for (int skip = 0; skip < 4; ++skip) {
    std::array<Point, 3> t{};
    int k = 0;
    for (int i = 0; i < 4; ++i) {
      if (i != skip) t[k++] = p[i];
    }
    const double tri_area = 0.5 * std::abs(cross(t[0], t[1], t[2]));
    if (tri_area <= kCollinearFraction * bbox_area) return true;
  }
  return false;
}

// Similarity that moves the centroid to the origin and the mean distance to
// sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const Point> pts) {
  double cx = 0.0, cy = 0.0;
  for (const Point& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const Point& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= static_cast<double>(pts.size());
  if (mean_dist <= 0.0) {
    throw Error(ErrorCode::DegenerateConfiguration, "all points coincide");
  }
  const double s = std::numbers::sqrt2 / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

Homography solve_dlt(std::span<const Point> src, std::span<const Point> dst) {
  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);
  const auto n = static_cast<Eigen::Index>(src.size());

  // Pad to at least 9 rows so the full V of the thin system is well defined.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(2 * n, 9), 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d s = ts * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
    const Eigen::Vector3d d = td * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
    const double x = s.x(), y = s.y(), u = d.x(), v = d.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);

  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d full = td.inverse() * hn * ts;

  std::array<double, 9> m{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[3 * r + c] = full(r, c);
  }
  return Homography(m);
}

// The SVD leaves ~1e-9 px of reprojection error on poorly conditioned sets.
// Four correspondences determine H exactly, so a few Gauss-Newton steps on the
// pixel residuals, with the gauge fixed by keeping the step orthogonal to h,
// take it to rounding level.
Homography refine_exact(const Homography& h0, std::span<const Point, 4> src, std::span<const Point, 4> dst) {
  const auto worst = [&](const Homography& g) {
    double e = 0.0;
    for (int i = 0; i < 4; ++i) e = std::max(e, distance(project(g, src[i]), dst[i]));
    return e;
  };
  Homography best = h0;
  double best_err = worst(best);
  Eigen::Matrix<double, 9, 1> h;
  for (int i = 0; i < 9; ++i) h(i) = h0(i / 3, i % 3);
  h.normalize();
  for (int iter = 0; iter < 4 && best_err > 0.0; ++iter) {
    Eigen::Matrix<double, 9, 9> j = Eigen::Matrix<double, 9, 9>::Zero();
    Eigen::Matrix<double, 9, 1> r = Eigen::Matrix<double, 9, 1>::Zero();
    for (int i = 0; i < 4; ++i) {
      using L = long double;
      const double x = src[i].x, y = src[i].y;
      const L w = L(h(6)) * x + L(h(7)) * y + h(8);
      const L px = (L(h(0)) * x + L(h(1)) * y + h(2)) / w, py = (L(h(3)) * x + L(h(4)) * y + h(5)) / w;
      const double wd = static_cast<double>(w), pxd = static_cast<double>(px), pyd = static_cast<double>(py);
      j.row(2 * i) << x / wd, y / wd, 1 / wd, 0, 0, 0, -pxd * x / wd, -pxd * y / wd, -pxd / wd;
      j.row(2 * i + 1) << 0, 0, 0, x / wd, y / wd, 1 / wd, -pyd * x / wd, -pyd * y / wd, -pyd / wd;
      r(2 * i) = static_cast<double>(dst[i].x - px);
      r(2 * i + 1) = static_cast<double>(dst[i].y - py);
    }
    j.row(8) = h.transpose();
    const Eigen::Matrix<double, 9, 1> next = (h + j.colPivHouseholderQr().solve(r)).normalized();
    if (!next.allFinite()) break;
    h = next;
    try {
      const Homography g({h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8)});
      const double e = worst(g);
      if (e < best_err) best = g, best_err = e;
    } catch (const Error&) {
      break;
    }
  }
  return best;
}

double normalized_angle(double theta) noexcept {
  constexpr double kQuarter = std::numbers::pi / 2.0;
  double a = std::fmod(theta, kQuarter);
  if (a < 0.0) a += kQuarter;
  if (a >= kQuarter - 1e-12) a = 0.0;
  return a;
}

}  // namespace

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

bool is_convex_clockwise(const std::array<Point, 4>& corners) noexcept {
  const double scale = scale_squared(corners);
  if (!(scale > 0.0)) return false;
  for (int i = 0; i < 4; ++i) {
    const double turn = cross(corners[(i + 1) % 4] - corners[i], corners[(i + 2) % 4] - corners[(i + 1) % 4]);
    if (!(turn > kTurnTolerance * scale)) return false;
  }
  return true;
}

Quad::Quad(const std::array<Point, 4>& corners) : corners_(corners) {
  for (const Point& p : corners) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::NotConvex, "quad corner is not finite");
    }
  }
  if (!is_convex_clockwise(corners)) {
    throw Error(ErrorCode::NotConvex, "quad corners must be strictly convex and clockwise");
  }
}

Quad Quad::from_rect(double x0, double y0, double x1, double y1) {
  return Quad({Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}});
}

double Quad::area() const noexcept {
  double twice = 0.0;
  for (int i = 0; i < 4; ++i) twice += cross(corners_[i], corners_[(i + 1) % 4]);
  return 0.5 * std::abs(twice);
}

Homography::Homography() noexcept : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& m) : m_(m) {
  for (double v : m_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateConfiguration, "non-finite homography entry");
  }
  if (m_[8] != 0.0) {
    const double s = m_[8];
    for (double& v : m_) v /= s;
  } else {
    double norm = 0.0;
    for (double v : m_) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw Error(ErrorCode::DegenerateConfiguration, "zero homography");
    for (double& v : m_) v /= norm;
  }
  if (std::abs(determinant()) <= kSingularDeterminant) {
    throw Error(ErrorCode::DegenerateConfiguration, "homography is not invertible");
  }
}

Homography Homography::translation(double dx, double dy) noexcept {
  Homography h;
  h.m_[2] = dx;
  h.m_[5] = dy;
  return h;
}

double Homography::determinant() const noexcept {
  const auto& m = m_;
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::inverse() const {
  // Extended precision plus one Newton-Schulz step: strongly projective
  // matrices lose several digits to cancellation in the adjugate.
  using Mat = Eigen::Matrix<long double, 3, 3>;
  Mat h;
  for (int i = 0; i < 9; ++i) h(i / 3, i % 3) = m_[i];
  Mat x = h.inverse();
  x = x * (2.0L * Mat::Identity() - h * x);
  std::array<double, 9> inv{};
  for (int i = 0; i < 9; ++i) inv[i] = static_cast<double>(x(i / 3, i % 3));
  return Homography(inv);
}

Homography Homography::operator*(const Homography& rhs) const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += m_[3 * r + k] * rhs.m_[3 * k + c];
      out[3 * r + c] = acc;
    }
  }
  return Homography(out);
}

Homography estimate_homography(std::span<const Point, 4> src, std::span<const Point, 4> dst) {
  if (any_three_collinear(src) || any_three_collinear(dst)) {
    throw Error(ErrorCode::DegenerateConfiguration, "three of the four correspondences are collinear");
  }
  return refine_exact(solve_dlt(src, dst), src, dst);
}

Homography fit_homography(std::span<const Point> src, std::span<const Point> dst) {
  if (src.size() != dst.size() || src.size() < 4) {
    throw Error(ErrorCode::DegenerateConfiguration, "homography fit needs at least four correspondences");
  }
  return solve_dlt(src, dst);
}

Point project(const Homography& h, Point p) {
  // Extended precision keeps the rounding to one final step per coordinate.
  using L = long double;
  const L x = p.x, y = p.y;
  const L w = h(2, 0) * x + h(2, 1) * y + L(h(2, 2));
  if (std::abs(w) <= kDepthEpsilon) {
    throw Error(ErrorCode::PointAtInfinity, "point maps to infinity");
  }
  return {static_cast<double>((h(0, 0) * x + h(0, 1) * y + L(h(0, 2))) / w),
          static_cast<double>((h(1, 0) * x + h(1, 1) * y + L(h(1, 2))) / w)};
}

std::vector<Point> convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    throw Error(ErrorCode::DegenerateHull, "fewer than three distinct points");
  }

  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) {
    throw Error(ErrorCode::DegenerateHull, "points are collinear");
  }
  return hull;
}

OrientedRect min_area_rect(std::span<const Point> points) {
  const std::vector<Point> hull = convex_hull(points);
  const Point origin = hull.front();

  double best_area = 0.0;
  double best_angle = 0.0;
  std::array<Point, 4> best_corners{};
  bool have_best = false;

  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point edge = hull[(i + 1) % hull.size()] - hull[i];
    const double len = std::hypot(edge.x, edge.y);
    const Point u{edge.x / len, edge.y / len};
    const Point n{-u.y, u.x};

    double a_min = 0.0, a_max = 0.0, b_min = 0.0, b_max = 0.0;
    for (const Point& p : hull) {
      const Point r = p - origin;
      const double a = dot(r, u);
      const double b = dot(r, n);
      a_min = std::min(a_min, a);
      a_max = std::max(a_max, a);
      b_min = std::min(b_min, b);
      b_max = std::max(b_max, b);
    }
    const double area = (a_max - a_min) * (b_max - b_min);
    const double angle = normalized_angle(std::atan2(u.y, u.x));

    bool take = !have_best;
    if (have_best) {
      const double tie = kAreaTieTolerance * std::max(area, best_area);
      if (area < best_area - tie) {
        take = true;
      } else if (std::abs(area - best_area) <= tie && angle < best_angle) {
        take = true;
      }
    }
    if (take) {
      have_best = true;
      best_area = area;
      best_angle = angle;
      const auto at = [&](double a, double b) { return origin + a * u + b * n; };
      best_corners = {at(a_min, b_min), at(a_max, b_min), at(a_max, b_max), at(a_min, b_max)};
    }
  }
  return {order_corners(best_corners), best_angle, best_area};
}

Quad order_corners(std::array<Point, 4> points) {
  Point c{};
  for (const Point& p : points) c = c + 0.25 * p;
  std::array<double, 4> angle{};
  std::array<int, 4> idx{0, 1, 2, 3};
  for (int i = 0; i < 4; ++i) angle[i] = std::atan2(points[i].y - c.y, points[i].x - c.x);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (angle[a] != angle[b]) return angle[a] < angle[b];
    return a < b;
  });
  std::array<Point, 4> cyc{};
  for (int i = 0; i < 4; ++i) cyc[i] = points[idx[i]];
  if (!is_convex_clockwise(cyc)) {
    throw Error(ErrorCode::NotConvex, "corners do not form a convex quadrilateral");
  }

  int tl = 0;
  for (int i = 1; i < 4; ++i) {
    const double s = cyc[i].x + cyc[i].y;
    const double best = cyc[tl].x + cyc[tl].y;
    if (s < best || (s == best && cyc[i].y < cyc[tl].y)) tl = i;
  }
  std::array<Point, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = cyc[(tl + i) % 4];
  return Quad(out);
}

}  // namespace adforge
