#pragma once

#include <array>
#include <span>
#include <vector>

namespace adforge {

// Image coordinates, y grows downward. The centre of pixel (i, j) sits at
// (i + 0.5, j + 0.5).
struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

inline Point operator+(Point a, Point b) noexcept { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) noexcept { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) noexcept { return {s * p.x, s * p.y}; }

inline double cross(Point a, Point b) noexcept { return a.x * b.y - a.y * b.x; }
inline double cross(Point o, Point a, Point b) noexcept { return cross(a - o, b - o); }
inline double dot(Point a, Point b) noexcept { return a.x * b.x + a.y * b.y; }
double distance(Point a, Point b) noexcept;

enum Corner { kTopLeft = 0, kTopRight = 1, kBottomRight = 2, kBottomLeft = 3 };

// Four corners in TL, TR, BR, BL order, clockwise on screen. With y pointing
// down that means every cross(c[i+1]-c[i], c[i+2]-c[i+1]) is positive.
class Quad {
 public:
  // Throws NotConvex unless the corners form a strictly convex, clockwise
  // quadrilateral with positive area.
  explicit Quad(const std::array<Point, 4>& corners);

  // Rectangle [x0, x1] x [y0, y1].
  static Quad from_rect(double x0, double y0, double x1, double y1);

  const std::array<Point, 4>& corners() const noexcept { return corners_; }
  const Point& operator[](int i) const noexcept { return corners_[i]; }
  double area() const noexcept;

  bool operator==(const Quad&) const = default;

 private:
  std::array<Point, 4> corners_;
};

// True when the four points, in the given order, form a strictly convex
// clockwise (on screen) quadrilateral.
bool is_convex_clockwise(const std::array<Point, 4>& corners) noexcept;

// 3x3 projective map, row-major. Normalised so m[8] == 1 when m[8] != 0.
class Homography {
 public:
  Homography() noexcept;  // identity
  explicit Homography(const std::array<double, 9>& m);

  static Homography translation(double dx, double dy) noexcept;

  double operator()(int row, int col) const noexcept { return m_[3 * row + col]; }
  const std::array<double, 9>& matrix() const noexcept { return m_; }

  double determinant() const noexcept;
  Homography inverse() const;

  // this * rhs: apply rhs first.
  Homography operator*(const Homography& rhs) const;

 private:
  std::array<double, 9> m_;
};

// Exactly-four-point normalized DLT. Throws DegenerateConfiguration when any
// three points of either set are collinear.
Homography estimate_homography(std::span<const Point, 4> src, std::span<const Point, 4> dst);

// Least-squares normalized DLT over n >= 4 correspondences.
Homography fit_homography(std::span<const Point> src, std::span<const Point> dst);

// Throws PointAtInfinity when the homogeneous depth vanishes.
Point project(const Homography& h, Point p);

// Monotone chain. Returns vertices counter-clockwise in the y-up sense
// (positive shoelace area), which reads clockwise on screen. Collinear points
// on hull edges are dropped. Throws DegenerateHull.
std::vector<Point> convex_hull(std::span<const Point> points);

struct OrientedRect {
  Quad quad;
  double angle;  // edge direction in [0, pi/2)
  double area;
};

// Rotating calipers over the hull of `points`.
OrientedRect min_area_rect(std::span<const Point> points);

// Canonical TL, TR, BR, BL ordering; TL minimises x + y (ties: smaller y).
// Throws NotConvex for mixed or vanishing turn directions.
Quad order_corners(std::array<Point, 4> points);

}  // namespace adforge
