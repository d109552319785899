#include "core/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace adforge {

namespace {

constexpr double kMaxResidual = 0.1;
constexpr int kMaxRefitRounds = 5;

double min_eigenvalue(double gxx, double gxy, double gyy) noexcept {
  const double half_trace = 0.5 * (gxx + gyy);
  const double half_diff = 0.5 * (gxx - gyy);
  return half_trace - std::sqrt(half_diff * half_diff + gxy * gxy);
}

// Summed-area table with a zero first row and column.
class IntegralImage {
 public:
  IntegralImage(int width, int height) : w_(width + 1), sums_(static_cast<std::size_t>(width + 1) * (height + 1)) {}

  void build(int width, int height, auto&& value) {
    for (int y = 0; y < height; ++y) {
      double row = 0.0;
      for (int x = 0; x < width; ++x) {
        row += value(x, y);
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }

  // Sum over [x0, x1] x [y0, y1], inclusive.
  double sum(int x0, int y0, int x1, int y1) const noexcept {
    return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
  }

 private:
  double& at(int x, int y) noexcept { return sums_[static_cast<std::size_t>(y) * w_ + x]; }
  double at(int x, int y) const noexcept { return sums_[static_cast<std::size_t>(y) * w_ + x]; }

  int w_;
  std::vector<double> sums_;
};

BinaryMask erode(const BinaryMask& mask, int radius) {
  const int w = mask.width();
  const int h = mask.height();
  IntegralImage counts(w, h);
  counts.build(w, h, [&](int x, int y) { return mask.at(x, y) ? 1.0 : 0.0; });
  const double full = static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  BinaryMask out(w, h);
  for (int y = radius; y < h - radius; ++y) {
    for (int x = radius; x < w - radius; ++x) {
      if (mask.at(x, y) && counts.sum(x - radius, y - radius, x + radius, y + radius) == full) out.set(x, y, true);
    }
  }
  return out;
}

BinaryMask feature_roi(const Quad& quad, int width, int height, int window) {
  const BinaryMask inside = rasterize_quad(quad, width, height);
  BinaryMask shrunk = erode(inside, window);
  return shrunk.count() > 0 ? shrunk : inside;
}

Pyramid gray_pyramid(const Frame& frame, int levels) { return build_pyramid(to_grayscale(frame), levels); }

std::vector<Feature> detect_features(const GrayImage& gray, const Quad& quad, const TrackParams& params) {
  const BinaryMask roi = feature_roi(quad, gray.width(), gray.height(), params.window);
  std::vector<Feature> features;
  for (const Point& p : good_features(gray, roi, params)) features.push_back({p, FeatureStatus::Alive});
  return features;
}

[[noreturn]] void lost(const std::string& why) { throw Error(ErrorCode::TrackingLost, why); }

}  // namespace

void TrackParams::validate() const {
  const bool ok = window > 0 && pyramid_levels >= 1 && max_iterations > 0 && convergence_epsilon > 0.0 &&
                  min_eigenvalue > 0.0 && max_features > 0 && feature_quality > 0.0 && feature_quality < 1.0 &&
                  min_feature_distance > 0.0 && reprojection_inlier_threshold > 0.0;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "tracking parameters must be positive, quality in (0,1)");
}

std::size_t TrackState::alive_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(features.begin(), features.end(),
                                                [](const Feature& f) { return f.status == FeatureStatus::Alive; }));
}

PyramidGradients pyramid_gradients(const Pyramid& pyramid) {
  PyramidGradients g;
  g.levels.reserve(pyramid.size());
  for (const GrayImage& level : pyramid.levels) g.levels.push_back(gradient(level));
  return g;
}

GrayImage min_eigenvalue_map(const GrayImage& gray, int window) {
  const Gradients g = gradient(gray);
  const int w = gray.width();
  const int h = gray.height();
  IntegralImage sxx(w, h), sxy(w, h), syy(w, h);
  sxx.build(w, h, [&](int x, int y) { return g.ix.at(x, y) * g.ix.at(x, y); });
  sxy.build(w, h, [&](int x, int y) { return g.ix.at(x, y) * g.iy.at(x, y); });
  syy.build(w, h, [&](int x, int y) { return g.iy.at(x, y) * g.iy.at(x, y); });

  GrayImage scores(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - window), y1 = std::min(h - 1, y + window);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - window), x1 = std::min(w - 1, x + window);
      const double e = min_eigenvalue(sxx.sum(x0, y0, x1, y1), sxy.sum(x0, y0, x1, y1), syy.sum(x0, y0, x1, y1));
      scores.at(x, y) = std::max(e, 0.0);
    }
  }
  return scores;
}

std::vector<Point> good_features(const GrayImage& gray, const BinaryMask& roi, const TrackParams& params) {
  params.validate();
  if (roi.width() != gray.width() || roi.height() != gray.height()) {
    throw Error(ErrorCode::DimensionMismatch, "roi and image sizes differ");
  }
  const GrayImage scores = min_eigenvalue_map(gray, params.window);
  const int w = gray.width();
  const int h = gray.height();
  const int margin = params.window;

  double best = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (roi.at(x, y)) best = std::max(best, scores.at(x, y));
    }
  }
  const double cutoff = std::max(params.feature_quality * best, params.min_eigenvalue);

  struct Candidate {
    double score;
    int x, y;
  };
  std::vector<Candidate> candidates;
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) {
      const double s = scores.at(x, y);
      if (!roi.at(x, y) || s <= 0.0 || s < cutoff) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1 && peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const bool scanned_before = dy < 0 || (dy == 0 && dx < 0);
          const double ns = scores.at(nx, ny);
          if (scanned_before ? ns >= s : ns > s) {
            peak = false;
            break;
          }
        }
      }
      if (peak) candidates.push_back({s, x, y});
    }
  }
  // Stable: equal scores keep raster order.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

  std::vector<Point> picked;
  const double min_d2 = params.min_feature_distance * params.min_feature_distance;
  for (const Candidate& c : candidates) {
    if (static_cast<int>(picked.size()) >= params.max_features) break;
    const Point p{c.x + 0.5, c.y + 0.5};
    const bool far_enough = std::all_of(picked.begin(), picked.end(), [&](const Point& q) {
      const Point d = p - q;
      return dot(d, d) >= min_d2;
    });
    if (far_enough) picked.push_back(p);
  }
  if (picked.empty()) throw Error(ErrorCode::NoFeatures, "no pixel passes the corner-quality cutoff");
  return picked;
}

PointTrack track_point(const Pyramid& prev, const Pyramid& next, Point p0, const TrackParams& params) {
  return track_point(prev, pyramid_gradients(prev), next, p0, params);
}

PointTrack track_point(const Pyramid& prev, const PyramidGradients& prev_gradients, const Pyramid& next, Point p0,
                       const TrackParams& params) {
  const int top = static_cast<int>(std::min(prev.size(), next.size())) - 1;
  const int win = params.window;
  const int side = 2 * win + 1;
  const double area = static_cast<double>(side * side);

  // Sample coordinates: decimation keeps even samples, so a level-L sample
  // coordinate is the level-0 one divided by 2^L.
  const Point base{p0.x - 0.5, p0.y - 0.5};
  Point guess{0.0, 0.0};
  Point flow{0.0, 0.0};
  bool alive = true;

  std::vector<double> patch(side * side), gx(side * side), gy(side * side);
  for (int level = top; level >= 0; --level) {
    const GrayImage& img0 = prev[level];
    const GrayImage& img1 = next[level];
    const Gradients& grad = prev_gradients.levels[level];
    const double scale = 1.0 / static_cast<double>(1 << level);
    const Point p{base.x * scale, base.y * scale};

    double gxx = 0.0, gxy = 0.0, gyy = 0.0;
    for (int j = 0; j < side; ++j) {
      for (int i = 0; i < side; ++i) {
        const double x = p.x + i - win;
        const double y = p.y + j - win;
        const int k = j * side + i;
        patch[k] = bilinear_sample(img0, x, y);
        gx[k] = bilinear_sample(grad.ix, x, y);
        gy[k] = bilinear_sample(grad.iy, x, y);
        gxx += gx[k] * gx[k];
        gxy += gx[k] * gy[k];
        gyy += gy[k] * gy[k];
      }
    }
    if (min_eigenvalue(gxx, gxy, gyy) < params.min_eigenvalue) {
      alive = false;
      break;
    }
    const double det = gxx * gyy - gxy * gxy;

    flow = {0.0, 0.0};
    for (int iter = 0; iter < params.max_iterations; ++iter) {
      const Point shift = guess + flow;
      double bx = 0.0, by = 0.0;
      for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) {
          const int k = j * side + i;
          const double diff = patch[k] - bilinear_sample(img1, p.x + shift.x + i - win, p.y + shift.y + j - win);
          bx += gx[k] * diff;
          by += gy[k] * diff;
        }
      }
      const Point step{(gyy * bx - gxy * by) / det, (gxx * by - gxy * bx) / det};
      flow = flow + step;
      if (std::hypot(step.x, step.y) < params.convergence_epsilon) break;
    }
    if (level > 0) guess = 2.0 * (guess + flow);
  }

  PointTrack result;
  const Point total = guess + flow;
  result.position = p0 + total;
  if (!alive) return result;

  const GrayImage& img0 = prev[0];
  const GrayImage& img1 = next[0];
  const Point end = base + total;
  if (!(end.x >= 0.0 && end.y >= 0.0 && end.x <= img0.width() - 1 && end.y <= img0.height() - 1)) return result;

  double residual = 0.0;
  for (int j = -win; j <= win; ++j) {
    for (int i = -win; i <= win; ++i) {
      residual += std::abs(bilinear_sample(img0, base.x + i, base.y + j) - bilinear_sample(img1, end.x + i, end.y + j));
    }
  }
  result.residual = residual / area;
  result.alive = result.residual <= kMaxResidual;
  return result;
}

TrackState start_tracking(const Frame& keyframe, const Quad& quad, int frame_index, const TrackParams& params) {
  params.validate();
  TrackState state{quad, detect_features(to_grayscale(keyframe), quad, params), frame_index, Homography{},
                   Homography{}, 0, 0.0, {}};
  state.inliers = state.features.size();
  return state;
}

TrackState update_quad(const Frame& prev_frame, const Frame& next_frame, const TrackState& state,
                       const TrackParams& params) {
  params.validate();
  if (prev_frame.width() != next_frame.width() || prev_frame.height() != next_frame.height()) {
    throw Error(ErrorCode::DimensionMismatch, "consecutive frames differ in size");
  }
  const Pyramid prev = gray_pyramid(prev_frame, params.pyramid_levels);
  const Pyramid next = gray_pyramid(next_frame, params.pyramid_levels);
  const PyramidGradients prev_grad = pyramid_gradients(prev);

  std::vector<Point> sources;
  if (state.alive_count() < kMinTrackedFeatures) {
    try {
      for (const Feature& f : detect_features(prev[0], state.quad, params)) sources.push_back(f.position);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoFeatures) throw;
      lost("no trackable texture inside the quad");
    }
  } else {
    for (const Feature& f : state.features) {
      if (f.status == FeatureStatus::Alive) sources.push_back(f.position);
    }
  }

  std::vector<PointTrack> tracks(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    tracks[i] = track_point(prev, prev_grad, next, sources[i], params);
  }

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].alive) members.push_back(i);
  }

  TrackState out = state;
  out.round_max_errors.clear();
  Homography step;
  std::vector<double> errors;
  for (int round = 0;; ++round) {
    if (members.size() < kMinTrackedFeatures) {
      lost(std::to_string(members.size()) + " inlier features left");
    }
    std::vector<Point> src, dst;
    for (std::size_t i : members) {
      src.push_back(sources[i]);
      dst.push_back(tracks[i].position);
    }
    try {
      step = fit_homography(src, dst);
      errors.assign(members.size(), 0.0);
      for (std::size_t k = 0; k < members.size(); ++k) errors[k] = distance(project(step, src[k]), dst[k]);
    } catch (const Error&) {
      lost("degenerate feature configuration");
    }
    out.round_max_errors.push_back(*std::max_element(errors.begin(), errors.end()));

    const bool all_inside = std::all_of(errors.begin(), errors.end(),
                                        [&](double e) { return e <= params.reprojection_inlier_threshold; });
    if (all_inside || round == kMaxRefitRounds) break;
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (errors[k] <= params.reprojection_inlier_threshold) kept.push_back(members[k]);
    }
    members = std::move(kept);
  }

  std::array<Point, 4> corners{};
  try {
    for (int c = 0; c < 4; ++c) corners[c] = project(step, state.quad[c]);
    out.quad = Quad(corners);
  } catch (const Error&) {
    lost("updated quad is not convex");
  }

  out.features.clear();
  std::vector<bool> inlier(tracks.size(), false);
  for (std::size_t i : members) inlier[i] = true;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    out.features.push_back({tracks[i].position, inlier[i] ? FeatureStatus::Alive : FeatureStatus::Lost});
  }
  out.step = step;
  out.cumulative = step * state.cumulative;
  out.inliers = members.size();
  out.max_inlier_error = out.round_max_errors.back();
  out.frame_index = state.frame_index + 1;
  return out;
}

}  // namespace adforge
