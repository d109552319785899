#pragma once

#include <vector>

#include "core/geometry.hpp"
#include "core/imagecore.hpp"
#include "core/maskops.hpp"

namespace adforge {

struct TrackParams {
  int window = 7;  // half-size: 7 gives a 15x15 window
  int pyramid_levels = 3;
  int max_iterations = 20;
  double convergence_epsilon = 0.01;
  // Cutoff on the smallest eigenvalue of the window-summed structure tensor.
  double min_eigenvalue = 1e-4;
  int max_features = 100;
  double feature_quality = 0.05;
  double min_feature_distance = 8.0;
  double reprojection_inlier_threshold = 1.5;

  // Throws InvalidArgument.
  void validate() const;
};

// Re-detection and loss both trigger below this many features.
inline constexpr std::size_t kMinTrackedFeatures = 8;

enum class FeatureStatus { Alive, Lost };

struct Feature {
  Point position;
  FeatureStatus status = FeatureStatus::Alive;
};

struct TrackState {
  Quad quad;
  std::vector<Feature> features;
  int frame_index = 0;
  Homography cumulative;  // keyframe plane -> current frame

  // Diagnostics of the most recent update.
  Homography step;
  std::size_t inliers = 0;
  double max_inlier_error = 0.0;
  std::vector<double> round_max_errors;  // max inlier error after each fit

  std::size_t alive_count() const noexcept;
};

struct PointTrack {
  Point position;
  bool alive = false;
  double residual = 0.0;  // mean absolute intensity residual over the window
};

// Per-level derivative fields of a pyramid, computed once per frame.
struct PyramidGradients {
  std::vector<Gradients> levels;
};

PyramidGradients pyramid_gradients(const Pyramid& pyramid);

// Smallest eigenvalue of the window-summed structure tensor at every pixel.
// Windows are clipped at the image border.
GrayImage min_eigenvalue_map(const GrayImage& gray, int window);

// Shi-Tomasi selection inside `roi`. Points are returned as pixel centres in
// image coordinates, strongest first. A pixel counts as a local maximum when
// it beats its already-scanned neighbours strictly and the rest weakly, so a
// plateau yields one candidate. Throws NoFeatures.
std::vector<Point> good_features(const GrayImage& gray, const BinaryMask& roi, const TrackParams& params);

// Coarse-to-fine Lucas-Kanade. `p0` and the result are image coordinates.
PointTrack track_point(const Pyramid& prev, const Pyramid& next, Point p0, const TrackParams& params);
PointTrack track_point(const Pyramid& prev, const PyramidGradients& prev_gradients, const Pyramid& next, Point p0,
                       const TrackParams& params);

// Detects features inside the quad (shrunk by the window size where
// possible) on the keyframe.
TrackState start_tracking(const Frame& keyframe, const Quad& quad, int frame_index, const TrackParams& params);

// Advances the state by one frame. Throws TrackingLost.
TrackState update_quad(const Frame& prev_frame, const Frame& next_frame, const TrackState& state,
                       const TrackParams& params);

}  // namespace adforge
