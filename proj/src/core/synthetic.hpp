#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "core/detector.hpp"
#include "core/geometry.hpp"
#include "core/imagecore.hpp"
#include "core/maskops.hpp"
#include "core/videoio.hpp"

namespace adforge {

// mt19937_64 output is fixed by the standard; the conversion to double is
// done here rather than by a std distribution so a seed means the same
// numbers on every standard library.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

// White noise blurred by three box passes of the given radius, then
// stretched to [0, 1].
GrayImage smooth_noise(int width, int height, std::uint64_t seed, int radius);

struct SceneSpec {
  int width = 320;
  int height = 240;
  FrameRate frame_rate{30, 1};
  std::uint64_t seed = 1;
  int billboard_width = 120;
  int billboard_height = 80;
  std::array<double, 3> billboard_color = kBillboardGreen;
  double texture_amplitude = 0.2;  // luma swing of the billboard artwork
  // Solid band of billboard_color around the artwork, in texels. It is what
  // the chroma baseline actually finds; the artwork itself is too colourful.
  int border = 4;
  // Placement of the billboard on frame 0.
  Quad initial_quad = Quad::from_rect(70, 60, 190, 140);
  // Absolute motion of each frame relative to frame 0; one per frame.
  std::vector<Homography> motion;
  // Pixels around the billboard filled with its clamped edge colours, a
  // physical frame around the panel.
  int bezel = 0;
};

struct SyntheticScene {
  std::vector<Frame> frames;
  std::vector<Quad> quads;            // ground-truth billboard corners per frame
  std::vector<Homography> placement;  // billboard texture -> frame, per frame
  std::vector<Heatmap> heatmaps;      // 0.95 inside the quad, 0.05 outside
  Frame billboard;                    // the texture that was placed
  Frame advert;                       // a distinct creative of the same size
};

// Frame k moves the billboard by k * step about its centre and accumulates a
// perspective tilt of k * tilt.
std::vector<Homography> drifting_motion(const Quad& initial, int frame_count, Point step, Point tilt);

// Throws QuadOutOfBounds when a quad (plus bezel) comes within 8 px of the
// frame edge.
SyntheticScene generate_synthetic_scene(const SceneSpec& spec);

// Writes video.y4m, heatmaps/heatmap_%06d.pgm, truth.json (per-frame corner
// lists), billboard.png and advert.png into `dir`, creating it if needed.
void save_synthetic_scene(const SyntheticScene& scene, const SceneSpec& spec, const std::filesystem::path& dir);

}  // namespace adforge
