#include "core/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "core/detector.hpp"
#include "core/error.hpp"

namespace adforge {

namespace {

constexpr int kSceneMargin = 8;
constexpr int kTextureRadius = 1;

void box_blur(std::vector<double>& v, int w, int h, int r) {
  std::vector<double> tmp(v.size());
  const double norm = 1.0 / (2 * r + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += v[static_cast<std::size_t>(y) * w + std::clamp(x + k, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc * norm;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
      v[static_cast<std::size_t>(y) * w + x] = acc * norm;
    }
  }
}

double quantized(double v) { return std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5) / 255.0; }

Frame make_billboard(const SceneSpec& spec) {
  const GrayImage n = smooth_noise(spec.billboard_width, spec.billboard_height, spec.seed * 2 + 1, kTextureRadius);
  Frame f(spec.billboard_width, spec.billboard_height);
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const bool border = std::min({x, y, f.width() - 1 - x, f.height() - 1 - y}) < spec.border;
      const double delta = border ? 0.0 : spec.texture_amplitude * (2.0 * n.at(x, y) - 1.0);
      for (int c = 0; c < 3; ++c) f.at(x, y, c) = quantized(spec.billboard_color[c] + delta);
    }
  }
  return f;
}

Frame make_background(const SceneSpec& spec) {
  const GrayImage luma = smooth_noise(spec.width, spec.height, spec.seed * 2 + 2, 3);
  const GrayImage tint = smooth_noise(spec.width, spec.height, spec.seed * 2 + 3, 6);
  Frame f(spec.width, spec.height);
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const double l = 0.25 * (luma.at(x, y) - 0.5);
      const double t = 0.1 * (tint.at(x, y) - 0.5);
      f.at(x, y, 0) = quantized(0.58 + l + t);
      f.at(x, y, 1) = quantized(0.50 + l);
      f.at(x, y, 2) = quantized(0.45 + l - t);
    }
  }
  return f;
}

Frame make_advert(int w, int h) {
  Frame f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f.at(x, y, 0) = quantized(0.5 + 0.45 * std::sin(x / 7.0));
      f.at(x, y, 1) = quantized(0.15 + 0.7 * y / static_cast<double>(h));
      f.at(x, y, 2) = quantized(0.5 + 0.45 * std::cos((x + y) / 11.0));
    }
  }
  return f;
}

BinaryMask dilate(const BinaryMask& m, int r) {
  if (r <= 0) return m;
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool hit = false;
      for (int dy = -r; dy <= r && !hit; ++dy) {
        for (int dx = -r; dx <= r && !hit; ++dx) hit = m.contains(x + dx, y + dy);
      }
      out.set(x, y, hit);
    }
  }
  return out;
}

}  // namespace

GrayImage smooth_noise(int width, int height, std::uint64_t seed, int radius) {
  SceneRng rng(seed);
  GrayImage img(width, height);
  for (double& v : img.data()) v = rng.uniform();
  for (int pass = 0; pass < 3; ++pass) box_blur(img.data(), width, height, radius);
  const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
  const double min = *lo, span = *hi - *lo;
  for (double& v : img.data()) v = span > 0.0 ? (v - min) / span : 0.5;
  return img;
}

std::vector<Homography> drifting_motion(const Quad& initial, int frame_count, Point step, Point tilt) {
  Point c{};
  for (const Point& p : initial.corners()) c = c + 0.25 * p;
  std::vector<Homography> motion;
  motion.reserve(static_cast<std::size_t>(frame_count));
  for (int k = 0; k < frame_count; ++k) {
    const Homography perspective({1, 0, 0, 0, 1, 0, k * tilt.x, k * tilt.y, 1});
    motion.push_back(Homography::translation(c.x + k * step.x, c.y + k * step.y) * perspective *
                     Homography::translation(-c.x, -c.y));
  }
  return motion;
}

SyntheticScene generate_synthetic_scene(const SceneSpec& spec) {
  if (spec.motion.empty()) throw Error(ErrorCode::InvalidArgument, "scene needs at least one frame of motion");
  if (spec.bezel < 0) throw Error(ErrorCode::InvalidArgument, "bezel must be non-negative");
  if (spec.border < 0) throw Error(ErrorCode::InvalidArgument, "border must be non-negative");

  SyntheticScene scene;
  scene.billboard = make_billboard(spec);
  scene.advert = make_advert(spec.billboard_width, spec.billboard_height);
  const Frame background = make_background(spec);

  const Quad texture_rect = Quad::from_rect(0, 0, spec.billboard_width, spec.billboard_height);
  const Homography placement0 = estimate_homography(texture_rect.corners(), spec.initial_quad.corners());
  const double margin = kSceneMargin + spec.bezel;

  for (std::size_t k = 0; k < spec.motion.size(); ++k) {
    const Homography g = spec.motion[k] * placement0;
    std::array<Point, 4> corners{};
    for (int i = 0; i < 4; ++i) {
      corners[i] = project(g, texture_rect[i]);
      if (corners[i].x < margin || corners[i].y < margin || corners[i].x > spec.width - margin ||
          corners[i].y > spec.height - margin) {
        throw Error(ErrorCode::QuadOutOfBounds, "billboard leaves the frame at frame " + std::to_string(k));
      }
    }
    const Quad quad(corners);
    const BinaryMask inside = rasterize_quad(quad, spec.width, spec.height);
    const BinaryMask painted = dilate(inside, spec.bezel);
    const Homography inv = g.inverse();

    Frame frame = background;
    Heatmap heat(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        heat.at(x, y) = inside.at(x, y) ? 0.95 : 0.05;
        if (!painted.at(x, y)) continue;
        const Point s = project(inv, {x + 0.5, y + 0.5});
        double rgb[3];
        bilinear_sample_rgb(scene.billboard, s.x - 0.5, s.y - 0.5, rgb);
        for (int c = 0; c < 3; ++c) frame.at(x, y, c) = quantized(rgb[c]);
      }
    }
    scene.frames.push_back(std::move(frame));
    scene.quads.push_back(quad);
    scene.placement.push_back(g);
    scene.heatmaps.push_back(std::move(heat));
  }
  return scene;
}

void save_synthetic_scene(const SyntheticScene& scene, const SceneSpec& spec, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "heatmaps");
  const VideoStream params{spec.width, spec.height, spec.frame_rate, scene.frames.size()};
  write_y4m(dir / "video.y4m", params, scene.frames);
  const HeatmapFiles files{dir / "heatmaps", "heatmap"};
  for (std::size_t k = 0; k < scene.heatmaps.size(); ++k) {
    write_heatmap_pgm(heatmap_path(files, static_cast<int>(k)), scene.heatmaps[k]);
  }
  nlohmann::json truth = nlohmann::json::array();
  for (std::size_t k = 0; k < scene.quads.size(); ++k) {
    nlohmann::json corners = nlohmann::json::array();
    for (const Point& p : scene.quads[k].corners()) corners.push_back({p.x, p.y});
    truth.push_back({{"frame", k}, {"corners", corners}});
  }
  std::ofstream out(dir / "truth.json");
  out << truth.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / "truth.json").string());
  write_png(dir / "billboard.png", scene.billboard);
  write_png(dir / "advert.png", scene.advert);
}

}  // namespace adforge
