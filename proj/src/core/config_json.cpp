#include "core/config_json.hpp"

#include <initializer_list>
#include <string>

#include "core/error.hpp"

namespace adforge {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::SchemaViolation, what); }

void require_object(const json& j, const char* what, std::initializer_list<const char*> keys) {
  if (!j.is_object()) schema(std::string(what) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) schema(std::string("unknown key '") + key + "' in " + what);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_same_v<T, int>) {
    if (!it->is_number_integer()) schema(std::string(key) + " must be an integer");
    out = it->get<int>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!it->is_number_unsigned()) schema(std::string(key) + " must be a non-negative integer");
    out = it->get<std::uint64_t>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!it->is_number()) schema(std::string(key) + " must be a number");
    out = it->get<double>();
  } else {
    if (!it->is_string()) schema(std::string(key) + " must be a string");
    out = it->get<std::string>();
  }
}

Point point_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    schema(std::string(what) + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::array<double, 3> color_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) schema("color must be [r, g, b]");
  std::array<double, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    if (!j[c].is_number()) schema("color must be [r, g, b]");
    rgb[c] = j[c].get<double>();
  }
  return rgb;
}

}  // namespace

void apply_track_json(const json& j, TrackParams& p) {
  require_object(j, "track",
                 {"window", "pyramid_levels", "max_iterations", "convergence_epsilon", "min_eigenvalue", "max_features",
                  "feature_quality", "min_feature_distance", "reprojection_inlier_threshold"});
  read(j, "window", p.window);
  read(j, "pyramid_levels", p.pyramid_levels);
  read(j, "max_iterations", p.max_iterations);
  read(j, "convergence_epsilon", p.convergence_epsilon);
  read(j, "min_eigenvalue", p.min_eigenvalue);
  read(j, "max_features", p.max_features);
  read(j, "feature_quality", p.feature_quality);
  read(j, "min_feature_distance", p.min_feature_distance);
  read(j, "reprojection_inlier_threshold", p.reprojection_inlier_threshold);
}

void apply_blend_json(const json& j, BlendConfig& cfg) {
  require_object(j, "blend", {"mode", "solver_tolerance", "max_iterations"});
  if (j.contains("mode")) {
    std::string mode;
    read(j, "mode", mode);
    if (mode == "poisson") {
      cfg.mode = BlendMode::Poisson;
    } else if (mode == "direct") {
      cfg.mode = BlendMode::Direct;
    } else {
      schema("blend mode must be 'poisson' or 'direct'");
    }
  }
  read(j, "solver_tolerance", cfg.solver_tolerance);
  read(j, "max_iterations", cfg.max_iterations);
}

DetectorSource detector_from_json(const json& j) {
  require_object(j, "detector", {"heatmaps", "baseline"});
  if (j.contains("heatmaps") == j.contains("baseline")) schema("detector needs exactly one of heatmaps, baseline");
  if (j.contains("heatmaps")) {
    const json& h = j["heatmaps"];
    require_object(h, "heatmaps", {"dir", "stem"});
    if (!h.contains("dir")) schema("heatmaps.dir is required");
    HeatmapFiles files;
    std::string dir;
    read(h, "dir", dir);
    files.dir = dir;
    read(h, "stem", files.stem);
    return files;
  }
  const json& b = j["baseline"];
  require_object(b, "baseline", {"color", "sigma"});
  ChromaBaseline baseline;
  if (b.contains("color")) baseline.reference = color_from_json(b["color"]);
  read(b, "sigma", baseline.sigma);
  return baseline;
}

json detector_to_json(const DetectorSource& source) {
  if (const auto* files = std::get_if<HeatmapFiles>(&source)) {
    return {{"heatmaps", {{"dir", files->dir.string()}, {"stem", files->stem}}}};
  }
  const auto& b = std::get<ChromaBaseline>(source);
  return {{"baseline", {{"color", b.reference}, {"sigma", b.sigma}}}};
}

void apply_job_json(const json& j, JobConfig& cfg) {
  require_object(j, "job options", {"detector", "stride", "cutoff", "threshold", "min_area", "blend", "track"});
  if (j.contains("detector")) cfg.detector = detector_from_json(j["detector"]);
  read(j, "stride", cfg.keyframe.stride);
  read(j, "cutoff", cfg.keyframe.cutoff);
  read(j, "threshold", cfg.threshold);
  if (j.contains("min_area")) {
    double area = 0.0;
    read(j, "min_area", area);
    cfg.min_area = area;
  }
  if (j.contains("blend")) apply_blend_json(j["blend"], cfg.blend);
  if (j.contains("track")) apply_track_json(j["track"], cfg.track);
}

SceneSpec scene_spec_from_json(const json& j) {
  require_object(j, "scene",
                 {"width", "height", "frame_rate", "seed", "billboard_width", "billboard_height", "billboard_color",
                  "texture_amplitude", "border", "initial_quad", "frames", "step", "tilt", "bezel"});
  SceneSpec spec;
  read(j, "width", spec.width);
  read(j, "height", spec.height);
  if (j.contains("frame_rate")) {
    const json& r = j["frame_rate"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
      schema("frame_rate must be [num, den]");
    }
    spec.frame_rate = {r[0].get<int>(), r[1].get<int>()};
  }
  read(j, "seed", spec.seed);
  read(j, "billboard_width", spec.billboard_width);
  read(j, "billboard_height", spec.billboard_height);
  if (j.contains("billboard_color")) spec.billboard_color = color_from_json(j["billboard_color"]);
  read(j, "texture_amplitude", spec.texture_amplitude);
  read(j, "bezel", spec.bezel);
  read(j, "border", spec.border);
  if (j.contains("initial_quad")) spec.initial_quad = quad_from_json(j["initial_quad"]);

  int frames = 60;
  read(j, "frames", frames);
  if (frames < 1) schema("frames must be at least 1");
  if (spec.width < 16 || spec.height < 16) schema("scene must be at least 16x16");
  if (spec.billboard_width < 2 || spec.billboard_height < 2) schema("billboard must be at least 2x2");
  if (spec.frame_rate.num < 1 || spec.frame_rate.den < 1) schema("frame_rate terms must be positive");
  const Point step = j.contains("step") ? point_from_json(j["step"], "step") : Point{0.5, 0.25};
  const Point tilt = j.contains("tilt") ? point_from_json(j["tilt"], "tilt") : Point{0.0, 0.0};
  spec.motion = drifting_motion(spec.initial_quad, frames, step, tilt);
  return spec;
}

json quad_to_json(const Quad& quad) {
  json out = json::array();
  for (const Point& p : quad.corners()) out.push_back({p.x, p.y});
  return out;
}

Quad quad_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) schema("corners must hold exactly four [x, y] points");
  std::array<Point, 4> pts{};
  for (int i = 0; i < 4; ++i) pts[i] = point_from_json(j[i], "corner");
  return Quad(pts);
}

}  // namespace adforge
