#pragma once

#include <json.hpp>

#include "core/compositor.hpp"
#include "core/detector.hpp"
#include "core/pipeline.hpp"
#include "core/synthetic.hpp"
#include "core/tracker.hpp"

namespace adforge {

// JSON option objects shared by the CLI, the C API and the service. Each
// apply_* overwrites only the keys present; unknown keys and wrong types
// throw SchemaViolation.

void apply_track_json(const nlohmann::json& j, TrackParams& params);
void apply_blend_json(const nlohmann::json& j, BlendConfig& cfg);

// {"heatmaps": {"dir": D, "stem": S}} or {"baseline": {"color": [r,g,b], "sigma": s}}
DetectorSource detector_from_json(const nlohmann::json& j);
nlohmann::json detector_to_json(const DetectorSource& source);

// Keys: detector, stride, cutoff, threshold, min_area, blend, track.
void apply_job_json(const nlohmann::json& j, JobConfig& cfg);

// Keys mirror SceneSpec; motion is given as "frames", "step": [dx, dy] and
// "tilt": [px, py] and expanded with drifting_motion.
SceneSpec scene_spec_from_json(const nlohmann::json& j);

nlohmann::json quad_to_json(const Quad& quad);
// Throws SchemaViolation, NotConvex.
Quad quad_from_json(const nlohmann::json& j);

}  // namespace adforge
