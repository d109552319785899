#include "core/pipeline.hpp"

#include <algorithm>
#include <future>
#include <json.hpp>

#include "core/error.hpp"

namespace adforge {

namespace {

using nlohmann::json;

struct Rendered {
  Frame image;
  double residual = 0.0;
  bool converged = true;
};

Rendered render_frame(const Frame& frame, const Advert& advert, const Homography& placement, const BlendConfig& cfg) {
  const Warped warped = warp_advert(advert, placement, frame.width(), frame.height());
  if (cfg.mode == BlendMode::Direct) {
    return {clamp_frame(direct_composite(frame, warped.image, warped.omega)), 0.0, true};
  }
  try {
    BlendResult blended = poisson_blend(frame, warped.image, warped.omega, cfg);
    return {clamp_frame(std::move(blended.image)), blended.residual, blended.converged};
  } catch (const Error& e) {
    // Poisson needs a full ring of Dirichlet data; at the frame edge fall back
    // to a hard composite.
    if (e.code() != ErrorCode::OmegaTouchesBorder) throw;
    return {clamp_frame(direct_composite(frame, warped.image, warped.omega)), 0.0, true};
  }
}

bool ends_tracking(ErrorCode code) {
  switch (code) {
    case ErrorCode::TrackingLost:
    case ErrorCode::NoFeatures:
    case ErrorCode::EmptyOmega:
    case ErrorCode::PointAtInfinity:
    case ErrorCode::NotConvex:
    case ErrorCode::DegenerateConfiguration:
      return true;
    default:
      return false;
  }
}

}  // namespace

MemoryFrameSource::MemoryFrameSource(std::vector<Frame> frames, FrameRate rate) : frames_(std::move(frames)) {
  if (frames_.empty()) throw Error(ErrorCode::InvalidArgument, "video has no frames");
  stream_ = {frames_.front().width(), frames_.front().height(), rate, frames_.size()};
}

std::optional<Frame> MemoryFrameSource::next() {
  if (cursor_ >= frames_.size()) return std::nullopt;
  return frames_[cursor_++];
}

double JobConfig::min_area_for(int width, int height) const {
  return min_area ? *min_area : kDefaultMinAreaFraction * width * height;
}

void JobConfig::validate() const {
  if (keyframe.stride < 1) throw Error(ErrorCode::InvalidArgument, "keyframe stride must be at least 1");
  if (!(keyframe.cutoff >= 0.0 && keyframe.cutoff <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "recognition cutoff must lie in [0,1]");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0,1]");
  if (min_area && *min_area < 0.0) throw Error(ErrorCode::InvalidArgument, "min_area must be non-negative");
  blend.validate();
  track.validate();
}

const char* frame_status_name(FrameStatus s) noexcept {
  switch (s) {
    case FrameStatus::Passthrough: return "passthrough";
    case FrameStatus::Rendered: return "rendered";
    case FrameStatus::LostPassthrough: return "lost-passthrough";
  }
  return "unknown";
}

std::string report_json(const RenderReport& report) {
  json frames = json::array();
  for (const FrameReport& f : report.frames) {
    json corners = nullptr;
    if (f.quad) {
      corners = json::array();
      for (const Point& p : f.quad->corners()) corners.push_back({p.x, p.y});
    }
    frames.push_back({{"frame", f.frame_index},
                      {"status", frame_status_name(f.status)},
                      {"corners", corners},
                      {"alive_features", f.alive_features},
                      {"max_inlier_error", f.max_inlier_error},
                      {"blend_residual", f.blend_residual},
                      {"blend_converged", f.blend_converged}});
  }
  return json{{"keyframe", report.keyframe},
              {"frames_rendered", report.frames_rendered},
              {"termination", report.termination},
              {"frames", frames}}
      .dump(2);
}

Keyframe detect_keyframe(FrameSource& video, const JobConfig& cfg) {
  cfg.validate();
  video.rewind();
  int index = 0;
  while (std::optional<Frame> frame = video.next()) {
    if (index % cfg.keyframe.stride == 0) {
      const Heatmap heat = localize(cfg.detector, index, *frame);
      const double presence = *std::max_element(heat.data().begin(), heat.data().end());
      if (presence >= cfg.keyframe.cutoff) {
        const double min_area = cfg.min_area_for(frame->width(), frame->height());
        return {index, localize_quad(heat, cfg.threshold, min_area)};
      }
    }
    ++index;
  }
  throw Error(ErrorCode::NoBillboardFound, "no sampled frame reached the recognition cutoff");
}

Homography keyframe_homography(const Advert& advert, const Quad& quad) {
  return estimate_homography(advert.source_quad().corners(), quad.corners());
}

RenderReport run_job(FrameSource& video, const Advert& advert, const JobConfig& cfg, const FrameSink& sink) {
  cfg.validate();
  const Keyframe key = cfg.corners ? Keyframe{cfg.corners->frame_index, cfg.corners->quad} : detect_keyframe(video, cfg);
  const Homography placement = keyframe_homography(advert, key.quad);

  RenderReport report;
  report.keyframe = key.frame_index;
  report.termination = "completed";

  struct Pending {
    std::future<Rendered> result;
    Frame original;
    FrameReport entry;
  };
  std::optional<Pending> pending;
  std::optional<TrackState> state;
  std::optional<Frame> previous;
  bool lost = false;

  const auto mark_lost = [&](const Error& e) {
    lost = true;
    report.termination = std::string("tracking_lost: ") + e.what();
  };
  const auto emit = [&](FrameReport entry, const Frame& image) {
    if (entry.status == FrameStatus::Rendered) ++report.frames_rendered;
    report.frames.push_back(std::move(entry));
    sink(report.frames.back().frame_index, image);
  };
  const auto resolve = [&] {
    if (!pending) return;
    try {
      Rendered r = pending->result.get();
      pending->entry.blend_residual = r.residual;
      pending->entry.blend_converged = r.converged;
      emit(std::move(pending->entry), r.image);
    } catch (const Error& e) {
      if (!ends_tracking(e.code())) throw;
      mark_lost(e);
      FrameReport entry;
      entry.frame_index = pending->entry.frame_index;
      entry.status = FrameStatus::LostPassthrough;
      emit(entry, pending->original);
    }
    pending.reset();
  };

  video.rewind();
  int index = 0;
  while (std::optional<Frame> frame = video.next()) {
    FrameReport entry;
    entry.frame_index = index;
    bool render = false;
    if (!lost && index >= key.frame_index) {
      try {
        state = index == key.frame_index ? start_tracking(*frame, key.quad, index, cfg.track)
                                         : update_quad(*previous, *frame, *state, cfg.track);
        render = true;
      } catch (const Error& e) {
        if (!ends_tracking(e.code())) throw;
        mark_lost(e);
      }
    }
    resolve();
    render = render && !lost;

    if (render) {
      entry.status = FrameStatus::Rendered;
      entry.quad = state->quad;
      entry.alive_features = state->alive_count();
      entry.max_inlier_error = state->max_inlier_error;
      const Homography h = state->cumulative * placement;
      pending = Pending{std::async(std::launch::async, render_frame, *frame, std::cref(advert), h, cfg.blend), *frame,
                        entry};
    } else {
      entry.status = lost ? FrameStatus::LostPassthrough : FrameStatus::Passthrough;
      emit(entry, *frame);
    }
    previous = std::move(frame);
    ++index;
  }
  resolve();
  if (key.frame_index >= index) {
    throw Error(ErrorCode::InvalidArgument, "keyframe index is past the end of the video");
  }
  return report;
}

RenderedVideo run_job(FrameSource& video, const Advert& advert, const JobConfig& cfg) {
  RenderedVideo out;
  out.report = run_job(video, advert, cfg, [&](int, const Frame& f) { out.frames.push_back(f); });
  return out;
}

}  // namespace adforge
