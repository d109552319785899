#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/compositor.hpp"
#include "core/detector.hpp"
#include "core/geometry.hpp"
#include "core/tracker.hpp"
#include "core/videoio.hpp"

namespace adforge {

// Sequential, rewindable frame supply.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual const VideoStream& stream() const = 0;
  virtual std::optional<Frame> next() = 0;
  virtual void rewind() = 0;
};

class MemoryFrameSource final : public FrameSource {
 public:
  MemoryFrameSource(std::vector<Frame> frames, FrameRate rate = {});

  const VideoStream& stream() const override { return stream_; }
  std::optional<Frame> next() override;
  void rewind() override { cursor_ = 0; }

 private:
  std::vector<Frame> frames_;
  VideoStream stream_;
  std::size_t cursor_ = 0;
};

class Y4mFrameSource final : public FrameSource {
 public:
  explicit Y4mFrameSource(const std::filesystem::path& path) : reader_(path) {}

  const VideoStream& stream() const override { return reader_.stream(); }
  std::optional<Frame> next() override { return reader_.next(); }
  void rewind() override { reader_.rewind(); }

 private:
  Y4mReader reader_;
};

struct KeyframePolicy {
  int stride = 10;
  double cutoff = 0.5;
};

struct CornerOverride {
  int frame_index = 0;
  Quad quad;
};

struct JobConfig {
  DetectorSource detector = ChromaBaseline{};
  KeyframePolicy keyframe;
  std::optional<CornerOverride> corners;  // supersedes detection
  BlendConfig blend;
  TrackParams track;
  double threshold = kDefaultThreshold;
  std::optional<double> min_area;  // pixels; default is 0.1% of the frame

  double min_area_for(int width, int height) const;
  void validate() const;
};

enum class FrameStatus { Passthrough, Rendered, LostPassthrough };

const char* frame_status_name(FrameStatus s) noexcept;

struct FrameReport {
  int frame_index = 0;
  FrameStatus status = FrameStatus::Passthrough;
  std::optional<Quad> quad;
  std::size_t alive_features = 0;
  double max_inlier_error = 0.0;
  double blend_residual = 0.0;
  bool blend_converged = true;
};

struct RenderReport {
  int keyframe = -1;
  std::size_t frames_rendered = 0;
  std::string termination;  // "completed" or "tracking_lost: <why>"
  std::vector<FrameReport> frames;
};

std::string report_json(const RenderReport& report);

struct Keyframe {
  int frame_index = 0;
  Quad quad;
};

// Scans every `stride`-th frame and localises the first one whose presence
// score reaches the cutoff. Throws NoBillboardFound.
Keyframe detect_keyframe(FrameSource& video, const JobConfig& cfg);

// Receives every output frame, in order.
using FrameSink = std::function<void(int frame_index, const Frame& frame)>;

// Renders the advert into every frame from the keyframe on. Frames before the
// keyframe, and every frame after tracking is lost, pass through untouched.
RenderReport run_job(FrameSource& video, const Advert& advert, const JobConfig& cfg, const FrameSink& sink);

struct RenderedVideo {
  std::vector<Frame> frames;
  RenderReport report;
};

RenderedVideo run_job(FrameSource& video, const Advert& advert, const JobConfig& cfg);

// Maps the advert rectangle onto `quad`.
Homography keyframe_homography(const Advert& advert, const Quad& quad);

}  // namespace adforge
