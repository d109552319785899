#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace adforge::service {

enum class JobState { Created, Detecting, Detected, CornersConfirmed, Rendering, Done, Failed };

const char* job_state_name(JobState s) noexcept;

// created -> detecting -> detected -> corners_confirmed -> rendering -> done|failed,
// detecting -> failed, and corners_confirmed -> corners_confirmed for
// re-refinement before rendering starts.
bool legal_transition(JobState from, JobState to) noexcept;

class JobRecord {
 public:
  JobRecord(std::string id, std::string video, std::string advert);

  const std::string& id() const noexcept { return id_; }
  const std::string& video() const noexcept { return video_; }
  const std::string& advert() const noexcept { return advert_; }
  JobState state() const noexcept { return state_; }
  const std::vector<JobState>& history() const noexcept { return history_; }
  double progress() const noexcept { return progress_; }

  // Throws std::logic_error on an illegal transition; the record is left
  // unchanged.
  void transition(JobState to);

  // Throws std::logic_error if `p` is outside [0,1] or below the current value.
  void set_progress(double p);

  void detected(int keyframe, const Quad& quad);
  void confirm(const Quad& quad);
  void fail(std::string detail);

  std::optional<int> keyframe;
  std::optional<Quad> detected_quad;
  std::optional<Quad> confirmed_quad;
  std::string error;

 private:
  std::string id_;
  std::string video_;
  std::string advert_;
  JobState state_ = JobState::Created;
  std::vector<JobState> history_{JobState::Created};
  double progress_ = 0.0;
};

}  // namespace adforge::service
