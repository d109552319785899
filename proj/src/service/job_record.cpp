#include "service/job_record.hpp"

#include <stdexcept>

namespace adforge::service {

const char* job_state_name(JobState s) noexcept {
  switch (s) {
    case JobState::Created: return "created";
    case JobState::Detecting: return "detecting";
    case JobState::Detected: return "detected";
    case JobState::CornersConfirmed: return "corners_confirmed";
    case JobState::Rendering: return "rendering";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "unknown";
}

bool legal_transition(JobState from, JobState to) noexcept {
  using enum JobState;
  switch (from) {
    case Created: return to == Detecting;
    case Detecting: return to == Detected || to == Failed;
    case Detected: return to == CornersConfirmed;
    case CornersConfirmed: return to == CornersConfirmed || to == Rendering;
    case Rendering: return to == Done || to == Failed;
    case Done:
    case Failed: return false;
  }
  return false;
}

JobRecord::JobRecord(std::string id, std::string video, std::string advert)
    : id_(std::move(id)), video_(std::move(video)), advert_(std::move(advert)) {}

void JobRecord::transition(JobState to) {
  if (!legal_transition(state_, to)) {
    throw std::logic_error(std::string("illegal job transition ") + job_state_name(state_) + " -> " +
                           job_state_name(to));
  }
  state_ = to;
  history_.push_back(to);
}

void JobRecord::set_progress(double p) {
  if (!(p >= progress_ && p <= 1.0)) throw std::logic_error("job progress must be monotone within [0,1]");
  progress_ = p;
}

void JobRecord::detected(int frame, const Quad& quad) {
  transition(JobState::Detected);
  keyframe = frame;
  detected_quad = quad;
}

void JobRecord::confirm(const Quad& quad) {
  transition(JobState::CornersConfirmed);
  confirmed_quad = quad;
}

void JobRecord::fail(std::string detail) {
  transition(JobState::Failed);
  error = std::move(detail);
}

}  // namespace adforge::service
