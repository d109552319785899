#include "service/service.hpp"

#include <unistd.h>

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "core/config_json.hpp"
#include "core/error.hpp"
#include "core/videoio.hpp"

namespace adforge::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Cancelled {};

Response json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

Response error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}, {"status", status}});
}

bool valid_media_id(const std::string& id) {
  if (id.empty() || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  const std::string clean = path.substr(0, path.find('?'));
  std::stringstream in(clean);
  std::string part;
  while (std::getline(in, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

std::optional<int> parse_index(const std::string& s) {
  if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return std::nullopt;
  }
  return std::stoi(s);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_work_dir() {
  static std::atomic<int> counter{0};
  return fs::temp_directory_path() /
         ("adforge-service-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
}

json optional_quad(const std::optional<Quad>& q) { return q ? quad_to_json(*q) : json(nullptr); }

// Corners as posted must already trace a convex outline, in either winding
// and from any starting corner; they are then stored in canonical order.
std::optional<Quad> canonical_corners(const json& corners, int width, int height, std::string& why) {
  if (!corners.is_array() || corners.size() != 4) {
    why = "corners must hold exactly four [x, y] points";
    return std::nullopt;
  }
  std::array<Point, 4> pts{};
  for (int i = 0; i < 4; ++i) {
    const json& c = corners[i];
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
      why = "corners must hold exactly four [x, y] points";
      return std::nullopt;
    }
    pts[i] = {c[0].get<double>(), c[1].get<double>()};
    if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y) || pts[i].x < 0 || pts[i].y < 0 || pts[i].x > width ||
        pts[i].y > height) {
      why = "corner outside the frame";
      return std::nullopt;
    }
  }
  std::array<Point, 4> reversed{pts[3], pts[2], pts[1], pts[0]};
  if (!is_convex_clockwise(pts) && !is_convex_clockwise(reversed)) {
    why = "corners do not form a convex quadrilateral";
    return std::nullopt;
  }
  try {
    return order_corners(pts);
  } catch (const Error& e) {
    why = e.what();
    return std::nullopt;
  }
}

}  // namespace

struct Service::Http {
  httplib::Server server;
};

struct Service::Job {
  Job(std::string id, std::string video, std::string advert) : record(std::move(id), std::move(video), std::move(advert)) {}

  JobRecord record;
  JobConfig cfg;
  VideoStream stream;
  std::string keyframe_png;
  std::vector<std::string> previews;  // PNG bytes, one per emitted frame
  std::optional<json> report;
  fs::path result_path;
  std::optional<Clock::time_point> finished_at;
};

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.work_dir.empty()) {
    config_.work_dir = fresh_work_dir();
    owns_work_dir_ = true;
  }
  fs::create_directories(config_.work_dir);
}

Service::~Service() {
  stop();
  stopping_ = true;
  wait_idle();
  if (owns_work_dir_) {
    std::error_code ec;
    fs::remove_all(config_.work_dir, ec);
  }
}

void Service::wait_idle() {
  for (;;) {
    std::vector<std::thread> batch;
    {
      std::lock_guard lock(workers_mutex_);
      batch.swap(workers_);
    }
    if (batch.empty()) return;
    for (std::thread& t : batch) t.join();
  }
}

void Service::spawn(std::function<void()> work) {
  std::lock_guard lock(workers_mutex_);
  workers_.emplace_back(std::move(work));
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    return route(method, path, body);
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

Response Service::route(const std::string& method, const std::string& path, const std::string& body) {
  const std::vector<std::string> p = split_path(path);
  const auto allow = [&](const char* m) { return method == m; };
  const auto wrong_method = [] { return error_response(405, "method not allowed"); };

  if (p.size() == 1 && p[0] == "videos") return allow("GET") ? list_videos() : wrong_method();
  if (p.size() == 1 && p[0] == "adverts") return allow("GET") ? list_adverts() : wrong_method();
  if (p.size() == 3 && p[0] == "adverts" && p[2] == "image") return allow("GET") ? advert_image(p[1]) : wrong_method();
  if (p.size() == 1 && p[0] == "jobs") {
    if (allow("POST")) return create_job(body);
    if (allow("GET")) return list_jobs();
    return wrong_method();
  }
  if (p.size() >= 2 && p[0] == "jobs") {
    const std::string& id = p[1];
    if (p.size() == 2) return allow("GET") ? job_status(id) : wrong_method();
    if (p.size() == 3 && p[2] == "corners") return allow("POST") ? confirm_corners(id, body) : wrong_method();
    if (p.size() == 3 && p[2] == "render") return allow("POST") ? start_render(id, body) : wrong_method();
    if (p.size() == 3 && p[2] == "result") return allow("GET") ? result(id) : wrong_method();
    if (p.size() == 3 && p[2] == "keyframe") return allow("GET") ? keyframe_preview(id) : wrong_method();
    if (p.size() == 4 && p[2] == "frames") return allow("GET") ? frame_preview(id, p[3]) : wrong_method();
  }
  return error_response(404, "no such route");
}

fs::path Service::video_path(const std::string& id) const { return config_.video_dir / (id + ".y4m"); }
fs::path Service::advert_path(const std::string& id) const { return config_.advert_dir / (id + ".png"); }

namespace {

std::vector<fs::path> catalog(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> files;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext && valid_media_id(e.path().stem().string())) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Response Service::list_videos() const {
  json out = json::array();
  try {
    for (const fs::path& f : catalog(config_.video_dir, ".y4m")) {
      const Y4mReader reader(f);
      const VideoStream& s = reader.stream();
      out.push_back({{"id", f.stem().string()},
                     {"name", f.filename().string()},
                     {"width", s.width},
                     {"height", s.height},
                     {"frame_count", s.frame_count}});
    }
  } catch (const std::exception& e) {
    return error_response(500, std::string("unreadable video catalog: ") + e.what());
  }
  return json_response(200, out);
}

Response Service::list_adverts() const {
  json out = json::array();
  try {
    for (const fs::path& f : catalog(config_.advert_dir, ".png")) {
      const Frame img = read_png(f);
      out.push_back({{"id", f.stem().string()},
                     {"name", f.filename().string()},
                     {"width", img.width()},
                     {"height", img.height()}});
    }
  } catch (const std::exception& e) {
    return error_response(500, std::string("unreadable advert catalog: ") + e.what());
  }
  return json_response(200, out);
}

Response Service::advert_image(const std::string& id) const {
  if (!valid_media_id(id) || !fs::is_regular_file(advert_path(id))) return error_response(404, "unknown advert");
  return {200, "image/png", read_file(advert_path(id))};
}

Response Service::create_job(const std::string& body) {
  json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_response(422, "body must be a JSON object");
  if (!req.contains("video") || !req["video"].is_string()) return error_response(422, "video is required");
  if (!req.contains("advert") || !req["advert"].is_string()) return error_response(422, "advert is required");
  const std::string video = req["video"], advert = req["advert"];
  if (!valid_media_id(video) || !fs::is_regular_file(video_path(video))) return error_response(404, "unknown video");
  if (!valid_media_id(advert) || !fs::is_regular_file(advert_path(advert))) {
    return error_response(404, "unknown advert");
  }

  JobConfig cfg = config_.defaults;
  req.erase("video");
  req.erase("advert");
  try {
    apply_job_json(req, cfg);
    if (auto* files = std::get_if<HeatmapFiles>(&cfg.detector)) {
      const fs::path rel = files->dir.lexically_normal();
      if (rel.is_absolute() || (!rel.empty() && *rel.begin() == "..")) {
        return error_response(422, "heatmap dir must be relative to the heatmap root");
      }
      files->dir = config_.heatmap_root / rel;
    }
    cfg.validate();
  } catch (const Error& e) {
    return error_response(422, e.what());
  }

  VideoStream stream;
  try {
    stream = Y4mReader(video_path(video)).stream();
  } catch (const Error& e) {
    return error_response(500, std::string("unreadable video: ") + e.what());
  }
  if (stream.frame_count == 0) return error_response(422, "video has no frames");

  std::shared_ptr<Job> job;
  {
    std::lock_guard lock(mutex_);
    const std::string id = "job-" + std::to_string(next_id_++);
    job = std::make_shared<Job>(id, video, advert);
    job->cfg = std::move(cfg);
    job->stream = stream;
    job->result_path = config_.work_dir / (id + ".y4m");
    job->record.transition(JobState::Detecting);
    jobs_[id] = job;
  }
  spawn([this, job] { detect(job); });
  return json_response(201, {{"id", job->record.id()}, {"state", "detecting"}});
}

std::shared_ptr<Service::Job> Service::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = jobs_.find(id);
  return it == jobs_.end() ? nullptr : it->second;
}

void Service::detect(std::shared_ptr<Job> job) {
  try {
    Y4mFrameSource source(video_path(job->record.video()));
    const Keyframe key = detect_keyframe(source, job->cfg);
    source.rewind();
    std::optional<Frame> frame;
    for (int i = 0; i <= key.frame_index; ++i) frame = source.next();
    std::string png;
    if (frame) {
      const std::vector<unsigned char> bytes = encode_png(*frame);
      png.assign(bytes.begin(), bytes.end());
    }
    std::lock_guard lock(mutex_);
    job->keyframe_png = std::move(png);
    job->record.detected(key.frame_index, key.quad);
  } catch (const std::exception& e) {
    std::lock_guard lock(mutex_);
    job->record.fail(e.what());
  }
}

Response Service::list_jobs() {
  std::lock_guard lock(mutex_);
  json out = json::array();
  for (const auto& [id, job] : jobs_) out.push_back({{"id", id}, {"state", job_state_name(job->record.state())}});
  return json_response(200, out);
}

Response Service::job_status(const std::string& id) {
  const std::shared_ptr<Job> job = find(id);
  if (!job) return error_response(404, "unknown job");
  std::lock_guard lock(mutex_);
  const JobRecord& r = job->record;
  json history = json::array();
  for (JobState s : r.history()) history.push_back(job_state_name(s));
  return json_response(200, {{"id", r.id()},
                             {"state", job_state_name(r.state())},
                             {"video", r.video()},
                             {"advert", r.advert()},
                             {"width", job->stream.width},
                             {"height", job->stream.height},
                             {"frame_count", job->stream.frame_count},
                             {"keyframe", r.keyframe ? json(*r.keyframe) : json(nullptr)},
                             {"detected_corners", optional_quad(r.detected_quad)},
                             {"confirmed_corners", optional_quad(r.confirmed_quad)},
                             {"progress", r.progress()},
                             {"frames_done", job->previews.size()},
                             {"error", r.error.empty() ? json(nullptr) : json(r.error)},
                             {"history", history},
                             {"report", job->report ? *job->report : json(nullptr)}});
}

Response Service::confirm_corners(const std::string& id, const std::string& body) {
  const std::shared_ptr<Job> job = find(id);
  if (!job) return error_response(404, "unknown job");
  std::lock_guard lock(mutex_);
  const JobState state = job->record.state();
  if (state != JobState::Detected && state != JobState::CornersConfirmed) {
    return error_response(409, std::string("cannot confirm corners in state ") + job_state_name(state));
  }
  const json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_response(422, "body must be a JSON object");
  int frame = job->record.keyframe.value_or(0);
  if (req.contains("frame")) {
    if (!req["frame"].is_number_integer()) return error_response(422, "frame must be an integer");
    frame = req["frame"].get<int>();
  }
  if (frame < 0 || static_cast<std::size_t>(frame) >= job->stream.frame_count) {
    return error_response(422, "frame outside the video");
  }
  if (!req.contains("corners")) return error_response(422, "corners are required");
  std::string why;
  const std::optional<Quad> quad = canonical_corners(req["corners"], job->stream.width, job->stream.height, why);
  if (!quad) return error_response(422, why);
  job->record.confirm(*quad);
  job->record.keyframe = frame;
  return json_response(200, {{"id", id}, {"state", "corners_confirmed"}, {"frame", frame},
                             {"corners", quad_to_json(*quad)}});
}

Response Service::start_render(const std::string& id, const std::string& body) {
  const std::shared_ptr<Job> job = find(id);
  if (!job) return error_response(404, "unknown job");
  {
    std::lock_guard lock(mutex_);
    const JobState state = job->record.state();
    if (state != JobState::CornersConfirmed) {
      return error_response(409, std::string("cannot render in state ") + job_state_name(state));
    }
    if (!body.empty()) {
      const json req = json::parse(body, nullptr, false);
      if (req.is_discarded() || !req.is_object()) return error_response(422, "body must be a JSON object");
      JobConfig cfg = job->cfg;
      try {
        for (const auto& [key, value] : req.items()) {
          if (key == "blend") {
            apply_blend_json(value, cfg.blend);
          } else if (key == "track") {
            apply_track_json(value, cfg.track);
          } else {
            return error_response(422, "unknown key '" + key + "'");
          }
        }
        cfg.validate();
      } catch (const Error& e) {
        return error_response(422, e.what());
      }
      job->cfg = std::move(cfg);
    }
    job->cfg.corners = CornerOverride{*job->record.keyframe, *job->record.confirmed_quad};
    job->record.transition(JobState::Rendering);
  }
  spawn([this, job] { render(job); });
  return json_response(202, {{"id", id}, {"state", "rendering"}});
}

void Service::render(std::shared_ptr<Job> job) {
  try {
    Y4mFrameSource source(video_path(job->record.video()));
    const Advert advert(read_png(advert_path(job->record.advert())));
    const VideoStream stream = source.stream();
    Y4mWriter writer(job->result_path, stream.width, stream.height, stream.frame_rate);
    const double total = static_cast<double>(stream.frame_count);
    const RenderReport report = run_job(source, advert, job->cfg, [&](int, const Frame& frame) {
      if (stopping_) throw Cancelled{};
      writer.write(frame);
      const std::vector<unsigned char> bytes = encode_png(frame);
      std::lock_guard lock(mutex_);
      job->previews.emplace_back(bytes.begin(), bytes.end());
      job->record.set_progress(std::min(1.0, job->previews.size() / total));
    });
    const std::string text = report_json(report);
    std::ofstream(config_.work_dir / (job->record.id() + ".report.json")) << text << '\n';
    std::lock_guard lock(mutex_);
    job->report = json::parse(text);
    job->finished_at = config_.now();
    job->record.set_progress(1.0);
    job->record.transition(JobState::Done);
  } catch (const Cancelled&) {
    std::lock_guard lock(mutex_);
    job->record.fail("cancelled: service shutting down");
  } catch (const std::exception& e) {
    std::lock_guard lock(mutex_);
    job->record.fail(e.what());
  }
}

Response Service::keyframe_preview(const std::string& id) {
  const std::shared_ptr<Job> job = find(id);
  if (!job) return error_response(404, "unknown job");
  std::lock_guard lock(mutex_);
  if (job->keyframe_png.empty()) return error_response(404, "keyframe not detected yet");
  return {200, "image/png", job->keyframe_png};
}

Response Service::frame_preview(const std::string& id, const std::string& frame) {
  const std::shared_ptr<Job> job = find(id);
  if (!job) return error_response(404, "unknown job");
  const std::optional<int> n = parse_index(frame);
  std::lock_guard lock(mutex_);
  if (!n || static_cast<std::size_t>(*n) >= job->previews.size()) return error_response(404, "frame not rendered");
  return {200, "image/png", job->previews[static_cast<std::size_t>(*n)]};
}

Response Service::result(const std::string& id) {
  const std::shared_ptr<Job> job = find(id);
  if (!job) return error_response(404, "unknown job");
  fs::path path;
  {
    std::lock_guard lock(mutex_);
    if (job->record.state() != JobState::Done) {
      return error_response(409, std::string("no result in state ") + job_state_name(job->record.state()));
    }
    const std::chrono::duration<double> age = config_.now() - *job->finished_at;
    if (age.count() > config_.retention_seconds) return error_response(410, "result expired");
    path = job->result_path;
  }
  return {200, "video/x-yuv4mpeg", read_file(path)};
}

bool Service::listen(const std::string& host, int port) {
  {
    std::lock_guard lock(mutex_);
    if (!http_) http_ = std::make_unique<Http>();
  }
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  httplib::Server& s = http_->server;
  s.Get(".*", forward);
  s.Post(".*", forward);
  s.Put(".*", forward);
  s.Delete(".*", forward);
  return s.listen(host, port);
}

void Service::stop() {
  std::lock_guard lock(mutex_);
  if (http_) http_->server.stop();
}

}  // namespace adforge::service
