#include "adforge.h"

#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>

#include "core/config_json.hpp"
#include "core/error.hpp"
#include "core/pipeline.hpp"
#include "core/synthetic.hpp"
#include "core/videoio.hpp"
#include "service/service.hpp"

using namespace adforge;
using nlohmann::json;

struct af_job {
  std::string video;
  std::string advert;
  JobConfig cfg;
  std::optional<std::string> report;
};

struct af_service {
  std::unique_ptr<service::Service> impl;
};

namespace {

thread_local std::string last_error;

struct Cancelled {};

af_status fail(af_status s, std::string message) {
  last_error = std::move(message);
  return s;
}

af_status from_code(ErrorCode code) { return static_cast<af_status>(static_cast<int>(code) + 1); }

template <class F>
af_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return AF_OK;
  } catch (const Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const Cancelled&) {
    return fail(AF_CANCELLED, "cancelled by progress callback");
  } catch (const json::exception& e) {
    return fail(AF_SCHEMA_VIOLATION, e.what());
  } catch (const std::exception& e) {
    return fail(AF_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

Quad quad_from_array(const double c[8]) {
  return Quad({Point{c[0], c[1]}, Point{c[2], c[3]}, Point{c[4], c[5]}, Point{c[6], c[7]}});
}

void quad_to_array(const Quad& q, double c[8]) {
  for (int i = 0; i < 4; ++i) {
    c[2 * i] = q[i].x;
    c[2 * i + 1] = q[i].y;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

extern "C" {

const char* af_status_name(af_status status) {
  switch (status) {
    case AF_OK: return "Ok";
    case AF_CANCELLED: return "Cancelled";
    case AF_INTERNAL: return "Internal";
    default: break;
  }
  if (status > AF_OK && status < AF_CANCELLED) {
    return error_code_name(static_cast<ErrorCode>(static_cast<int>(status) - 1)).data();
  }
  return "Unknown";
}

const char* af_last_error(void) { return last_error.c_str(); }

const char* af_version(void) { return "0.1.0"; }

void af_string_free(char* s) { std::free(s); }

af_status af_job_create(af_job** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new af_job;
  });
}

void af_job_destroy(af_job* job) { delete job; }

af_status af_job_set_video(af_job* job, const char* y4m_path) {
  return guarded([&] {
    require(job && y4m_path, "null argument");
    Y4mReader probe(y4m_path);
    job->video = y4m_path;
  });
}

af_status af_job_set_advert(af_job* job, const char* png_path) {
  return guarded([&] {
    require(job && png_path, "null argument");
    Advert probe(read_png(png_path));
    job->advert = png_path;
  });
}

af_status af_job_configure(af_job* job, const char* options_json) {
  return guarded([&] {
    require(job && options_json, "null argument");
    JobConfig cfg = job->cfg;
    apply_job_json(json::parse(options_json), cfg);
    cfg.validate();
    job->cfg = std::move(cfg);
  });
}

af_status af_job_set_heatmaps(af_job* job, const char* dir, const char* stem) {
  return guarded([&] {
    require(job && dir, "null argument");
    job->cfg.detector = HeatmapFiles{dir, stem ? stem : "heatmap"};
  });
}

af_status af_job_set_baseline(af_job* job, double r, double g, double b, double sigma) {
  return guarded([&] {
    require(job != nullptr, "null job");
    require(sigma > 0.0, "sigma must be positive");
    job->cfg.detector = ChromaBaseline{{r, g, b}, sigma};
  });
}

af_status af_job_set_corners(af_job* job, int frame, const double corners[8]) {
  return guarded([&] {
    require(job && corners, "null argument");
    require(frame >= 0, "frame must be non-negative");
    job->cfg.corners = CornerOverride{frame, quad_from_array(corners)};
  });
}

af_status af_job_clear_corners(af_job* job) {
  return guarded([&] {
    require(job != nullptr, "null job");
    job->cfg.corners.reset();
  });
}

af_status af_job_detect(af_job* job, int* frame, double corners[8]) {
  return guarded([&] {
    require(job && frame && corners, "null argument");
    require(!job->video.empty(), "no video set");
    Y4mFrameSource source(job->video);
    const Keyframe key = detect_keyframe(source, job->cfg);
    *frame = key.frame_index;
    quad_to_array(key.quad, corners);
  });
}

af_status af_job_render(af_job* job, const char* out_y4m, af_progress_fn progress, void* user) {
  return guarded([&] {
    require(job && out_y4m, "null argument");
    require(!job->video.empty(), "no video set");
    require(!job->advert.empty(), "no advert set");
    Y4mFrameSource source(job->video);
    const Advert advert(read_png(job->advert));
    const VideoStream stream = source.stream();
    Y4mWriter writer(out_y4m, stream.width, stream.height, stream.frame_rate);
    int done = 0;
    const RenderReport report = run_job(source, advert, job->cfg, [&](int, const Frame& frame) {
      writer.write(frame);
      ++done;
      if (progress && progress(done, static_cast<int>(stream.frame_count), user) != 0) throw Cancelled{};
    });
    job->report = report_json(report);
  });
}

af_status af_job_report_json(const af_job* job, char** out) {
  return guarded([&] {
    require(job && out, "null argument");
    require(job->report.has_value(), "no render has completed");
    *out = dup_string(*job->report);
  });
}

af_status af_corners_read(const char* path, int* frame, double corners[8]) {
  return guarded([&] {
    require(path && frame && corners, "null argument");
    const CornerFile file = read_corners_json(path);
    *frame = file.frame;
    quad_to_array(file.quad, corners);
  });
}

af_status af_corners_write(const char* path, int frame, const double corners[8]) {
  return guarded([&] {
    require(path && corners, "null argument");
    write_corners_json(path, frame, quad_from_array(corners));
  });
}

af_status af_synth_generate(const char* spec_json, const char* out_dir) {
  return guarded([&] {
    require(spec_json && out_dir, "null argument");
    const SceneSpec spec = scene_spec_from_json(json::parse(spec_json));
    save_synthetic_scene(generate_synthetic_scene(spec), spec, out_dir);
  });
}

af_status af_service_create(const char* config_json, af_service** out) {
  return guarded([&] {
    require(config_json && out, "null argument");
    const json j = json::parse(config_json);
    require(j.is_object(), "service config must be an object");
    service::ServiceConfig cfg;
    for (const auto& [key, value] : j.items()) {
      if (key == "video_dir") {
        cfg.video_dir = value.get<std::string>();
      } else if (key == "advert_dir") {
        cfg.advert_dir = value.get<std::string>();
      } else if (key == "heatmap_root") {
        cfg.heatmap_root = value.get<std::string>();
      } else if (key == "work_dir") {
        cfg.work_dir = value.get<std::string>();
      } else if (key == "retention_seconds") {
        cfg.retention_seconds = value.get<double>();
      } else if (key == "defaults") {
        apply_job_json(value, cfg.defaults);
      } else {
        throw Error(ErrorCode::SchemaViolation, "unknown service config key '" + key + "'");
      }
    }
    cfg.defaults.validate();
    *out = new af_service{std::make_unique<service::Service>(std::move(cfg))};
  });
}

void af_service_destroy(af_service* service) { delete service; }

af_status af_service_handle(af_service* service, const char* method, const char* path, const char* body,
                            size_t body_len, int* http_status, char** content_type, char** response,
                            size_t* response_len) {
  return guarded([&] {
    require(service && method && path && http_status && content_type && response && response_len, "null argument");
    const std::string payload = body ? std::string(body, body_len) : std::string();
    const service::Response r = service->impl->handle(method, path, payload);
    *http_status = r.status;
    *content_type = dup_string(r.content_type);
    *response = dup_string(r.body);
    *response_len = r.body.size();
  });
}

af_status af_service_listen(af_service* service, const char* host, int port) {
  return guarded([&] {
    require(service && host, "null argument");
    if (!service->impl->listen(host, port)) throw Error(ErrorCode::IoError, "cannot listen on the given address");
  });
}

void af_service_stop(af_service* service) {
  if (service) service->impl->stop();
}

}  // extern "C"
