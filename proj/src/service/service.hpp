#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "core/pipeline.hpp"
#include "service/job_record.hpp"

namespace adforge::service {

using Clock = std::chrono::steady_clock;

struct ServiceConfig {
  std::filesystem::path video_dir;   // *.y4m, id = file stem
  std::filesystem::path advert_dir;  // *.png, id = file stem
  // Relative heatmap directories in job requests resolve against this.
  std::filesystem::path heatmap_root;
  // Results and reports are written here; empty means a fresh temp directory.
  std::filesystem::path work_dir;
  double retention_seconds = 3600.0;
  JobConfig defaults;
  std::function<Clock::time_point()> now = [] { return Clock::now(); };
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Routes one request. Never throws; failures map to HTTP status codes.
  Response handle(const std::string& method, const std::string& path, const std::string& body = {});

  // Blocks until every background detection and render has finished.
  void wait_idle();

  // Serves `handle` over HTTP until stop() is called.
  bool listen(const std::string& host, int port);
  void stop();

  const std::filesystem::path& work_dir() const noexcept { return config_.work_dir; }

 private:
  struct Job;

  Response route(const std::string& method, const std::string& path, const std::string& body);
  Response list_videos() const;
  Response list_adverts() const;
  Response advert_image(const std::string& id) const;
  Response create_job(const std::string& body);
  Response list_jobs();
  Response job_status(const std::string& id);
  Response confirm_corners(const std::string& id, const std::string& body);
  Response start_render(const std::string& id, const std::string& body);
  Response frame_preview(const std::string& id, const std::string& frame);
  Response keyframe_preview(const std::string& id);
  Response result(const std::string& id);

  std::shared_ptr<Job> find(const std::string& id);
  void spawn(std::function<void()> work);
  void detect(std::shared_ptr<Job> job);
  void render(std::shared_ptr<Job> job);

  std::filesystem::path video_path(const std::string& id) const;
  std::filesystem::path advert_path(const std::string& id) const;

  ServiceConfig config_;
  bool owns_work_dir_ = false;
  std::atomic<bool> stopping_{false};

  std::mutex mutex_;  // guards jobs_, next_id_ and every Job's mutable fields
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  int next_id_ = 1;

  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;

  struct Http;
  std::unique_ptr<Http> http_;
};

}  // namespace adforge::service
