#include <adforge.h>
#include <signal.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using nlohmann::json;

namespace {

struct Failure {
  af_status status;
};

void check(af_status s) {
  if (s != AF_OK) throw Failure{s};
}

struct JobHandle {
  af_job* job = nullptr;
  JobHandle() { check(af_job_create(&job)); }
  ~JobHandle() { af_job_destroy(job); }
};

// Options shared by detect and render; unset flags leave library defaults.
struct Options {
  std::string heatmap_dir;
  std::string heatmap_stem = "heatmap";
  std::vector<double> baseline_color;
  std::optional<double> baseline_sigma;
  std::optional<double> threshold;
  std::optional<double> min_area;
  std::optional<int> stride;
  std::optional<double> cutoff;
  std::optional<int> klt_window, klt_levels, klt_iters, klt_max_features;
  std::optional<double> klt_eps, klt_min_eig, klt_quality, klt_min_distance, klt_inlier_threshold;
  std::optional<double> solver_tol;
  std::optional<int> solver_max_iters;
  std::string blend = "poisson";

  void attach(CLI::App* cmd) {
    cmd->add_option("--heatmap-dir", heatmap_dir, "Directory of per-frame PGM heatmaps");
    cmd->add_option("--heatmap-stem", heatmap_stem, "Heatmap file stem")->capture_default_str();
    cmd->add_option("--baseline-color", baseline_color, "Chroma baseline reference R,G,B in [0,1]")
        ->delimiter(',')
        ->expected(3);
    cmd->add_option("--baseline-sigma", baseline_sigma, "Chroma baseline sigma");
    cmd->add_option("--threshold", threshold, "Heatmap threshold t");
    cmd->add_option("--min-area", min_area, "Minimum region area in pixels");
    cmd->add_option("--stride", stride, "Keyframe scan stride");
    cmd->add_option("--cutoff", cutoff, "Recognition cutoff");
    cmd->add_option("--klt-window", klt_window, "Tracking window half-size");
    cmd->add_option("--klt-levels", klt_levels, "Pyramid levels");
    cmd->add_option("--klt-iters", klt_iters, "Iterations per level");
    cmd->add_option("--klt-eps", klt_eps, "Convergence epsilon in pixels");
    cmd->add_option("--klt-min-eig", klt_min_eig, "Minimum eigenvalue cutoff");
    cmd->add_option("--klt-max-features", klt_max_features, "Feature budget");
    cmd->add_option("--klt-quality", klt_quality, "Feature quality level");
    cmd->add_option("--klt-min-distance", klt_min_distance, "Minimum feature spacing");
    cmd->add_option("--klt-inlier-threshold", klt_inlier_threshold, "Reprojection inlier threshold in pixels");
    cmd->add_option("--solver-tol", solver_tol, "Poisson relative residual tolerance");
    cmd->add_option("--solver-max-iters", solver_max_iters, "Poisson iteration cap");
  }

  json to_json() const {
    json j = json::object();
    if (!heatmap_dir.empty()) {
      j["detector"] = {{"heatmaps", {{"dir", heatmap_dir}, {"stem", heatmap_stem}}}};
    } else if (!baseline_color.empty() || baseline_sigma) {
      json b = json::object();
      if (!baseline_color.empty()) b["color"] = baseline_color;
      if (baseline_sigma) b["sigma"] = *baseline_sigma;
      j["detector"] = {{"baseline", b}};
    }
    if (threshold) j["threshold"] = *threshold;
    if (min_area) j["min_area"] = *min_area;
    if (stride) j["stride"] = *stride;
    if (cutoff) j["cutoff"] = *cutoff;
    json track = json::object();
    if (klt_window) track["window"] = *klt_window;
    if (klt_levels) track["pyramid_levels"] = *klt_levels;
    if (klt_iters) track["max_iterations"] = *klt_iters;
    if (klt_eps) track["convergence_epsilon"] = *klt_eps;
    if (klt_min_eig) track["min_eigenvalue"] = *klt_min_eig;
    if (klt_max_features) track["max_features"] = *klt_max_features;
    if (klt_quality) track["feature_quality"] = *klt_quality;
    if (klt_min_distance) track["min_feature_distance"] = *klt_min_distance;
    if (klt_inlier_threshold) track["reprojection_inlier_threshold"] = *klt_inlier_threshold;
    if (!track.empty()) j["track"] = track;
    json blend_cfg = {{"mode", blend}};
    if (solver_tol) blend_cfg["solver_tolerance"] = *solver_tol;
    if (solver_max_iters) blend_cfg["max_iterations"] = *solver_max_iters;
    j["blend"] = blend_cfg;
    return j;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_corners(int frame, const double c[8]) {
  std::printf("keyframe %d: TL (%.3f, %.3f) TR (%.3f, %.3f) BR (%.3f, %.3f) BL (%.3f, %.3f)\n", frame, c[0], c[1],
              c[2], c[3], c[4], c[5], c[6], c[7]);
}

int serve(const std::string& config, const std::string& host, int port) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  af_service* service = nullptr;
  check(af_service_create(config.c_str(), &service));
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    af_service_stop(service);
  });
  std::printf("listening on %s:%d\n", host.c_str(), port);
  std::fflush(stdout);
  const af_status s = af_service_listen(service, host.c_str(), port);
  if (s == AF_OK) {
    waiter.join();
  } else {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  af_service_destroy(service);
  check(s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Billboard replacement: detect, track and blend a new advert into a video"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(af_version()));

  Options detect_opts;
  std::string detect_video, detect_out;
  CLI::App* detect = app.add_subcommand("detect", "Find the keyframe and its billboard corners");
  detect->add_option("--video", detect_video, "Input Y4M video")->required();
  detect->add_option("--out", detect_out, "Corner JSON output")->required();
  detect_opts.attach(detect);

  Options render_opts;
  std::string render_video, advert, corners, render_out, report;
  CLI::App* render = app.add_subcommand("render", "Track the billboard and blend the advert into every frame");
  render->add_option("--video", render_video, "Input Y4M video")->required();
  render->add_option("--advert", advert, "Advert PNG")->required();
  render->add_option("--corners", corners, "Confirmed corner JSON; detection runs when omitted");
  render->add_option("--out", render_out, "Output Y4M video")->required();
  render->add_option("--report", report, "Render report JSON");
  render->add_option("--blend", render_opts.blend, "poisson or direct")
      ->check(CLI::IsMember({"poisson", "direct"}))
      ->capture_default_str();
  render_opts.attach(render);

  std::string spec_path, out_dir;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic billboard scene with ground truth");
  synth->add_option("--spec", spec_path, "Scene JSON; defaults apply when omitted");
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  std::string video_dir, advert_dir, heatmap_root, work_dir, host = "127.0.0.1";
  double retention = 3600.0;
  int port = 8080;
  CLI::App* srv = app.add_subcommand("serve", "Run the HTTP job service");
  srv->add_option("--video-dir", video_dir, "Video catalog directory")->envname("ADFORGE_VIDEO_DIR")->required();
  srv->add_option("--advert-dir", advert_dir, "Advert catalog directory")->envname("ADFORGE_ADVERT_DIR")->required();
  srv->add_option("--heatmap-root", heatmap_root, "Root for relative heatmap dirs")->envname("ADFORGE_HEATMAP_ROOT");
  srv->add_option("--work-dir", work_dir, "Result directory")->envname("ADFORGE_WORK_DIR");
  srv->add_option("--retention", retention, "Result retention in seconds")->envname("ADFORGE_RETENTION");
  srv->add_option("--host", host, "Listen address")->envname("ADFORGE_HOST")->capture_default_str();
  srv->add_option("--port", port, "Listen port")->envname("ADFORGE_PORT")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*detect) {
      JobHandle job;
      check(af_job_set_video(job.job, detect_video.c_str()));
      check(af_job_configure(job.job, detect_opts.to_json().dump().c_str()));
      int frame = 0;
      double c[8];
      check(af_job_detect(job.job, &frame, c));
      check(af_corners_write(detect_out.c_str(), frame, c));
      print_corners(frame, c);
    } else if (*render) {
      JobHandle job;
      check(af_job_set_video(job.job, render_video.c_str()));
      check(af_job_set_advert(job.job, advert.c_str()));
      check(af_job_configure(job.job, render_opts.to_json().dump().c_str()));
      if (!corners.empty()) {
        int frame = 0;
        double c[8];
        check(af_corners_read(corners.c_str(), &frame, c));
        check(af_job_set_corners(job.job, frame, c));
      }
      check(af_job_render(job.job, render_out.c_str(), nullptr, nullptr));
      char* text = nullptr;
      check(af_job_report_json(job.job, &text));
      const json r = json::parse(text);
      if (!report.empty()) std::ofstream(report) << text << '\n';
      af_string_free(text);
      std::printf("keyframe %d, %zu frames rendered, %s\n", r["keyframe"].get<int>(),
                  r["frames_rendered"].get<std::size_t>(), r["termination"].get<std::string>().c_str());
    } else if (*synth) {
      const std::string spec = spec_path.empty() ? std::string("{}") : slurp(spec_path);
      check(af_synth_generate(spec.c_str(), out_dir.c_str()));
      std::printf("scene written to %s\n", out_dir.c_str());
    } else if (*srv) {
      json cfg = {{"video_dir", video_dir}, {"advert_dir", advert_dir}, {"retention_seconds", retention}};
      if (!heatmap_root.empty()) cfg["heatmap_root"] = heatmap_root;
      if (!work_dir.empty()) cfg["work_dir"] = work_dir;
      return serve(cfg.dump(), host, port);
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "adforge: %s\n", *af_last_error() ? af_last_error() : af_status_name(f.status));
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "adforge: %s\n", e.what());
    return 1;
  }
  return 0;
}
