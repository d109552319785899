#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <random>
#include <thread>

#include "core/config_json.hpp"
#include "core/synthetic.hpp"
#include "oracles.hpp"
#include "service/job_record.hpp"
#include "service/service.hpp"

using namespace adforge;
using namespace adforge::service;
using nlohmann::json;

namespace {

const std::vector<JobState> kAllStates{JobState::Created,  JobState::Detecting, JobState::Detected,
                                       JobState::CornersConfirmed, JobState::Rendering, JobState::Done,
                                       JobState::Failed};

// Small synthetic catalog: one billboard clip, one blank clip, two adverts.
struct Fixture {
  oracle::TempDir dir;
  SyntheticScene scene;
  std::atomic<double> clock_offset{0.0};

  Fixture() {
    SceneSpec spec;
    spec.width = 160;
    spec.height = 120;
    spec.billboard_width = 80;
    spec.billboard_height = 56;
    spec.initial_quad = Quad::from_rect(40, 32, 120, 88);
    spec.seed = 6;
    spec.motion = drifting_motion(spec.initial_quad, 5, {0.5, 0.25}, {0, 0});
    scene = generate_synthetic_scene(spec);
    std::filesystem::create_directories(dir / "videos");
    std::filesystem::create_directories(dir / "adverts");
    write_y4m(dir / "videos/scene.y4m", {160, 120, {30, 1}, 5}, scene.frames);
    const std::vector<Frame> blank(3, Frame(32, 24, 0.5));
    write_y4m(dir / "videos/blank.y4m", {32, 24, {25, 1}, 3}, blank);
    write_png(dir / "adverts/ad.png", scene.advert);
    write_png(dir / "adverts/small.png", Frame(8, 6, 0.2));
    const HeatmapFiles files{dir / "heat/scene", "heatmap"};
    std::filesystem::create_directories(files.dir);
    for (int i = 0; i < 5; ++i) write_heatmap_pgm(heatmap_path(files, i), scene.heatmaps[i]);
  }

  ServiceConfig config() {
    ServiceConfig c;
    c.video_dir = dir / "videos";
    c.advert_dir = dir / "adverts";
    c.heatmap_root = dir / "heat";
    c.work_dir = dir / "work";
    c.retention_seconds = 60;
    c.now = [this] {
      return Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(clock_offset.load()));
    };
    return c;
  }
};

json body_of(const Response& r) { return json::parse(r.body); }

std::string create(Service& s, const std::string& extra = "") {
  const Response r = s.handle("POST", "/jobs", R"({"video": "scene", "advert": "ad")" + extra + "}");
  EXPECT_EQ(r.status, 201) << r.body;
  return body_of(r)["id"];
}

json status(Service& s, const std::string& id) { return body_of(s.handle("GET", "/jobs/" + id)); }

bool is_png(const std::string& bytes) { return bytes.size() > 8 && bytes.compare(1, 3, "PNG") == 0; }

}  // namespace

TEST(JobRecordStates, LegalTransitionTable) {
  const std::set<std::pair<JobState, JobState>> legal{
      {JobState::Created, JobState::Detecting},          {JobState::Detecting, JobState::Detected},
      {JobState::Detecting, JobState::Failed},           {JobState::Detected, JobState::CornersConfirmed},
      {JobState::CornersConfirmed, JobState::CornersConfirmed}, {JobState::CornersConfirmed, JobState::Rendering},
      {JobState::Rendering, JobState::Done},             {JobState::Rendering, JobState::Failed}};
  for (JobState a : kAllStates) {
    for (JobState b : kAllStates) EXPECT_EQ(legal_transition(a, b), legal.count({a, b}) == 1);
  }
  EXPECT_STREQ(job_state_name(JobState::CornersConfirmed), "corners_confirmed");
}

TEST(JobRecordStates, IllegalTransitionThrowsAndLeavesRecord) {
  JobRecord r("j", "v", "a");
  EXPECT_THROW(r.transition(JobState::Rendering), std::logic_error);
  EXPECT_EQ(r.state(), JobState::Created);
  r.transition(JobState::Detecting);
  r.detected(4, Quad::from_rect(0, 0, 4, 4));
  EXPECT_EQ(r.keyframe, 4);
  EXPECT_FALSE(r.confirmed_quad);
  r.confirm(Quad::from_rect(1, 1, 4, 4));
  r.confirm(Quad::from_rect(1, 1, 5, 4));
  EXPECT_TRUE(r.confirmed_quad);
  r.set_progress(0.5);
  EXPECT_THROW(r.set_progress(0.4), std::logic_error);
  EXPECT_THROW(r.set_progress(1.5), std::logic_error);
  EXPECT_EQ(r.progress(), 0.5);
  EXPECT_EQ(r.history().size(), 5u);
}

TEST(JobRecordStates, RandomSequencesStayLegal) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    JobRecord r("j", "v", "a");
    for (int step = 0; step < 12; ++step) {
      const JobState to = kAllStates[rng() % kAllStates.size()];
      const JobState before = r.state();
      try {
        r.transition(to);
        EXPECT_TRUE(legal_transition(before, to));
      } catch (const std::logic_error&) {
        EXPECT_FALSE(legal_transition(before, to));
        EXPECT_EQ(r.state(), before);
      }
    }
    for (std::size_t i = 1; i < r.history().size(); ++i) {
      EXPECT_TRUE(legal_transition(r.history()[i - 1], r.history()[i]));
    }
  }
}

TEST(Catalog, VideosAndAdverts) {
  Fixture f;
  Service s(f.config());
  const Response v = s.handle("GET", "/videos");
  ASSERT_EQ(v.status, 200);
  const json videos = body_of(v);
  ASSERT_EQ(videos.size(), 2u);
  EXPECT_EQ(videos[0]["id"], "blank");
  EXPECT_EQ(videos[0]["width"], 32);
  EXPECT_EQ(videos[0]["frame_count"], 3);
  EXPECT_EQ(videos[1]["id"], "scene");
  EXPECT_EQ(videos[1]["height"], 120);
  const json adverts = body_of(s.handle("GET", "/adverts"));
  ASSERT_EQ(adverts.size(), 2u);
  EXPECT_EQ(adverts[0]["id"], "ad");
  EXPECT_EQ(adverts[0]["width"], 80);
  EXPECT_FALSE(adverts[0].contains("frame_count"));
  const Response img = s.handle("GET", "/adverts/ad/image");
  EXPECT_EQ(img.content_type, "image/png");
  EXPECT_TRUE(is_png(img.body));
}

TEST(Catalog, EmptyAndUnreadable) {
  Fixture f;
  std::filesystem::remove_all(f.dir / "adverts");
  std::filesystem::create_directories(f.dir / "adverts");
  Service s(f.config());
  EXPECT_EQ(s.handle("GET", "/adverts").body, "[]");
  std::ofstream(f.dir / "videos/broken.y4m") << "garbage";
  EXPECT_EQ(s.handle("GET", "/videos").status, 500);
  ServiceConfig missing = f.config();
  missing.advert_dir = f.dir / "nowhere";
  Service t(missing);
  EXPECT_EQ(t.handle("GET", "/adverts").status, 500);
}

TEST(Routes, UnknownAndWrongMethod) {
  Fixture f;
  Service s(f.config());
  EXPECT_EQ(s.handle("GET", "/nope").status, 404);
  EXPECT_EQ(s.handle("GET", "/jobs/job-1/whatever").status, 404);
  EXPECT_EQ(s.handle("DELETE", "/videos").status, 405);
  EXPECT_EQ(s.handle("GET", "/jobs/job-9").status, 404);
  EXPECT_EQ(s.handle("GET", "/adverts/../secret/image").status, 404);
}

TEST(CreateJob, ValidationErrors) {
  Fixture f;
  Service s(f.config());
  EXPECT_EQ(s.handle("POST", "/jobs", R"({"video": "nope", "advert": "ad"})").status, 404);
  EXPECT_EQ(s.handle("POST", "/jobs", R"({"video": "scene", "advert": "nope"})").status, 404);
  EXPECT_EQ(s.handle("POST", "/jobs", R"({"video": "scene"})").status, 422);
  EXPECT_EQ(s.handle("POST", "/jobs", "not json").status, 422);
  EXPECT_EQ(s.handle("POST", "/jobs", R"({"video": "scene", "advert": "ad", "stride": 0})").status, 422);
  EXPECT_EQ(s.handle("POST", "/jobs", R"({"video": "scene", "advert": "ad", "bogus": 1})").status, 422);
  EXPECT_EQ(s.handle("POST", "/jobs",
                     R"({"video": "scene", "advert": "ad", "detector": {"heatmaps": {"dir": "../x"}}})")
                .status,
            422);
  EXPECT_EQ(body_of(s.handle("GET", "/jobs")).size(), 0u);
}

TEST(Workflow, DetectConfirmRenderDownload) {
  Fixture f;
  Service s(f.config());
  const std::string id = create(s, R"(, "detector": {"heatmaps": {"dir": "scene"}})");
  EXPECT_EQ(s.handle("POST", "/jobs/" + id + "/render").status, 409);
  s.wait_idle();
  json st = status(s, id);
  ASSERT_EQ(st["state"], "detected") << st.dump();
  EXPECT_EQ(st["keyframe"], 0);
  const Quad detected = quad_from_json(st["detected_corners"]);
  for (int i = 0; i < 4; ++i) EXPECT_LE(distance(detected[i], f.scene.quads[0][i]), 1.5);
  EXPECT_TRUE(is_png(s.handle("GET", "/jobs/" + id + "/keyframe").body));
  EXPECT_EQ(s.handle("GET", "/jobs/" + id + "/result").status, 409);

  // Echo the detected corners back.
  const Response c = s.handle("POST", "/jobs/" + id + "/corners", json{{"corners", st["detected_corners"]}}.dump());
  ASSERT_EQ(c.status, 200) << c.body;
  EXPECT_EQ(quad_from_json(body_of(c)["corners"]), detected);

  EXPECT_EQ(s.handle("POST", "/jobs/" + id + "/render", R"({"colour": 1})").status, 422);
  ASSERT_EQ(s.handle("POST", "/jobs/" + id + "/render", R"({"blend": {"mode": "poisson"}})").status, 202);
  EXPECT_EQ(s.handle("POST", "/jobs/" + id + "/corners", json{{"corners", st["detected_corners"]}}.dump()).status,
            409);

  std::vector<double> progress;
  for (;;) {
    st = status(s, id);
    progress.push_back(st["progress"]);
    if (st["state"] == "done" || st["state"] == "failed") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ASSERT_EQ(st["state"], "done") << st.dump();
  for (std::size_t i = 1; i < progress.size(); ++i) EXPECT_GE(progress[i], progress[i - 1]);
  EXPECT_EQ(progress.back(), 1.0);
  EXPECT_EQ(st["report"]["termination"], "completed");
  EXPECT_EQ(st["report"]["frames"].size(), 5u);
  EXPECT_EQ(st["history"], json::parse(R"(["created","detecting","detected","corners_confirmed","rendering","done"])"));

  const Response frame = s.handle("GET", "/jobs/" + id + "/frames/4");
  EXPECT_EQ(frame.status, 200);
  EXPECT_TRUE(is_png(frame.body));
  EXPECT_EQ(s.handle("GET", "/jobs/" + id + "/frames/5").status, 404);
  EXPECT_EQ(s.handle("GET", "/jobs/" + id + "/frames/x").status, 404);

  const Response result = s.handle("GET", "/jobs/" + id + "/result");
  ASSERT_EQ(result.status, 200);
  EXPECT_EQ(result.content_type, "video/x-yuv4mpeg");
  std::ofstream(f.dir / "out.y4m", std::ios::binary) << result.body;
  EXPECT_EQ(read_y4m(f.dir / "out.y4m").frames.size(), 5u);
  EXPECT_TRUE(std::filesystem::exists(f.dir / "work" / (id + ".report.json")));

  f.clock_offset = 61;
  EXPECT_EQ(s.handle("GET", "/jobs/" + id + "/result").status, 410);
}

TEST(Corners, CanonicalisationAndRejection) {
  Fixture f;
  Service s(f.config());
  const std::string id = create(s);
  s.wait_idle();
  ASSERT_EQ(status(s, id)["state"], "detected");
  const std::string path = "/jobs/" + id + "/corners";

  // BL-first, still tracing the outline.
  const Response bl = s.handle("POST", path, R"({"frame": 0, "corners": [[40,88],[40,32],[120,32],[120,88]]})");
  ASSERT_EQ(bl.status, 200) << bl.body;
  EXPECT_EQ(body_of(bl)["corners"], json::parse("[[40,32],[120,32],[120,88],[40,88]]"));

  // Counter-clockwise is accepted as well.
  EXPECT_EQ(s.handle("POST", path, R"({"corners": [[40,32],[40,88],[120,88],[120,32]]})").status, 200);

  // Self-intersecting (bow-tie) order.
  EXPECT_EQ(s.handle("POST", path, R"({"corners": [[40,32],[120,88],[120,32],[40,88]]})").status, 422);
  EXPECT_EQ(s.handle("POST", path, R"({"corners": [[40,32],[120,32],[80,40],[40,88]]})").status, 422);
  EXPECT_EQ(s.handle("POST", path, R"({"corners": [[40,32],[170,32],[120,88],[40,88]]})").status, 422);
  EXPECT_EQ(s.handle("POST", path, R"({"corners": [[40,32],[120,32],[120,88]]})").status, 422);
  EXPECT_EQ(s.handle("POST", path, R"({"frame": 9, "corners": [[40,32],[120,32],[120,88],[40,88]]})").status, 422);
  EXPECT_EQ(s.handle("POST", path, R"({"frame": 0})").status, 422);
  EXPECT_EQ(s.handle("POST", "/jobs/job-77/corners", "{}").status, 404);

  const json st = status(s, id);
  EXPECT_EQ(st["state"], "corners_confirmed");
  EXPECT_TRUE(is_convex_clockwise(quad_from_json(st["confirmed_corners"]).corners()));
}

TEST(Workflow, DetectionFailureAndMissingHeatmaps) {
  Fixture f;
  Service s(f.config());
  const Response r = s.handle("POST", "/jobs", R"({"video": "blank", "advert": "ad"})");
  ASSERT_EQ(r.status, 201);
  const std::string bad = create(s, R"(, "detector": {"heatmaps": {"dir": "absent"}})");
  s.wait_idle();
  const json st = status(s, body_of(r)["id"]);
  EXPECT_EQ(st["state"], "failed");
  EXPECT_NE(st["error"].get<std::string>().find("NoBillboardFound"), std::string::npos);
  EXPECT_EQ(status(s, bad)["state"], "failed");
  EXPECT_EQ(s.handle("GET", "/jobs/" + bad + "/keyframe").status, 404);
}

TEST(Workflow, ConcurrentJobsAreIsolatedAndDeterministic) {
  Fixture f;
  Service s(f.config());
  const std::string a = create(s), b = create(s);
  s.wait_idle();
  const std::string corners = R"({"corners": [[40,32],[120,32],[120,88],[40,88]]})";
  ASSERT_EQ(s.handle("POST", "/jobs/" + a + "/corners", corners).status, 200);
  ASSERT_EQ(s.handle("POST", "/jobs/" + b + "/corners", corners).status, 200);
  ASSERT_EQ(s.handle("POST", "/jobs/" + a + "/render").status, 202);
  ASSERT_EQ(s.handle("POST", "/jobs/" + b + "/render").status, 202);
  s.wait_idle();
  const Response ra = s.handle("GET", "/jobs/" + a + "/result"), rb = s.handle("GET", "/jobs/" + b + "/result");
  ASSERT_EQ(ra.status, 200);
  EXPECT_EQ(ra.body, rb.body);
  EXPECT_EQ(status(s, a)["report"], status(s, b)["report"]);
}

TEST(StateMachine, RandomApiSequencesNeverBreakTheRecord) {
  Fixture f;
  Service s(f.config());
  std::mt19937_64 rng(3);
  std::vector<std::string> ids{"job-0"};
  const std::vector<std::string> corner_bodies{
      R"({"corners": [[40,32],[120,32],[120,88],[40,88]]})", R"({"corners": [[40,32],[120,88],[120,32],[40,88]]})",
      R"({"corners": 5})", "nonsense"};
  const std::vector<std::string> render_bodies{"", R"({"blend": {"mode": "direct"}})", R"({"x": 1})",
                                               R"({"track": {"window": -1}})"};
  for (int call = 0; call < 1000; ++call) {
    const std::string& id = ids[rng() % ids.size()];
    Response r;
    switch (rng() % 8) {
      case 0:
        r = s.handle("POST", "/jobs", rng() % 4 ? R"({"video": "scene", "advert": "ad"})" : R"({"video": "blank", "advert": "small"})");
        if (r.status == 201) ids.push_back(body_of(r)["id"]);
        break;
      case 1: r = s.handle("POST", "/jobs/" + id + "/corners", corner_bodies[rng() % corner_bodies.size()]); break;
      case 2: r = s.handle("POST", "/jobs/" + id + "/render", render_bodies[rng() % render_bodies.size()]); break;
      case 3: r = s.handle("GET", "/jobs/" + id); break;
      case 4: r = s.handle("GET", "/jobs/" + id + "/frames/" + std::to_string(rng() % 6)); break;
      case 5: r = s.handle("GET", "/jobs/" + id + "/result"); break;
      case 6: r = s.handle("GET", "/jobs/" + id + "/keyframe"); break;
      default: s.wait_idle(); continue;
    }
    ASSERT_NE(r.status, 500) << r.body;
    if (ids.size() > 12) ids.erase(ids.begin() + 1);
  }
  s.wait_idle();
  const std::map<std::string, JobState> by_name{
      {"created", JobState::Created},     {"detecting", JobState::Detecting},
      {"detected", JobState::Detected},   {"corners_confirmed", JobState::CornersConfirmed},
      {"rendering", JobState::Rendering}, {"done", JobState::Done},
      {"failed", JobState::Failed}};
  for (const json& j : body_of(s.handle("GET", "/jobs"))) {
    const json st = status(s, j["id"]);
    const json& h = st["history"];
    for (std::size_t i = 1; i < h.size(); ++i) {
      EXPECT_TRUE(legal_transition(by_name.at(h[i - 1]), by_name.at(h[i]))) << st.dump();
    }
    EXPECT_EQ(st["confirmed_corners"].is_null(),
              st["state"] == "created" || st["state"] == "detecting" || st["state"] == "detected" ||
                  (st["state"] == "failed" && h[h.size() - 2] == "detecting"));
  }
}

TEST(Http, ServesTheSameRoutes) {
  Fixture f;
  Service s(f.config());
  const int port = 20000 + static_cast<int>(::getpid() % 20000);
  std::thread server([&] { s.listen("127.0.0.1", port); });
  httplib::Client client("127.0.0.1", port);
  httplib::Result r;
  for (int i = 0; i < 200 && !(r = client.Get("/videos")); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body).size(), 2u);
  const auto created = client.Post("/jobs", R"({"video": "scene"})", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 422);
  s.stop();
  server.join();
}
