#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sstream>
#include <thread>

#include "slambench/error.hpp"
#include "slambench/ingest/synthetic.hpp"
#include "slambench/runner/service.hpp"
#include "support/support.hpp"

// After Eigen: <resolv.h> defines _res as a macro.
#include <httplib.h>

using namespace slambench;
using nlohmann::json;

namespace {

// A service on a free local port for the lifetime of the fixture.
struct LiveService {
  support::TempDir tmp;
  std::filesystem::path data;
  std::unique_ptr<runner::Service> service;
  std::thread thread;
  int port = 0;

  explicit LiveService(std::uint32_t frames = 20) {
    ingest::SyntheticSceneConfig cfg;
    cfg.frame_count = frames;
    cfg.width = 32;
    cfg.height = 24;
    cfg.intrinsics = {20.f, 20.f, 15.5f, 11.5f, {}};
    cfg.cloud_spacing = 0.05;
    data = tmp / "circle.slam";
    ingest::generate_synthetic(cfg, data);
    runner::ServiceConfig sc;
    sc.libraries = {support::plugin("gt-replay"), support::plugin("noisy-replay"), support::plugin("icp-odometry")};
    sc.datasets = {data};
    sc.point_budget = 500;
    service = std::make_unique<runner::Service>(sc);
    port = service->bind("127.0.0.1", 0);
    thread = std::thread([this] { service->run(); });
  }
  ~LiveService() {
    service->stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(30, 0);
    return c;
  }

  json post(const std::string& path, const json& body, int expect = 200) const {
    auto res = client().Post(path, body.dump(), "application/json");
    REQUIRE(res);
    INFO(path << " -> " << res->body);
    CHECK(res->status == expect);
    return json::parse(res->body);
  }
  json put(const std::string& path, const json& body, int expect = 200) const {
    auto res = client().Put(path, body.dump(), "application/json");
    REQUIRE(res);
    INFO(path << " -> " << res->body);
    CHECK(res->status == expect);
    return json::parse(res->body);
  }
  json get(const std::string& path, int expect = 200) const {
    auto res = client().Get(path);
    REQUIRE(res);
    INFO(path << " -> " << res->body);
    CHECK(res->status == expect);
    return json::parse(res->body);
  }

  std::string session(const json& algorithms, bool forward_gt = true) const {
    return post("/sessions", {{"dataset", "circle.slam"}, {"algorithms", algorithms}, {"forward_gt", forward_gt}})
        .at("id")
        .get<std::string>();
  }
};

}  // namespace

TEST_CASE("stepping a session grows its trajectory one frame at a time") {
  LiveService svc;
  const auto id = svc.session(json::array({"gt-replay"}));
  auto snap = svc.get("/sessions/" + id + "/snapshot");
  CHECK(snap.at("mode") == "PAUSED");
  CHECK(snap.at("frame") == 0);
  CHECK(snap.at("trajectories").at("est").at("gt-replay").empty());

  const auto r = svc.post("/sessions/" + id + "/step", {{"n", 5}});
  CHECK(r.at("mode") == "PAUSED");
  CHECK(r.at("frame") == 5);
  snap = svc.get("/sessions/" + id + "/snapshot");
  const auto& est = snap.at("trajectories").at("est").at("gt-replay");
  const auto& gt = snap.at("trajectories").at("gt");
  REQUIRE(est.size() == 5);
  CHECK(snap.at("rows").at("gt-replay").size() == 5);

  // gt-replay reproduces ground truth point for point, as [t, x, y, z, qw, qx, qy, qz].
  REQUIRE(gt.size() >= 5);
  for (std::size_t i = 0; i < 5; ++i) {
    REQUIRE(est[i].size() == 8);
    CHECK(est[i] == gt[i]);
  }

  svc.post("/sessions/" + id + "/step", {});
  CHECK(svc.get("/sessions/" + id + "/snapshot").at("trajectories").at("est").at("gt-replay").size() == 6);
}

TEST_CASE("live parameter changes are audited") {
  LiveService svc;
  const auto id = svc.session(json::array({json{{"library", "noisy-replay"}, {"parameters", {{"seed", "3"}}}}}));
  svc.post("/sessions/" + id + "/step", {{"n", 4}});
  const auto entry = svc.put("/sessions/" + id + "/params", {{"name", "st"}, {"value", 0.02}});
  CHECK(entry.at("frame") == 4);
  CHECK(entry.at("name") == "sigma-trans");
  CHECK(entry.at("old") == 0.0);
  CHECK(entry.at("new") == 0.02);
  svc.post("/sessions/" + id + "/step", {{"n", 2}});
  svc.put("/sessions/" + id + "/params", {{"algorithm", "noisy-replay"}, {"name", "drift"}, {"value", "0.5"}});

  const auto snap = svc.get("/sessions/" + id + "/snapshot");
  const auto& audit = snap.at("audit");
  REQUIRE(audit.size() == 2);
  CHECK(audit[0] == entry);
  CHECK(audit[1].at("frame") == 6);
  CHECK(audit[1].at("name") == "drift");
  CHECK(audit[1].at("new") == 0.5);
  bool found = false;
  for (const auto& p : snap.at("params").at("noisy-replay"))
    if (p.at("long_name") == "sigma-trans") {
      found = true;
      CHECK(p.at("value") == 0.02);
      CHECK(p.at("live") == true);
    }
  CHECK(found);

  // Refusals: a parameter that is not live, out of bounds, unknown, an unknown session.
  CHECK(svc.put("/sessions/" + id + "/params", {{"name", "seed"}, {"value", 1}}, 409).at("error") == "ParameterNotLive");
  CHECK(svc.put("/sessions/" + id + "/params", {{"name", "st"}, {"value", 99}}, 400).at("error") == "ParameterOutOfBounds");
  CHECK(svc.put("/sessions/" + id + "/params", {{"name", "zz"}, {"value", 1}}, 400).at("error") == "UnknownParameter");
  CHECK(svc.get("/sessions/nope/snapshot", 404).at("error") == "SessionNotFound");
  CHECK(svc.get("/sessions/" + id + "/snapshot").at("audit").size() == 2);
}

TEST_CASE("sessions are isolated") {
  LiveService svc;
  const auto a = svc.session(json::array({"noisy-replay"}));
  const auto b = svc.session(json::array({"noisy-replay"}));
  CHECK(a != b);
  svc.put("/sessions/" + a + "/params", {{"name", "sigma-trans"}, {"value", 0.5}});
  std::thread ta([&] { svc.post("/sessions/" + a + "/step", {{"n", 10}}); });
  std::thread tb([&] { svc.post("/sessions/" + b + "/step", {{"n", 10}}); });
  ta.join();
  tb.join();
  const auto sa = svc.get("/sessions/" + a + "/snapshot");
  const auto sb = svc.get("/sessions/" + b + "/snapshot");
  for (const auto& p : sb.at("params").at("noisy-replay"))
    if (p.at("long_name") == "sigma-trans") CHECK(p.at("value") == 0.0);
  CHECK(sb.at("audit").empty());
  // Without noise the estimate is the ground truth; with it, it is not.
  const auto& ea = sa.at("trajectories").at("est").at("noisy-replay");
  const auto& eb = sb.at("trajectories").at("est").at("noisy-replay");
  REQUIRE(ea.size() == 10);
  REQUIRE(eb.size() == 10);
  CHECK(eb == json(std::vector<json>(sb.at("trajectories").at("gt").begin(), sb.at("trajectories").at("gt").begin() + 10)));
  CHECK(ea.back() != eb.back());
  CHECK(svc.get("/sessions").at("sessions").size() == 2);
}

TEST_CASE("play runs to the end and the stream replays every message") {
  LiveService svc(15);
  const auto id = svc.session(json::array({"gt-replay", "noisy-replay"}));
  svc.post("/sessions/" + id + "/play", {});
  json snap;
  for (int i = 0; i < 500; ++i) {
    snap = svc.get("/sessions/" + id + "/snapshot");
    if (snap.at("mode") == "DONE") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  REQUIRE(snap.at("mode") == "DONE");
  CHECK(snap.at("frame") == 15);
  REQUIRE(snap.contains("reports"));
  CHECK(snap.at("reports").size() == 2);
  CHECK(svc.post("/sessions/" + id + "/step", {{"n", 1}}).at("mode") == "DONE");

  std::string body;
  auto res = svc.client().Get("/sessions/" + id + "/stream", [&](const char* d, std::size_t n) {
    body.append(d, n);
    return true;
  });
  REQUIRE(res);
  CHECK(res->status == 200);
  std::istringstream in(body);
  std::string line;
  std::map<std::string, int> counts;
  std::vector<json> msgs;
  while (std::getline(in, line)) {
    msgs.push_back(json::parse(line));
    counts[msgs.back().at("type").get<std::string>()]++;
  }
  CHECK(counts["pose-appended"] == 30);
  CHECK(counts["row-appended"] == 30);
  CHECK(msgs.back().at("type") == "status-changed");
  CHECK(msgs.back().at("mode") == "DONE");

  // Resuming from an offset yields the tail.
  std::string tail;
  svc.client().Get("/sessions/" + id + "/stream?from=" + std::to_string(msgs.size() - 3), [&](const char* d, std::size_t n) {
    tail.append(d, n);
    return true;
  });
  CHECK(std::count(tail.begin(), tail.end(), '\n') == 3);
}

TEST_CASE("pause holds the frame cursor") {
  LiveService svc(200);
  const auto id = svc.session(json::array({"gt-replay"}));
  svc.post("/sessions/" + id + "/play", {});
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  const auto paused = svc.post("/sessions/" + id + "/pause", {});
  const auto frame = paused.at("frame").get<int>();
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  const auto snap = svc.get("/sessions/" + id + "/snapshot");
  if (snap.at("mode") == "PAUSED") CHECK(snap.at("frame") == frame);
  else CHECK(snap.at("mode") == "DONE");
}

TEST_CASE("catalogue, clouds and request errors") {
  LiveService svc;
  const auto algos = svc.get("/algorithms").at("algorithms");
  REQUIRE(algos.size() == 3);
  CHECK(algos[2].at("name") == "icp-odometry");
  bool stride = false;
  for (const auto& p : algos[2].at("parameters"))
    if (p.at("long_name") == "stride") {
      stride = true;
      CHECK(p.at("live") == true);
      CHECK(p.at("type") == "int");
    }
  CHECK(stride);
  const auto ds = svc.get("/datasets").at("datasets");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].at("input_frames") == 20);

  const auto id = svc.session(json::array({"icp-odometry"}), false);
  svc.post("/sessions/" + id + "/step", {{"n", 3}});
  const auto cloud = svc.get("/sessions/" + id + "/cloud");
  CHECK(cloud.at("source") == "icp-odometry");
  CHECK(cloud.at("points").size() == std::min<std::size_t>(500, cloud.at("total").get<std::size_t>()));
  const auto gt = svc.get("/sessions/" + id + "/cloud?gt=1&budget=50");
  CHECK(gt.at("source") == "gt");
  CHECK(gt.at("total").get<std::size_t>() > 50);
  CHECK(gt.at("points").size() == 50);
  CHECK(svc.get("/sessions/" + id + "/cloud?gt=1&budget=50") == gt);  // seeded decimation

  CHECK(svc.post("/sessions", {{"algorithms", json::array({"nope"})}}, 400).at("error") == "InvalidConfig");
  CHECK(svc.post("/sessions", {{"dataset", "circle.slam"}}, 400).at("error") == "InvalidConfig");
  auto res = svc.client().Post("/sessions", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  auto opt = svc.client().Options("/sessions");
  REQUIRE(opt);
  CHECK(opt->status == 204);
  CHECK(opt->get_header_value("Access-Control-Allow-Origin") == "*");
}
