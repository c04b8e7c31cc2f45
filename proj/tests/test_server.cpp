#include "doctest.h"

#include "sse/server.hpp"

#include "httplib.h"

#include <chrono>
#include <filesystem>
#include <future>
#include <latch>
#include <thread>

using namespace sse;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = SSE_SCENARIO_DIR;

struct Running {
  explicit Running(const std::string& name, ServerOptions options = {})
      : server(load_scenario(kScenarios / (name + ".json")), std::move(options)), port(server.start()),
        client("127.0.0.1", port) {
    client.set_read_timeout(30);
  }
  ~Running() { server.stop(); }

  json get(const std::string& path, int expect = 200) {
    const auto r = client.Get(path);
    REQUIRE(r);
    CHECK(r->status == expect);
    return json::parse(r->body);
  }
  json post(const std::string& path, const json& body, int expect = 200) {
    const auto r = client.Post(path, body.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == expect);
    return json::parse(r->body);
  }

  PlaygroundServer server;
  int port;
  httplib::Client client;
};

const json& agent(const json& frame, const std::string& id) {
  for (const auto& a : frame.at("agents"))
    if (a.at("id") == id) return a;
  FAIL("agent missing: " << id);
  throw std::logic_error("unreachable");
}

double min_clearance(const json& trajectory, double x, double y) {
  double best = 1e9;
  for (const auto& p : trajectory) best = std::min(best, std::hypot(p[0].get<double>() - x, p[1].get<double>() - y));
  return best;
}

json without_version(json frame) {
  frame.erase("field_version");
  return frame;
}

}  // namespace

TEST_CASE("scene: a fresh load shows the scripted agents at t = 0") {
  Running s("group_conversation");
  const auto scene = s.get("/scene");
  CHECK(scene.at("tick") == 0);
  CHECK(scene.at("playing") == false);
  const auto& host = agent(scene.at("frame"), "host");
  CHECK(host.at("x").get<double>() == doctest::Approx(4.5));
  CHECK(host.at("y").get<double>() == doctest::Approx(3.9));
  CHECK(scene.at("script").at("agents").size() == 2);
}

TEST_CASE("edit: moving an agent shows in the next frame with a new plan") {
  Running s("blocking_person");
  const auto before = s.post("/control", {{"action", "step"}, {"count", 10}}).at("frame");

  Running baseline("blocking_person");
  const auto unedited = baseline.post("/control", {{"action", "step"}, {"count", 11}}).at("frame");

  s.post("/edit", {{"op", "move_agent"}, {"id", "stander"}, {"x", 3.2}, {"y", 3.9}});
  const auto after = s.post("/control", {{"action", "step"}}).at("frame");
  CHECK(after.at("tick") == before.at("tick").get<int>() + 1);
  CHECK(agent(after, "stander").at("x").get<double>() == doctest::Approx(3.2));
  CHECK(agent(after, "stander").at("y").get<double>() == doctest::Approx(3.9));
  CHECK(after.at("plan").at("trajectory") != unedited.at("plan").at("trajectory"));

  // The tracker confirms the new body after a few hits.
  s.post("/control", {{"action", "step"}, {"count", 3}});
  const auto field = s.get("/field?layer=social");
  const int w = field.at("width"), i = int(3.2 / 0.05), j = int(3.9 / 0.05);
  CHECK(field.at("data")[j * w + i].get<double>() > 0.5);
}

TEST_CASE("edit: other operations reach the script") {
  Running s("empty_room");
  s.post("/edit", {{"op", "add_agent"},
                   {"agent", {{"id", "new"}, {"waypoints", {{0, 4.0, 4.0}}}, {"facing", "robot"}}}});
  s.post("/edit", {{"op", "set_orientation"}, {"id", "new"}, {"theta", 1.0}});
  s.post("/edit", {{"op", "set_seated"}, {"id", "new"}, {"seated", true}});
  s.post("/edit", {{"op", "set_speaking"}, {"id", "new"}, {"speaking", true}});
  s.post("/edit", {{"op", "move_goal"}, {"x", 6.0}, {"y", 2.0}});
  const auto frame = s.post("/control", {{"action", "step"}}).at("frame");
  const auto& a = agent(frame, "new");
  CHECK(a.at("theta").get<double>() == doctest::Approx(1.0));
  CHECK(a.at("seated") == true);
  CHECK(a.at("speaking") == true);
  CHECK(frame.at("plan").at("goal") != nullptr);
  const auto script = s.get("/scene").at("script");
  CHECK(script.at("goal") == json::array({6.0, 2.0}));

  s.post("/edit", {{"op", "remove_agent"}, {"id", "new"}});
  CHECK(s.post("/control", {{"action", "step"}}).at("frame").at("agents").empty());
}

TEST_CASE("edit: schema-invalid edits answer 400 and change nothing") {
  Running s("blocking_person");
  const auto script = s.get("/scene").at("script");
  CHECK(s.post("/edit", {{"op", "teleport"}}, 400).at("error").get<std::string>().starts_with("op"));
  CHECK(s.post("/edit", {{"op", "move_agent"}, {"id", "nobody"}, {"x", 1}, {"y", 1}}, 400)
            .at("error")
            .get<std::string>()
            .starts_with("id"));
  CHECK(s.post("/edit", {{"op", "move_agent"}, {"id", "stander"}, {"x", "far"}, {"y", 1}}, 400)
            .at("error")
            .get<std::string>()
            .starts_with("x"));
  CHECK(s.post("/edit", {{"op", "add_agent"}, {"agent", {{"id", "b"}, {"waypoints", {{0, 4, 4}}}, {"hat", 1}}}}, 400)
            .at("error")
            .get<std::string>()
            .starts_with("agents[1].hat"));
  CHECK(s.post("/params", {{"social", {{"sigma_front", -1.0}}}}, 400).at("error").get<std::string>().starts_with("social"));
  CHECK(s.post("/params", {{"weather", {}}}, 400).at("error").get<std::string>().starts_with("weather"));
  const auto r = s.client.Post("/edit", "{not json", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(s.get("/scene").at("script") == script);
}

TEST_CASE("edit: an edit during a running tick answers 409") {
  std::latch entered(1), release(1);
  std::atomic<int> held{0};
  ServerOptions options;
  options.before_step = [&] {
    if (held++ == 0) {
      entered.count_down();
      release.wait();
    }
  };
  Running s("blocking_person", options);
  auto stepping = std::async(std::launch::async, [&] {
    httplib::Client c("127.0.0.1", s.port);
    return c.Post("/control", json{{"action", "step"}}.dump(), "application/json")->status;
  });
  entered.wait();
  const auto r = s.client.Post("/edit", json{{"op", "move_goal"}, {"x", 5.0}, {"y", 3.0}}.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == 409);
  CHECK(r->get_header_value("Retry-After") == "1");
  release.count_down();
  CHECK(stepping.get() == 200);
  s.post("/edit", {{"op", "move_goal"}, {"x", 5.0}, {"y", 3.0}});
}

TEST_CASE("control: stepping while paused equals a free run, and reset reproduces frame 0") {
  const auto script = load_scenario(kScenarios / "approach_single.json");
  const auto run = run_scenario(script, 3);
  Running s("approach_single");
  const auto first = s.post("/control", {{"action", "reset"}, {"seed", 3}}).at("frame");
  CHECK(without_version(first) == json(to_json(run.ticks[0])));
  for (int k = 1; k <= 30; ++k) {
    const auto frame = s.post("/control", {{"action", "step"}}).at("frame");
    CHECK(without_version(frame) == json(to_json(run.ticks[k])));
  }
  const auto again = s.post("/control", {{"action", "reset"}, {"seed", 3}}).at("frame");
  CHECK(without_version(again).dump() == without_version(first).dump());
}

TEST_CASE("control: play advances on its own and pause stops it") {
  Running s("empty_room");
  s.post("/control", {{"action", "play"}});
  std::this_thread::sleep_for(std::chrono::milliseconds(600));
  s.post("/control", {{"action", "pause"}});
  const int t1 = s.get("/scene").at("tick");
  CHECK(t1 > 3);
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  CHECK(s.get("/scene").at("tick") == t1);
  CHECK(s.post("/control", {{"action", "jump"}}, 400).contains("error"));
}

TEST_CASE("server: the play rate is capped at 10 Hz") {
  ServerOptions options;
  options.rate_hz = 30.0;
  CHECK_THROWS_AS(PlaygroundServer(load_scenario(kScenarios / "empty_room.json"), options), std::invalid_argument);
}

TEST_CASE("control: stepping past the end answers 409") {
  Running s("crossing");
  s.post("/control", {{"action", "step"}, {"count", 79}});
  CHECK(s.get("/scene").at("done") == true);
  s.post("/control", {{"action", "step"}}, 409);
}

TEST_CASE("params: a larger social weight does not bring plans closer to the person") {
  Running s("blocking_person");
  auto closest = [&] {
    double best = 1e9;
    for (int k = 0; k < 40; ++k) {
      const auto f = s.post("/control", {{"action", "step"}}).at("frame");
      best = std::min(best, min_clearance(f.at("plan").at("trajectory"), 3.5, 3.0));
    }
    return best;
  };
  s.post("/control", {{"action", "reset"}, {"seed", 2}});
  const double base = closest();
  s.post("/params", {{"planner", {{"w_social", 16.0}}}});
  CHECK(s.get("/scene").at("script").at("planner").at("w_social") == 16.0);
  s.post("/control", {{"action", "reset"}, {"seed", 2}});
  const double raised = closest();
  CHECK(raised >= base - 1e-9);
}

TEST_CASE("field: layers carry dimensions and a version that follows the scene") {
  Running s("blocking_person");
  const auto total = s.get("/field?layer=total");
  const int w = total.at("width"), h = total.at("height");
  CHECK(total.at("data").size() == std::size_t(w) * h);
  CHECK(total.at("resolution").get<double>() == doctest::Approx(0.05));
  const auto obstacle = s.get("/field?layer=obstacle");
  CHECK(obstacle.at("data")[0].get<double>() > 0.0);
  s.get("/field?layer=heat", 400);

  const int v0 = total.at("version");
  s.post("/edit", {{"op", "move_agent"}, {"id", "stander"}, {"x", 5.0}, {"y", 4.0}});
  s.post("/control", {{"action", "step"}});
  CHECK(s.get("/field?layer=social").at("version").get<int>() > v0);
}

TEST_CASE("stream: one event per tick") {
  Running s("empty_room");
  std::vector<json> frames;
  std::latch connected(1);
  std::thread reader([&] {
    httplib::Client c("127.0.0.1", s.port);
    std::string buffer;
    bool signalled = false;
    c.Get("/stream", [&](const char* data, std::size_t len) {
      buffer.append(data, len);
      for (auto end = buffer.find("\n\n"); end != std::string::npos; end = buffer.find("\n\n")) {
        frames.push_back(json::parse(buffer.substr(6, end - 6)));
        buffer.erase(0, end + 2);
      }
      if (!signalled && !frames.empty()) {
        signalled = true;
        connected.count_down();
      }
      return frames.size() < 4;
    });
  });
  connected.wait();
  for (int k = 0; k < 3; ++k) s.post("/control", {{"action", "step"}});
  reader.join();
  REQUIRE(frames.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(frames[k].at("tick") == k);
    CHECK(frames[k].contains("field_version"));
    CHECK(frames[k].contains("supervisor"));
    CHECK(frames[k].at("plan").contains("trajectory"));
  }
}
