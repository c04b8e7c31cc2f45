#include "sse/server.hpp"

#include "httplib.h"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <future>
#include <mutex>
#include <thread>

namespace sse {

using nlohmann::json;
using nlohmann::ordered_json;

// Engine ---------------------------------------------------------------------------------------

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

double number_field(const json& e, const std::string& key) {
  if (!e.contains(key)) schema_fail(key, "required");
  if (!e.at(key).is_number()) schema_fail(key, "must be a number");
  return e.at(key).get<double>();
}

bool bool_field(const json& e, const std::string& key) {
  if (!e.contains(key)) schema_fail(key, "required");
  if (!e.at(key).is_boolean()) schema_fail(key, "must be a boolean");
  return e.at(key).get<bool>();
}

json& agent_entry(json& script, const json& e) {
  if (!e.contains("id") || !e.at("id").is_string()) schema_fail("id", "required string");
  const auto id = e.at("id").get<std::string>();
  for (auto& a : script.at("agents"))
    if (a.at("id") == id) return a;
  schema_fail("id", "no agent named " + id);
}

bool same_field(const CostField& f, const std::optional<std::pair<SocialScene, SocialSpaceParams>>& last) {
  return last && last->first == f.scene() && last->second == f.params();
}

}  // namespace

PlaygroundEngine::PlaygroundEngine(ScenarioScript script, std::optional<std::uint64_t> seed)
    : seed_(seed.value_or(script.seed)) {
  sim_ = std::make_unique<Simulation>(std::move(script), seed_);
  step();
}

void PlaygroundEngine::replace_script(const json& j) {
  ScenarioScript next = parse_scenario(j.dump());
  sim_->edit_script([&](ScenarioScript& s) { s = std::move(next); });
}

void PlaygroundEngine::edit(const json& e) {
  if (!e.is_object()) schema_fail("edit", "must be an object");
  if (!e.contains("op") || !e.at("op").is_string()) schema_fail("op", "required string");
  const auto op = e.at("op").get<std::string>();
  json script = json::parse(scenario_to_json(sim_->script()));

  if (op == "add_agent") {
    if (!e.contains("agent") || !e.at("agent").is_object()) schema_fail("agent", "required object");
    script.at("agents").push_back(e.at("agent"));
  } else if (op == "move_agent") {
    json& a = agent_entry(script, e);
    a["waypoints"] = json::array({json::array({0.0, number_field(e, "x"), number_field(e, "y")})});
  } else if (op == "remove_agent") {
    const json& a = agent_entry(script, e);
    auto& agents = script.at("agents");
    const auto id = a.at("id");
    agents.erase(std::remove_if(agents.begin(), agents.end(), [&](const json& x) { return x.at("id") == id; }),
                 agents.end());
  } else if (op == "set_orientation") {
    json& a = agent_entry(script, e);
    a["facing"] = number_field(e, "theta");
    a.erase("initial_heading");
  } else if (op == "set_seated") {
    agent_entry(script, e)["seated"] = bool_field(e, "seated");
  } else if (op == "set_speaking") {
    agent_entry(script, e)["speaking"] = bool_field(e, "speaking");
  } else if (op == "move_goal") {
    if (e.contains("goal") && e.at("goal").is_null()) {
      script.erase("goal");
    } else {
      script["goal"] = {number_field(e, "x"), number_field(e, "y")};
    }
  } else {
    schema_fail("op", "unknown operation " + op);
  }
  replace_script(script);
}

void PlaygroundEngine::set_params(const json& p) {
  if (!p.is_object()) schema_fail("params", "must be an object");
  json script = json::parse(scenario_to_json(sim_->script()));
  for (const auto& [key, value] : p.items()) {
    if (key != "social" && key != "planner") schema_fail(key, "unknown field");
    if (!value.is_object()) schema_fail(key, "must be an object");
    for (const auto& [k, v] : value.items()) script[key][k] = v;
  }
  replace_script(script);
}

const ordered_json& PlaygroundEngine::step() {
  if (sim_->done()) throw EpisodeFinished("episode finished at t = " + std::to_string(sim_->time()));
  const TickLog log = sim_->step();
  if (!same_field(sim_->field(), last_field_)) {
    ++field_version_;
    last_field_.emplace(sim_->field().scene(), sim_->field().params());
  }
  frame_ = to_json(log);
  frame_["field_version"] = field_version_;
  return frame_;
}

void PlaygroundEngine::reset(std::optional<std::uint64_t> seed) {
  if (seed) seed_ = *seed;
  sim_ = std::make_unique<Simulation>(sim_->script(), seed_);
  last_field_.reset();
  ++field_version_;
  step();
}

ordered_json PlaygroundEngine::scene() const {
  ordered_json j;
  j["tick"] = frame_.at("tick");
  j["time"] = frame_.at("time");
  j["done"] = sim_->done();
  j["field_version"] = field_version_;
  j["frame"] = frame_;
  j["script"] = ordered_json::parse(scenario_to_json(sim_->script()));
  return j;
}

ordered_json PlaygroundEngine::field(FieldLayer layer) const {
  const CostField& f = sim_->field();
  const OccupancyGrid& g = f.grid();
  ordered_json j;
  j["layer"] = layer == FieldLayer::social ? "social" : layer == FieldLayer::obstacle ? "obstacle" : "total";
  j["version"] = field_version_;
  j["width"] = g.width();
  j["height"] = g.height();
  j["resolution"] = g.resolution();
  j["origin"] = {g.origin().x(), g.origin().y()};
  j["data"] = f.layer(layer);
  return j;
}

// Server ---------------------------------------------------------------------------------------

namespace {

struct Reply {
  int status = 200;
  std::string body;
};

Reply ok(const ordered_json& j) { return {200, j.dump()}; }
Reply error(int status, const std::string& message) { return {status, ordered_json{{"error", message}}.dump()}; }

void send(httplib::Response& res, const Reply& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    send(res, error(400, std::string("body: ") + e.what()));
    return std::nullopt;
  }
}

}  // namespace

struct PlaygroundServer::Impl {
  static constexpr double kMaxRate = 10.0;
  using Job = std::function<Reply()>;

  Impl(ScenarioScript script, ServerOptions opts) : options(std::move(opts)), engine(std::move(script), options.seed) {
    if (!(options.rate_hz > 0.0 && options.rate_hz <= kMaxRate))
      throw std::invalid_argument("serve: rate must be in (0, 10] ticks per second");
    publish();
  }

  ServerOptions options;
  PlaygroundEngine engine;  // touched only by the worker after start()
  httplib::Server http;
  std::thread worker, listener;

  std::mutex jobs_mutex;
  std::condition_variable jobs_cv;
  std::deque<std::pair<Job, std::promise<Reply>>> jobs;
  bool stopping = false;

  std::atomic<bool> stepping{false};
  bool playing = false;  // worker-owned

  static constexpr std::size_t kHistory = 256;
  std::mutex frames_mutex;
  std::condition_variable frames_cv;
  std::deque<std::string> recent;  // frames sequence - recent.size() + 1 .. sequence
  std::uint64_t sequence = 0;
  bool closed = false;

  void publish() {
    {
      std::lock_guard lock(frames_mutex);
      recent.push_back(engine.frame().dump());
      if (recent.size() > kHistory) recent.pop_front();
      ++sequence;
    }
    frames_cv.notify_all();
  }

  /// Runs on the worker.
  void tick() {
    stepping = true;
    try {
      if (options.before_step) options.before_step();
      engine.step();
    } catch (...) {
      stepping = false;
      throw;
    }
    stepping = false;
    publish();
    if (engine.done()) playing = false;
  }

  Reply call(Job job) {
    std::promise<Reply> promise;
    auto future = promise.get_future();
    {
      std::lock_guard lock(jobs_mutex);
      if (stopping) return error(503, "server stopping");
      jobs.emplace_back(std::move(job), std::move(promise));
    }
    jobs_cv.notify_one();
    return future.get();
  }

  void run_worker() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / options.rate_hz));
    auto next = clock::now();
    for (;;) {
      std::unique_lock lock(jobs_mutex);
      auto ready = [&] { return stopping || !jobs.empty(); };
      if (playing) {
        jobs_cv.wait_until(lock, next, ready);
      } else {
        jobs_cv.wait(lock, ready);
      }
      if (stopping) {
        for (auto& [_, p] : jobs) p.set_value(error(503, "server stopping"));
        jobs.clear();
        return;
      }
      if (!jobs.empty()) {
        auto [job, promise] = std::move(jobs.front());
        jobs.pop_front();
        lock.unlock();
        const bool was_playing = playing;
        Reply r;
        try {
          r = job();
        } catch (const std::exception& e) {
          r = error(500, e.what());
        }
        promise.set_value(std::move(r));
        if (playing && !was_playing) next = clock::now();
        continue;
      }
      lock.unlock();
      if (playing && clock::now() >= next) {
        try {
          tick();
        } catch (const EpisodeFinished&) {
          playing = false;
        }
        next += period;
      }
    }
  }

  Reply control(const json& c) {
    if (!c.is_object() || !c.contains("action") || !c.at("action").is_string())
      return error(400, "action: required string");
    const auto action = c.at("action").get<std::string>();
    if (action == "play") {
      playing = !engine.done();
    } else if (action == "pause") {
      playing = false;
    } else if (action == "step") {
      playing = false;
      const int count = c.value("count", 1);
      if (count < 1) return error(400, "count: must be at least 1");
      try {
        for (int k = 0; k < count; ++k) tick();
      } catch (const EpisodeFinished& e) {
        return error(409, e.what());
      }
    } else if (action == "reset") {
      playing = false;
      std::optional<std::uint64_t> seed;
      if (c.contains("seed")) {
        if (!c.at("seed").is_number_unsigned()) return error(400, "seed: must be a non-negative integer");
        seed = c.at("seed").get<std::uint64_t>();
      }
      engine.reset(seed);
      publish();
    } else {
      return error(400, "action: unknown " + action);
    }
    ordered_json j;
    j["playing"] = playing;
    j["frame"] = engine.frame();
    return ok(j);
  }

  void routes() {
    http.Get("/scene", [this](const httplib::Request&, httplib::Response& res) {
      send(res, call([this] {
             auto j = engine.scene();
             j["playing"] = playing;
             return ok(j);
           }));
    });

    http.Get("/field", [this](const httplib::Request& req, httplib::Response& res) {
      const auto name = req.has_param("layer") ? req.get_param_value("layer") : "total";
      FieldLayer layer;
      if (name == "social") {
        layer = FieldLayer::social;
      } else if (name == "obstacle") {
        layer = FieldLayer::obstacle;
      } else if (name == "total") {
        layer = FieldLayer::total;
      } else {
        return send(res, error(400, "layer: expected social, obstacle or total"));
      }
      send(res, call([this, layer] { return ok(engine.field(layer)); }));
    });

    auto mutation = [this](auto apply) {
      return [this, apply](const httplib::Request& req, httplib::Response& res) {
        if (stepping) {
          res.set_header("Retry-After", "1");
          return send(res, error(409, "a tick is running; retry"));
        }
        const auto body = parse_body(req, res);
        if (!body) return;
        send(res, call([this, apply, b = *body] {
               try {
                 apply(b);
               } catch (const SchemaError& e) {
                 return error(400, e.what());
               } catch (const json::exception& e) {
                 return error(400, e.what());
               }
               return ok({{"applied", true}, {"next_tick", engine.simulation().tick()}});
             }));
      };
    };
    http.Post("/edit", mutation([this](const json& b) { engine.edit(b); }));
    http.Post("/params", mutation([this](const json& b) { engine.set_params(b); }));

    http.Post("/control", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req, res);
      if (!body) return;
      send(res, call([this, b = *body] { return control(b); }));
    });

    http.Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Cache-Control", "no-cache");
      // A new client starts from the current frame; a slow one skips what fell out of the history.
      auto sent = std::make_shared<std::uint64_t>(0);
      res.set_chunked_content_provider("text/event-stream", [this, sent](std::size_t, httplib::DataSink& sink) {
        std::unique_lock lock(frames_mutex);
        frames_cv.wait_for(lock, std::chrono::milliseconds(200), [&] { return closed || sequence > *sent; });
        if (closed) {
          sink.done();
          return false;
        }
        if (sequence == *sent) return sink.is_writable();
        const std::uint64_t first = sequence - recent.size() + 1;
        *sent = *sent == 0 ? sequence : std::max(*sent + 1, first);
        const std::string event = "data: " + recent[*sent - first] + "\n\n";
        lock.unlock();
        return sink.write(event.data(), event.size());
      });
    });
  }
};

PlaygroundServer::PlaygroundServer(ScenarioScript script, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(script), std::move(options))) {}

PlaygroundServer::~PlaygroundServer() { stop(); }

int PlaygroundServer::start() {
  Impl& s = *impl_;
  s.routes();
  int port = s.options.port;
  if (port == 0) {
    port = s.http.bind_to_any_port(s.options.host);
    if (port < 0) throw std::runtime_error("serve: cannot bind " + s.options.host);
  } else if (!s.http.bind_to_port(s.options.host, port)) {
    throw std::runtime_error("serve: cannot bind " + s.options.host + ":" + std::to_string(port));
  }
  s.worker = std::thread([&s] { s.run_worker(); });
  s.listener = std::thread([&s] { s.http.listen_after_bind(); });
  s.http.wait_until_ready();
  return port;
}

void PlaygroundServer::stop() {
  Impl& s = *impl_;
  {
    std::lock_guard lock(s.frames_mutex);
    s.closed = true;
  }
  s.frames_cv.notify_all();
  {
    std::lock_guard lock(s.jobs_mutex);
    s.stopping = true;
  }
  s.jobs_cv.notify_all();
  s.http.stop();
  if (s.listener.joinable()) s.listener.join();
  if (s.worker.joinable()) s.worker.join();
}

void PlaygroundServer::wait() {
  if (impl_->listener.joinable()) impl_->listener.join();
}

}  // namespace sse
