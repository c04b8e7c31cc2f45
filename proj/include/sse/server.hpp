#pragma once

// Live tuning playground: an engine that owns one simulation and applies scene edits and
// parameter changes between ticks, and an HTTP front end that drives it from a single worker.
//
// Endpoints (JSON bodies):
//   GET  /scene                         current frame, scenario script, play state
//   GET  /field?layer=social|obstacle|total
//                                       row-major cell-centre values, j = 0 (lowest y) first
//   POST /edit    {"op": ...}           add_agent, move_agent, remove_agent, set_orientation,
//                                       set_seated, set_speaking, move_goal
//   POST /params  {"social": {...}, "planner": {...}}
//   POST /control {"action": "play" | "pause" | "step" | "reset", "count": n, "seed": n}
//   GET  /stream                        server-sent events, one frame per tick
//
// A frame is the tick's log record plus "field_version", which changes whenever the cost field
// content changes. Schema-invalid edits answer 400; edits arriving while a tick is running
// answer 409 and may be retried.

#include "sse/scenario.hpp"
#include "sse/sim.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace sse {

struct EpisodeFinished : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Single-owner engine state; not thread-safe.
class PlaygroundEngine {
 public:
  explicit PlaygroundEngine(ScenarioScript script, std::optional<std::uint64_t> seed = std::nullopt);

  /// Applies one edit; throws SchemaError naming the offending field. Takes effect next tick.
  void edit(const nlohmann::json& e);
  /// Merges social-space and planner parameters; throws SchemaError.
  void set_params(const nlohmann::json& p);
  /// Advances one tick and returns its frame. Throws EpisodeFinished at the end of the script.
  const nlohmann::ordered_json& step();
  /// Restarts the current script and runs tick 0.
  void reset(std::optional<std::uint64_t> seed = std::nullopt);

  const nlohmann::ordered_json& frame() const { return frame_; }
  nlohmann::ordered_json scene() const;
  nlohmann::ordered_json field(FieldLayer layer) const;
  int field_version() const { return field_version_; }
  bool done() const { return sim_->done(); }
  const Simulation& simulation() const { return *sim_; }

 private:
  void replace_script(const nlohmann::json& j);

  std::unique_ptr<Simulation> sim_;
  std::uint64_t seed_;
  nlohmann::ordered_json frame_;
  int field_version_ = 0;
  std::optional<std::pair<SocialScene, SocialSpaceParams>> last_field_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  ///< 0 binds any free port
  double rate_hz = 10.0;  ///< ticks per second while playing, at most 10
  std::optional<std::uint64_t> seed;
  /// Runs on the worker at the start of every tick; tests use it to hold a tick open.
  std::function<void()> before_step;
};

class PlaygroundServer {
 public:
  explicit PlaygroundServer(ScenarioScript script, ServerOptions options = {});
  ~PlaygroundServer();
  PlaygroundServer(const PlaygroundServer&) = delete;
  PlaygroundServer& operator=(const PlaygroundServer&) = delete;

  /// Binds, starts the worker and listener threads, and returns the bound port.
  int start();
  void stop();
  /// Blocks until stop() is called or the listener fails.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sse
