#pragma once

// Scenario scripts: map, scripted agents, sensor noise, robot start and mission.

#include "sse/geometry.hpp"
#include "sse/nav.hpp"
#include "sse/occupancy.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sse {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Schema violation; the message starts with the offending field path.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Waypoint {
  double t = 0.0;
  Vec2d pos = Vec2d::Zero();
};

struct FacingPolicy {
  enum class Mode { path, fixed, robot, point };
  Mode mode = Mode::path;
  double theta = 0.0;           ///< fixed heading, and the initial heading for `path`
  Vec2d point = Vec2d::Zero();  ///< for `point`
};

struct AgentScript {
  std::string id;
  std::vector<Waypoint> waypoints;
  FacingPolicy facing;
  bool seated = false;
  std::vector<std::pair<double, double>> speech;
  /// Overrides `speech` when set.
  std::optional<bool> speaking;
  std::uint64_t appearance_seed = 1;
  std::uint64_t voice_seed = 1;
  std::string group;
};

struct SensorConfig {
  double position_sigma = 0.05;   ///< m, ground position noise
  double orientation_sigma = 0.1; ///< rad
  double embedding_noise = 0.05;
  double doa_sigma_deg = 0.0;     ///< added to the GCC-PHAT estimate
  double snr_db = 15.0;
  double dropout = 0.0;           ///< body detections
  double face_dropout = 0.0;
  double match_noise = 0.05;      ///< face-body likelihood jitter
  double max_range = 6.0;
};

struct ScenarioScript {
  std::string name;
  OccupancyGrid map;
  std::vector<AgentScript> agents;
  SensorConfig sensors;
  Pose2 robot;
  double duration = 10.0;
  std::uint64_t seed = 1;
  std::optional<Vec2d> goal;
  /// When false the robot never initiates an interaction.
  bool engage = true;
  SocialSpaceParams social;
  PlannerConfig planner;
};

/// Strict: unknown fields are schema errors. Relative map paths resolve against `base_dir`.
ScenarioScript parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = {});
ScenarioScript load_scenario(const std::filesystem::path& path);
/// Self-contained JSON (map inlined as text).
std::string scenario_to_json(const ScenarioScript& s);
void validate_scenario(const ScenarioScript& s);

}  // namespace sse
