#pragma once

// Closed-loop simulation: scripted agents, synthetic sensing, the perception stack, the
// supervisor and the planner, logged tick by tick.

#include "sse/association.hpp"
#include "sse/nav.hpp"
#include "sse/scenario.hpp"
#include "sse/scene.hpp"
#include "sse/supervisor.hpp"
#include "sse/tracker.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sse {

/// mt19937_64 that counts its draws, so runs can log how much randomness they consumed.
class CountingRng {
 public:
  using result_type = std::mt19937_64::result_type;
  explicit CountingRng(std::uint64_t seed) : engine_(seed) {}
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() {
    ++draws_;
    return engine_();
  }
  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

inline constexpr double kSimDt = 0.1;
inline constexpr int kAppearanceDim = 32;
inline constexpr int kFaceDim = 64;

/// Deterministic unit embedding drawn from `seed`.
Eigen::VectorXd seeded_embedding(std::uint64_t seed, int dim);

struct AgentTruth {
  std::string id;
  Pose2 pose;
  Vec2d velocity = Vec2d::Zero();
  bool speaking = false;
  bool seated = false;
  std::string group;
  bool visible = false;  ///< body inside the camera view and range
};

/// Scripted agent state at time t (piecewise-linear waypoints, held at the ends).
AgentTruth agent_truth(const AgentScript& a, double t, const Pose2& robot);

/// Raw sensor output for one tick, keyed by detection and episode ids.
struct Observations {
  std::vector<Detection> detections;
  std::vector<BodyObservation> bodies;  ///< ids equal the detection sources
  std::vector<FaceObservation> faces;
  std::vector<VoiceObservation> voices;
  std::vector<MatchCandidate> face_body;  ///< face to detection candidates
  std::map<std::string, std::string> detection_agent;
  std::map<FeatureId, std::string> feature_agent;  ///< faces and voices
};

/// Face and voice episode bookkeeping: an id lives while its agent stays observed.
struct EpisodeState {
  std::map<std::string, std::string> face;
  std::map<std::string, std::string> voice;
  int next_detection = 1;
  int next_face = 1;
  int next_voice = 1;
};

struct EmbeddingBank {
  std::map<std::string, Eigen::VectorXd> appearance;
  std::map<std::string, Eigen::VectorXd> face;
  std::map<std::string, Eigen::VectorXd> voice;
};
EmbeddingBank make_embeddings(const ScenarioScript& s);

Observations emit_observations(const std::vector<AgentTruth>& agents, const RobotState& robot,
                               const ScenarioScript& script, const EmbeddingBank& bank, const CameraModel& camera,
                               EpisodeState& episodes, CountingRng& rng);

struct PlanLog {
  std::string mode;  ///< plan, turn, hold
  std::optional<Vec2d> goal;
  Control u1;
  double cost = 0.0;
  double braking_cost = 0.0;
  std::vector<Vec2d> trajectory;
  bool stopped = false;
};

struct TrackLog {
  std::string id;
  Eigen::Vector4d state = Eigen::Vector4d::Zero();
  std::string status;
};

struct TickLog {
  int tick = 0;
  double time = 0.0;
  std::vector<AgentTruth> agents;
  std::map<std::string, std::string> truth_person;  ///< agent id -> person id
  SceneSnapshot snapshot;
  std::vector<MatchCandidate> candidates;
  std::vector<TrackLog> tracks;
  double affinity = 0.0;
  Phase phase = Phase::idle;
  std::optional<EntityId> target;
  std::vector<RobotAction> actions;
  PlanLog plan;
  std::uint64_t rng_draws = 0;
};

/// "kind:token", e.g. "face:face_3".
std::string entity_string(const EntityId& id);
EntityId entity_from_string(const std::string& s);

nlohmann::ordered_json to_json(const TickLog& t);
/// Inverse of to_json for the fields metrics and rendering use (embeddings are not logged).
TickLog tick_from_json(const nlohmann::json& j);

class Simulation {
 public:
  explicit Simulation(ScenarioScript script, std::optional<std::uint64_t> seed = std::nullopt);

  bool done() const { return tick_ >= total_ticks_; }
  /// One tick; NoFeasiblePlan is caught, logged as a stop, and reflected in stopped().
  TickLog step();

  double time() const { return tick_ * kSimDt; }
  int tick() const { return tick_; }
  bool stopped() const { return stopped_; }
  const ScenarioScript& script() const { return script_; }
  /// Edits take effect on the next tick; agent embeddings are refreshed.
  void edit_script(const std::function<void(ScenarioScript&)>& edit);
  const RobotState& robot() const { return robot_; }
  const SceneSnapshot& snapshot() const { return last_.snapshot; }
  const TickLog& last() const { return last_; }
  const CostField& field() const { return *field_; }
  std::uint64_t rng_draws() const { return rng_.draws(); }

 private:
  ScenarioScript script_;
  CountingRng rng_;
  EmbeddingBank bank_;
  EpisodeState episodes_;
  CameraModel camera_;
  Tracker tracker_;
  PersonManager persons_;
  Supervisor supervisor_;
  RobotState robot_;
  std::optional<ControlSequence> previous_;
  std::unique_ptr<CostField> field_;
  /// People recently seen, kept in the cost field while they are outside the camera view.
  std::map<FeatureId, std::pair<SocialAgent, double>> nav_memory_;
  TickLog last_;
  int tick_ = 0;
  int total_ticks_ = 0;
  bool stopped_ = false;
};

struct Metrics {
  double association_accuracy = 1.0;
  int id_switches = 0;
  double group_f1 = 1.0;
  double mean_distance = 0.0;  ///< robot to nearest agent
  double min_distance = 0.0;
  bool goal_success = false;
  std::optional<double> time_to_engage;
  double path_length = 0.0;
  int ticks = 0;
  int stop_events = 0;
};

Metrics compute_metrics(const std::vector<TickLog>& ticks, const ScenarioScript& script);
nlohmann::ordered_json to_json(const Metrics& m);

struct RunResult {
  std::vector<TickLog> ticks;
  Metrics metrics;
  bool stopped = false;
};

RunResult run_scenario(const ScenarioScript& script, std::optional<std::uint64_t> seed = std::nullopt);

/// One JSON object per line.
std::string to_jsonl(const std::vector<TickLog>& ticks);
std::vector<TickLog> parse_jsonl(const std::string& text);

}  // namespace sse
