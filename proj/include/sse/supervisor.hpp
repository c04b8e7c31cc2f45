#pragma once

// Interaction state machine: notices people who want to interact, approaches them, holds the
// conversation (half-duplex, facing the active speaker) and says goodbye when they leave.

#include "sse/nav.hpp"
#include "sse/scene.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sse {

enum class Phase { idle, approaching, engaged, disengaging };
std::string_view to_string(Phase p);

enum class ActionKind { navigate_to, face, speak, listen, wave, point, stop };
std::string_view to_string(ActionKind k);

struct RobotAction {
  ActionKind kind = ActionKind::stop;
  std::optional<Pose2> pose;        ///< navigate_to
  std::optional<EntityId> target;   ///< face
  std::string utterance;            ///< speak
  double direction = 0.0;           ///< point, radians in the map frame

  friend bool operator==(const RobotAction&, const RobotAction&) = default;
};

struct InteractionState {
  Phase phase = Phase::idle;
  std::optional<EntityId> target;
  double entered_at = 0.0;
  /// Persons the interaction is with; a group target is re-resolved from these each tick.
  std::set<PersonId> members;
  std::optional<PersonId> focus;
  std::optional<double> absent_since;
  double speaking_until = -1.0;
  /// Start of the current uninterrupted facing spell, per person.
  std::map<PersonId, double> facing_since;
};

struct SupervisorConfig {
  double engage_time = 2.0;
  double leave_time = 3.0;
  double facing_cone = deg2rad(30.0);
  double engage_range = 4.0;
  double arrival_tolerance = 0.15;
  double utterance_seconds = 1.5;
  /// When false the robot only responds; it never starts an interaction.
  bool initiate = true;
  /// The approach pose is kept until the target moves or turns by more than this.
  double replan_distance = 0.3;
  double replan_angle = deg2rad(30.0);
  ApproachOptions approach;
};

/// Facing direction of a body (velocity when walking, else orientation).
std::optional<double> body_facing(const BodyObservation& b);

class Supervisor {
 public:
  explicit Supervisor(SupervisorConfig config = {}) : config_(std::move(config)) {}

  /// One tick. `field` is used for approach poses; `s.robot` supplies the robot pose.
  std::vector<RobotAction> step(const SceneSnapshot& s, const CostField& field, double now);

  const InteractionState& state() const { return state_; }
  const SupervisorConfig& config() const { return config_; }
  /// Approach pose chosen in the last approaching tick.
  const std::optional<Pose2>& goal() const { return goal_; }

 private:
  void enter(Phase p, double now);
  bool resolve_target(const SceneSnapshot& s);
  void update_facing(const SceneSnapshot& s, double now);
  bool any_member_present(const SceneSnapshot& s) const;
  std::optional<PersonId> active_speaker(const SceneSnapshot& s) const;
  bool target_moved(const ApproachTarget& before, const ApproachTarget& now) const;

  SupervisorConfig config_;
  InteractionState state_;
  std::optional<Pose2> goal_;
  std::optional<ApproachTarget> goal_target_;
};

}  // namespace sse
