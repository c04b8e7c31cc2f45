#pragma once

// Social navigation: personal and group space costs over the occupancy map, approach-pose
// selection, and a receding-horizon controller for a differential-drive base.

#include "sse/geometry.hpp"
#include "sse/occupancy.hpp"
#include "sse/scene.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace sse {

struct Unreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoFeasiblePlan : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SocialSpaceParams {
  double sigma_front = 0.45;
  double sigma_side = 0.45;
  double sigma_rear = 0.30;
  double velocity_gain = 0.8;  ///< front stretch per m/s
  double seated_scale = 1.2;
  double group_sigma = 0.9;
  double peak = 1.0;
  double obstacle_peak = 10.0;
  double inflation_radius = 0.3;  ///< m

  void validate() const;
  friend bool operator==(const SocialSpaceParams&, const SocialSpaceParams&) = default;
};

/// A person as seen by the cost model, map frame.
struct SocialAgent {
  Vec2d position = Vec2d::Zero();
  /// Body orientation; facing falls back to it below the walking threshold. Absent means isotropic.
  std::optional<double> orientation;
  Vec2d velocity = Vec2d::Zero();
  bool seated = false;
  friend bool operator==(const SocialAgent&, const SocialAgent&) = default;
};

struct SocialGroup {
  Vec2d centre = Vec2d::Zero();
  friend bool operator==(const SocialGroup&, const SocialGroup&) = default;
};

struct SocialScene {
  std::vector<SocialAgent> agents;
  std::vector<SocialGroup> groups;  ///< only groups of two or more
  friend bool operator==(const SocialScene&, const SocialScene&) = default;
};

/// Bodies with a ground position and groups of two or more.
SocialScene social_scene_from_snapshot(const SceneSnapshot& s);

/// Speed above which facing follows the velocity instead of the body orientation.
inline constexpr double kWalkingSpeed = 0.3;

double person_cost(const Vec2d& point, const SocialAgent& person, const SocialSpaceParams& params = {});
double group_cost(const Vec2d& point, const SocialGroup& group, const SocialSpaceParams& params = {});

enum class FieldLayer { total, obstacle, social };

/// Obstacle term rasterised on the grid; social terms evaluated in closed form.
class CostField {
 public:
  CostField(OccupancyGrid grid, SocialScene scene, SocialSpaceParams params = {});

  /// Cost at a map point: bilinear obstacle term plus social terms. Outside the map counts as
  /// an obstacle.
  double at(const Vec2d& p) const { return obstacle_at(p) + social_at(p); }
  double obstacle_at(const Vec2d& p) const;
  double social_at(const Vec2d& p) const;
  bool occupied(const Vec2d& p) const { return grid_.occupied_at(p); }

  /// One value per cell centre, row-major with j = 0 (lowest y) first.
  std::vector<double> layer(FieldLayer which) const;

  const OccupancyGrid& grid() const { return grid_; }
  const SocialScene& scene() const { return scene_; }
  const SocialSpaceParams& params() const { return params_; }

 private:
  OccupancyGrid grid_;
  SocialScene scene_;
  SocialSpaceParams params_;
  std::vector<double> obstacle_;
};

CostField build_cost_field(const SceneSnapshot& s, OccupancyGrid grid, const SocialSpaceParams& params = {});

// Approach --------------------------------------------------------------------------------------

struct ApproachTarget {
  Vec2d centre = Vec2d::Zero();
  /// Person facing; candidates stay within the facing cone. Absent for groups.
  std::optional<double> facing;
};

struct ApproachOptions {
  double r_int = 1.2;
  double step = deg2rad(5.0);
  double facing_cone = deg2rad(60.0);
  double tie_tolerance = 0.02;
};

/// Resolves a person (via its body) or a group in the snapshot. Throws std::invalid_argument if
/// the target is absent or has no position.
ApproachTarget approach_target(const SceneSnapshot& s, const EntityId& target);

/// Least-cost free pose on the interaction circle, facing the target.
Pose2 approach_pose(const ApproachTarget& target, const CostField& field, const Vec2d& robot,
                    const ApproachOptions& options = {});

// Controller ------------------------------------------------------------------------------------

struct Control {
  double v = 0.0;
  double omega = 0.0;
  friend bool operator==(const Control&, const Control&) = default;
};

struct ControlSequence {
  std::vector<Control> controls;
  double dt = 0.1;
  friend bool operator==(const ControlSequence&, const ControlSequence&) = default;
};

/// Exact unicycle step.
Pose2 forward_model(const Pose2& state, const Control& u, double dt);

struct PlannerConfig {
  double v_min = -0.2;
  double v_max = 0.6;
  double omega_max = 1.0;
  double dt = 0.1;
  int steps = 20;
  double w_goal = 1.0;
  double w_social = 4.0;
  double w_control = 0.1;
  double w_terminal = 10.0;
  int refine_passes = 4;

  bool within_bounds(const Control& u) const {
    return u.v >= v_min - 1e-12 && u.v <= v_max + 1e-12 && std::abs(u.omega) <= omega_max + 1e-12;
  }
};

/// J summed over the integrated states pos_1..pos_T; +inf if any of them is occupied.
double rollout_cost(const Pose2& state, const ControlSequence& controls, const CostField& field, const Vec2d& goal,
                    const PlannerConfig& config = {});

struct PlanResult {
  ControlSequence sequence;
  double cost = 0.0;
  double braking_cost = 0.0;
};

/// Deterministic shooting over a lattice of primitives, the shifted previous plan and braking,
/// refined by coordinate descent. Throws NoFeasiblePlan if every candidate is infeasible.
PlanResult plan(const Pose2& state, const Vec2d& goal, const CostField& field, const PlannerConfig& config = {},
                const ControlSequence* previous = nullptr);

/// States x_0 (= state) through x_T.
std::vector<Pose2> integrate(const Pose2& state, const ControlSequence& controls);

// Global guidance ------------------------------------------------------------------------------

/// 8-connected Dijkstra over free cells; a step costs its length times (1 + social_weight *
/// field cost at the cell entered). Starts at `start`, ends at `goal`. Throws Unreachable.
std::vector<Vec2d> grid_path(const CostField& field, const Vec2d& start, const Vec2d& goal, double social_weight = 10.0);

double path_length(const std::vector<Vec2d>& path);

/// Point at arc length `distance` along the path, or its end.
Vec2d point_along(const std::vector<Vec2d>& path, double distance);

}  // namespace sse
