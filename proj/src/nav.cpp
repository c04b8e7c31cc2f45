#include "sse/nav.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace sse {

void SocialSpaceParams::validate() const {
  if (!(sigma_front > 0) || !(sigma_side > 0) || !(sigma_rear > 0) || !(group_sigma > 0))
    throw std::invalid_argument("social space: every sigma must be positive");
  if (!(peak > 0) || !(obstacle_peak > 0)) throw std::invalid_argument("social space: peaks must be positive");
  if (!(seated_scale >= 1.0)) throw std::invalid_argument("social space: seated scale must be >= 1");
  if (!(velocity_gain >= 0.0) || !(inflation_radius >= 0.0))
    throw std::invalid_argument("social space: velocity gain and inflation radius must be non-negative");
}

SocialScene social_scene_from_snapshot(const SceneSnapshot& s) {
  SocialScene scene;
  for (const auto& b : s.bodies) {
    if (!b.ground_pos) continue;
    scene.agents.push_back({*b.ground_pos, b.orientation, b.velocity, b.seated});
  }
  for (const auto& g : s.groups)
    if (g.members.size() >= 2) scene.groups.push_back({g.center});
  return scene;
}

double person_cost(const Vec2d& point, const SocialAgent& person, const SocialSpaceParams& params) {
  const double scale = person.seated ? params.seated_scale : 1.0;
  const double speed = person.velocity.norm();
  const Vec2d d = point - person.position;
  std::optional<double> facing = person.orientation;
  if (speed > kWalkingSpeed) facing = std::atan2(person.velocity.y(), person.velocity.x());
  const double side = params.sigma_side * scale;
  if (!facing) return params.peak * std::exp(-d.squaredNorm() / (2 * side * side));
  const double c = std::cos(*facing), s = std::sin(*facing);
  const double along = c * d.x() + s * d.y();
  const double across = -s * d.x() + c * d.y();
  const double sx = (along >= 0 ? params.sigma_front * (1.0 + params.velocity_gain * speed) : params.sigma_rear) * scale;
  return params.peak * std::exp(-(along * along / (2 * sx * sx) + across * across / (2 * side * side)));
}

double group_cost(const Vec2d& point, const SocialGroup& group, const SocialSpaceParams& params) {
  const double s = params.group_sigma;
  return params.peak * std::exp(-(point - group.centre).squaredNorm() / (2 * s * s));
}

CostField::CostField(OccupancyGrid grid, SocialScene scene, SocialSpaceParams params)
    : grid_(std::move(grid)), scene_(std::move(scene)), params_(params) {
  params_.validate();
  const auto dist = distance_transform(grid_);
  obstacle_.resize(dist.size());
  const double r = params_.inflation_radius;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    if (dist[k] <= 0.0) {
      obstacle_[k] = params_.obstacle_peak;
    } else if (dist[k] < r) {
      const double f = 1.0 - dist[k] / r;
      obstacle_[k] = params_.obstacle_peak * f * f;
    } else {
      obstacle_[k] = 0.0;
    }
  }
}

double CostField::obstacle_at(const Vec2d& p) const {
  if (!grid_.cell_of(p)) return params_.obstacle_peak;
  const double res = grid_.resolution();
  const double gx = (p.x() - grid_.origin().x()) / res - 0.5;
  const double gy = (p.y() - grid_.origin().y()) / res - 0.5;
  const int w = grid_.width(), h = grid_.height();
  const int i0 = std::clamp(static_cast<int>(std::floor(gx)), 0, w - 1);
  const int j0 = std::clamp(static_cast<int>(std::floor(gy)), 0, h - 1);
  const int i1 = std::min(i0 + 1, w - 1), j1 = std::min(j0 + 1, h - 1);
  const double tx = std::clamp(gx - i0, 0.0, 1.0), ty = std::clamp(gy - j0, 0.0, 1.0);
  auto v = [&](int i, int j) { return obstacle_[static_cast<std::size_t>(j) * w + i]; };
  return (1 - ty) * ((1 - tx) * v(i0, j0) + tx * v(i1, j0)) + ty * ((1 - tx) * v(i0, j1) + tx * v(i1, j1));
}

double CostField::social_at(const Vec2d& p) const {
  double c = 0.0;
  for (const auto& a : scene_.agents) c += person_cost(p, a, params_);
  for (const auto& g : scene_.groups) c += group_cost(p, g, params_);
  return c;
}

std::vector<double> CostField::layer(FieldLayer which) const {
  if (which == FieldLayer::obstacle) return obstacle_;
  std::vector<double> out(obstacle_.size());
  for (int j = 0; j < grid_.height(); ++j)
    for (int i = 0; i < grid_.width(); ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * grid_.width() + i;
      out[k] = social_at(grid_.cell_center(i, j)) + (which == FieldLayer::total ? obstacle_[k] : 0.0);
    }
  return out;
}

CostField build_cost_field(const SceneSnapshot& s, OccupancyGrid grid, const SocialSpaceParams& params) {
  return CostField(std::move(grid), social_scene_from_snapshot(s), params);
}

ApproachTarget approach_target(const SceneSnapshot& s, const EntityId& target) {
  if (target.kind == EntityKind::group) {
    for (const auto& g : s.groups)
      if (g.id == target) return {g.center, std::nullopt};
    throw std::invalid_argument("approach target: no group " + target.token);
  }
  if (target.kind != EntityKind::person) throw std::invalid_argument("approach target: must be a person or group");
  const PersonRecord* p = s.find_person(target);
  if (!p) throw std::invalid_argument("approach target: no person " + target.token);
  const BodyObservation* b = p->body ? s.find_body(*p->body) : nullptr;
  if (!b || !b->ground_pos) throw std::invalid_argument("approach target: person " + target.token + " has no position");
  std::optional<double> facing = b->orientation;
  if (b->velocity.norm() > kWalkingSpeed) facing = std::atan2(b->velocity.y(), b->velocity.x());
  return {*b->ground_pos, facing};
}

Pose2 approach_pose(const ApproachTarget& target, const CostField& field, const Vec2d& robot,
                    const ApproachOptions& options) {
  if (!(options.r_int > 0.0) || !(options.step > 0.0)) throw std::invalid_argument("approach: r_int and step must be positive");
  struct Candidate {
    Vec2d pos;
    double cost;
  };
  std::vector<Candidate> free;
  const double base = target.facing.value_or(0.0);
  const int half = target.facing ? static_cast<int>(std::floor(options.facing_cone / options.step + 1e-9))
                                 : static_cast<int>(std::ceil(std::numbers::pi / options.step - 1e-9));
  const int last = target.facing ? half : half - 1;
  for (int k = -half; k <= last; ++k) {
    const double a = base + k * options.step;
    const Vec2d p = target.centre + options.r_int * Vec2d(std::cos(a), std::sin(a));
    if (field.occupied(p)) continue;
    free.push_back({p, field.at(p)});
  }
  if (free.empty()) throw Unreachable("approach: every candidate pose is occupied");
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& c : free) best_cost = std::min(best_cost, c.cost);
  const Candidate* best = nullptr;
  for (const auto& c : free)
    if (c.cost <= best_cost + options.tie_tolerance &&
        (!best || (c.pos - robot).norm() < (best->pos - robot).norm() - 1e-12))
      best = &c;
  const Vec2d to_target = target.centre - best->pos;
  return {best->pos.x(), best->pos.y(), std::atan2(to_target.y(), to_target.x())};
}

Pose2 forward_model(const Pose2& s, const Control& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("forward_model: dt must be positive");
  if (std::abs(u.omega) < 1e-6) return {s.x + u.v * dt * std::cos(s.theta), s.y + u.v * dt * std::sin(s.theta), s.theta};
  const double theta = s.theta + u.omega * dt;
  const double r = u.v / u.omega;
  return {s.x + r * (std::sin(theta) - std::sin(s.theta)), s.y - r * (std::cos(theta) - std::cos(s.theta)),
          wrap_angle(theta)};
}

std::vector<Pose2> integrate(const Pose2& state, const ControlSequence& controls) {
  std::vector<Pose2> out{state};
  for (const auto& u : controls.controls) out.push_back(forward_model(out.back(), u, controls.dt));
  return out;
}

double rollout_cost(const Pose2& state, const ControlSequence& controls, const CostField& field, const Vec2d& goal,
                    const PlannerConfig& config) {
  double j = 0.0;
  Pose2 x = state;
  for (const auto& u : controls.controls) {
    x = forward_model(x, u, controls.dt);
    const Vec2d p = x.position();
    if (field.occupied(p)) return std::numeric_limits<double>::infinity();
    j += config.w_goal * (p - goal).squaredNorm() + config.w_social * field.at(p) +
         config.w_control * (u.v * u.v + u.omega * u.omega);
  }
  return j + config.w_terminal * (x.position() - goal).squaredNorm();
}

namespace {

ControlSequence constant(const PlannerConfig& c, Control u) { return {std::vector<Control>(c.steps, u), c.dt}; }

std::vector<ControlSequence> lattice(const PlannerConfig& c) {
  std::vector<ControlSequence> out;
  const double vs[] = {c.v_min, 0.0, 0.25 * c.v_max, 0.5 * c.v_max, 0.75 * c.v_max, c.v_max};
  const double ws[] = {-1.0, -0.6, -0.3, -0.1, 0.0, 0.1, 0.3, 0.6, 1.0};
  for (double v : vs)
    for (double w : ws) out.push_back(constant(c, {v, w * c.omega_max}));
  // Swerves: turn for the first half, counter-turn for the second.
  for (double v : {0.5 * c.v_max, c.v_max})
    for (double w : ws) {
      if (w == 0.0) continue;
      auto seq = constant(c, {v, w * c.omega_max});
      for (int t = c.steps / 2; t < c.steps; ++t) seq.controls[t].omega = -w * c.omega_max;
      out.push_back(std::move(seq));
    }
  return out;
}

}  // namespace

PlanResult plan(const Pose2& state, const Vec2d& goal, const CostField& field, const PlannerConfig& config,
                const ControlSequence* previous) {
  if (config.steps <= 0 || !(config.dt > 0.0)) throw std::invalid_argument("plan: steps and dt must be positive");
  auto cost = [&](const ControlSequence& s) { return rollout_cost(state, s, field, goal, config); };

  PlanResult result;
  const ControlSequence braking = constant(config, {0.0, 0.0});
  result.braking_cost = cost(braking);
  result.sequence = braking;
  result.cost = result.braking_cost;

  auto candidates = lattice(config);
  if (previous && !previous->controls.empty()) {
    ControlSequence shifted = constant(config, {});
    for (int t = 0; t < config.steps; ++t) {
      const std::size_t k = std::min<std::size_t>(t + 1, previous->controls.size() - 1);
      Control u = previous->controls[k];
      u.v = std::clamp(u.v, config.v_min, config.v_max);
      u.omega = std::clamp(u.omega, -config.omega_max, config.omega_max);
      shifted.controls[t] = u;
    }
    candidates.push_back(std::move(shifted));
  }
  for (const auto& s : candidates) {
    const double c = cost(s);
    if (c < result.cost) {
      result.cost = c;
      result.sequence = s;
    }
  }
  if (!std::isfinite(result.cost)) throw NoFeasiblePlan("plan: every candidate trajectory hits an obstacle");

  double dv = 0.5 * (config.v_max - config.v_min), dw = config.omega_max;
  for (int pass = 0; pass < config.refine_passes; ++pass, dv *= 0.5, dw *= 0.5) {
    for (int t = 0; t < config.steps; ++t) {
      for (int axis = 0; axis < 2; ++axis) {
        for (double sign : {1.0, -1.0}) {
          ControlSequence trial = result.sequence;
          Control& u = trial.controls[t];
          if (axis == 0) u.v = std::clamp(u.v + sign * dv, config.v_min, config.v_max);
          else u.omega = std::clamp(u.omega + sign * dw, -config.omega_max, config.omega_max);
          if (u == result.sequence.controls[t]) continue;
          const double c = cost(trial);
          if (c < result.cost) {
            result.cost = c;
            result.sequence = std::move(trial);
          }
        }
      }
    }
  }
  return result;
}

// Global guidance ------------------------------------------------------------------------------

std::vector<Vec2d> grid_path(const CostField& field, const Vec2d& start, const Vec2d& goal, double social_weight) {
  const OccupancyGrid& g = field.grid();
  const auto s = g.cell_of(start), t = g.cell_of(goal);
  if (!s || g.occupied(s->i, s->j)) throw Unreachable("grid_path: start is occupied or outside the map");
  if (!t || g.occupied(t->i, t->j)) throw Unreachable("grid_path: goal is occupied or outside the map");
  const int w = g.width(), h = g.height();
  const auto index = [w](int i, int j) { return static_cast<std::size_t>(j) * w + i; };
  const std::vector<double> cost = field.layer(FieldLayer::total);
  std::vector<double> dist(cost.size(), std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(cost.size(), std::numeric_limits<std::size_t>::max());
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t source = index(s->i, s->j), target = index(t->i, t->j);
  dist[source] = 0.0;
  open.push({0.0, source});
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (d > dist[u]) continue;
    if (u == target) break;
    const int ui = static_cast<int>(u % w), uj = static_cast<int>(u / w);
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int vi = ui + di, vj = uj + dj;
        if (!g.in_bounds(vi, vj) || g.occupied(vi, vj)) continue;
        // No corner cutting past occupied cells.
        if (di != 0 && dj != 0 && (g.occupied(ui + di, uj) || g.occupied(ui, uj + dj))) continue;
        const std::size_t v = index(vi, vj);
        const double step = g.resolution() * std::hypot(di, dj) * (1.0 + social_weight * cost[v]);
        if (d + step < dist[v]) {
          dist[v] = d + step;
          parent[v] = u;
          open.push({dist[v], v});
        }
      }
  }
  if (!std::isfinite(dist[target])) throw Unreachable("grid_path: goal not connected to start");
  std::vector<Vec2d> path;
  for (std::size_t v = target; v != source; v = parent[v]) path.push_back(g.cell_center(static_cast<int>(v % w), static_cast<int>(v / w)));
  path.push_back(start);
  std::reverse(path.begin(), path.end());
  if (path.size() >= 2) path.back() = goal;
  else path.push_back(goal);
  return path;
}

double path_length(const std::vector<Vec2d>& path) {
  double len = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) len += (path[k] - path[k - 1]).norm();
  return len;
}

Vec2d point_along(const std::vector<Vec2d>& path, double distance) {
  if (path.empty()) throw std::invalid_argument("point_along: empty path");
  double left = distance;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double seg = (path[k] - path[k - 1]).norm();
    if (seg >= left && seg > 0.0) return path[k - 1] + (left / seg) * (path[k] - path[k - 1]);
    left -= seg;
  }
  return path.back();
}

}  // namespace sse
