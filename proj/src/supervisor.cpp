#include "sse/supervisor.hpp"

#include <cmath>

namespace sse {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::idle: return "idle";
    case Phase::approaching: return "approaching";
    case Phase::engaged: return "engaged";
    case Phase::disengaging: return "disengaging";
  }
  return "?";
}

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::navigate_to: return "navigate_to";
    case ActionKind::face: return "face";
    case ActionKind::speak: return "speak";
    case ActionKind::listen: return "listen";
    case ActionKind::wave: return "wave";
    case ActionKind::point: return "point";
    case ActionKind::stop: return "stop";
  }
  return "?";
}

std::optional<double> body_facing(const BodyObservation& b) {
  if (b.velocity.norm() > kWalkingSpeed) return std::atan2(b.velocity.y(), b.velocity.x());
  return b.orientation;
}

namespace {

const BodyObservation* visible_body(const SceneSnapshot& s, const PersonRecord& p) {
  if (!p.body || s.stale.contains(*p.body)) return nullptr;
  return s.find_body(*p.body);
}

const VoiceObservation* live_voice(const SceneSnapshot& s, const PersonRecord& p) {
  if (!p.voice || s.stale.contains(*p.voice)) return nullptr;
  const auto* v = s.find_voice(*p.voice);
  return v && v->active ? v : nullptr;
}

const GroupRecord* group_of(const SceneSnapshot& s, const PersonId& person) {
  for (const auto& g : s.groups)
    if (g.members.size() >= 2 && g.members.contains(person)) return &g;
  return nullptr;
}

RobotAction act(ActionKind k) { return RobotAction{k, std::nullopt, std::nullopt, {}, 0.0}; }

}  // namespace

void Supervisor::enter(Phase p, double now) {
  state_.phase = p;
  state_.entered_at = now;
  if (p == Phase::idle) {
    state_.target.reset();
    state_.members.clear();
    state_.focus.reset();
    state_.absent_since.reset();
    state_.facing_since.clear();
    goal_.reset();
    goal_target_.reset();
  }
}

bool Supervisor::target_moved(const ApproachTarget& before, const ApproachTarget& now) const {
  if ((before.centre - now.centre).norm() > config_.replan_distance) return true;
  if (before.facing.has_value() != now.facing.has_value()) return true;
  return before.facing && std::abs(wrap_angle(*before.facing - *now.facing)) > config_.replan_angle;
}

void Supervisor::update_facing(const SceneSnapshot& s, double now) {
  std::map<PersonId, double> next;
  const Vec2d robot = s.robot.pose.position();
  for (const auto& p : s.persons) {
    const auto* b = visible_body(s, p);
    if (!b || !b->ground_pos) continue;
    const auto facing = body_facing(*b);
    if (!facing) continue;
    const Vec2d to_robot = robot - *b->ground_pos;
    if (to_robot.norm() > config_.engage_range) continue;
    if (std::abs(wrap_angle(std::atan2(to_robot.y(), to_robot.x()) - *facing)) >= config_.facing_cone) continue;
    const auto it = state_.facing_since.find(p.id);
    next[p.id] = it == state_.facing_since.end() ? now : it->second;
  }
  state_.facing_since = std::move(next);
}

bool Supervisor::resolve_target(const SceneSnapshot& s) {
  if (!state_.target) return false;
  if (state_.target->kind == EntityKind::person) return s.find_person(*state_.target) != nullptr;
  // Group ids are reassigned every detection; follow the group sharing the most members.
  const GroupRecord* best = nullptr;
  std::size_t best_overlap = 0;
  for (const auto& g : s.groups) {
    if (g.members.size() < 2) continue;
    std::size_t overlap = 0;
    for (const auto& m : g.members) overlap += state_.members.contains(m);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = &g;
    }
  }
  if (best) {
    state_.target = best->id;
    state_.members = best->members;
    return true;
  }
  // A group missed by one detection is kept while two of its members remain.
  std::vector<PersonId> present;
  for (const auto& m : state_.members)
    if (s.find_person(m)) present.push_back(m);
  if (present.size() >= 2) return true;
  if (present.size() == 1) {
    state_.target = present.front();
    state_.members = {present.front()};
    return true;
  }
  return false;
}

bool Supervisor::any_member_present(const SceneSnapshot& s) const {
  for (const auto& m : state_.members) {
    const auto* p = s.find_person(m);
    if (p && (visible_body(s, *p) || live_voice(s, *p))) return true;
  }
  return false;
}

std::optional<PersonId> Supervisor::active_speaker(const SceneSnapshot& s) const {
  std::vector<PersonId> speakers;
  for (const auto& m : state_.members) {
    const auto* p = s.find_person(m);
    if (p && live_voice(s, *p)) speakers.push_back(m);
  }
  if (speakers.empty()) return std::nullopt;
  // With two overlapping talkers keep the current focus.
  for (const auto& sp : speakers)
    if (state_.focus && sp == *state_.focus) return sp;
  return speakers.front();
}

std::vector<RobotAction> Supervisor::step(const SceneSnapshot& s, const CostField& field, double now) {
  std::vector<RobotAction> actions;
  update_facing(s, now);

  if (state_.phase != Phase::idle && state_.phase != Phase::disengaging && !resolve_target(s)) {
    enter(Phase::disengaging, now);
  }

  switch (state_.phase) {
    case Phase::idle: {
      std::optional<PersonId> who;
      for (const auto& [id, since] : state_.facing_since)
        if (now - since >= config_.engage_time - 1e-9) {
          who = id;
          break;
        }
      if (!who || !config_.initiate) break;
      enter(Phase::approaching, now);
      if (const auto* g = group_of(s, *who)) {
        state_.target = g->id;
        state_.members = g->members;
      } else {
        state_.target = *who;
        state_.members = {*who};
      }
      [[fallthrough]];
    }
    case Phase::approaching: {
      // While the target is out of view the latched pose stays valid until the absence timer runs out.
      std::optional<ApproachTarget> target;
      try {
        target = approach_target(s, *state_.target);
        state_.absent_since.reset();
      } catch (const std::invalid_argument&) {
        if (!state_.absent_since) state_.absent_since = now;
      }
      const bool timed_out = state_.absent_since && now - *state_.absent_since >= config_.leave_time - 1e-9;
      if (timed_out || (!target && !goal_)) {
        enter(Phase::idle, now);
        actions.push_back(act(ActionKind::stop));
        break;
      }
      try {
        if (target && (!goal_ || !goal_target_ || field.occupied(goal_->position()) || target_moved(*goal_target_, *target))) {
          goal_ = approach_pose(*target, field, s.robot.pose.position(), config_.approach);
          goal_target_ = target;
        }
      } catch (const Unreachable&) {
        enter(Phase::idle, now);
        actions.push_back(act(ActionKind::stop));
        break;
      }
      const Pose2 goal = *goal_;
      if (target && (s.robot.pose.position() - goal.position()).norm() <= config_.arrival_tolerance) {
        enter(Phase::engaged, now);
        state_.absent_since.reset();
        state_.speaking_until = now + config_.utterance_seconds;
        actions.push_back(act(ActionKind::stop));
        RobotAction face = act(ActionKind::face);
        face.target = state_.target;
        actions.push_back(face);
        RobotAction hello = act(ActionKind::speak);
        hello.utterance = "greeting";
        actions.push_back(hello);
        actions.push_back(act(ActionKind::wave));
      } else {
        RobotAction nav = act(ActionKind::navigate_to);
        nav.pose = goal;
        actions.push_back(nav);
      }
      break;
    }
    case Phase::engaged: {
      if (any_member_present(s)) {
        state_.absent_since.reset();
      } else if (!state_.absent_since) {
        state_.absent_since = now;
      }
      if (state_.absent_since && now - *state_.absent_since >= config_.leave_time - 1e-9) {
        enter(Phase::disengaging, now);
        break;
      }
      if (auto speaker = active_speaker(s)) state_.focus = speaker;
      else if (state_.focus && !state_.members.contains(*state_.focus)) state_.focus.reset();
      RobotAction face = act(ActionKind::face);
      face.target = state_.focus ? *state_.focus : *state_.target;
      actions.push_back(face);
      if (now >= state_.speaking_until) actions.push_back(act(ActionKind::listen));
      break;
    }
    case Phase::disengaging:
      break;
  }

  if (state_.phase == Phase::disengaging) {
    if (state_.entered_at == now) {
      RobotAction bye = act(ActionKind::speak);
      bye.utterance = "farewell";
      actions.push_back(bye);
      actions.push_back(act(ActionKind::wave));
      state_.speaking_until = now + config_.utterance_seconds;
    } else {
      enter(Phase::idle, now);
    }
  }
  return actions;
}

}  // namespace sse
