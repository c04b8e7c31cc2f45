#include "doctest.h"

#include "sse/supervisor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace sse;

namespace {

constexpr double kPi = std::numbers::pi;

struct Person {
  std::string name;
  Vec2d pos;
  double facing;
  bool visible = true;
  bool talking = false;
};

SceneSnapshot scene(const std::vector<Person>& people, const Pose2& robot, double now,
                    const std::vector<std::vector<std::string>>& groups = {}) {
  SceneSnapshot s;
  s.time = now;
  s.robot.pose = robot;
  for (const auto& p : people) {
    PersonRecord rec;
    rec.id = person_id(p.name);
    rec.body = body_id("b_" + p.name);
    rec.voice = voice_id("v_" + p.name);
    if (p.visible) {
      BodyObservation b;
      b.id = *rec.body;
      b.ground_pos = p.pos;
      b.orientation = p.facing;
      s.bodies.push_back(b);
    } else {
      s.stale.insert(*rec.body);
    }
    VoiceObservation v;
    v.id = *rec.voice;
    v.active = p.talking;
    v.doa = bearing_from(robot, p.pos);
    s.voices.push_back(v);
    s.persons.push_back(rec);
  }
  int k = 0;
  for (const auto& g : groups) {
    GroupRecord rec;
    rec.id = group_id("group_" + std::to_string(++k));
    Vec2d c = Vec2d::Zero();
    for (const auto& name : g) {
      rec.members.insert(person_id(name));
      const auto it = std::find_if(people.begin(), people.end(), [&](const Person& p) { return p.name == name; });
      c += it->pos + 0.7 * Vec2d(std::cos(it->facing), std::sin(it->facing));
    }
    rec.center = c / static_cast<double>(g.size());
    s.groups.push_back(rec);
  }
  return s;
}

OccupancyGrid room() { return OccupancyGrid(120, 120, 0.05, Vec2d(-3, -3)); }

bool has(const std::vector<RobotAction>& a, ActionKind k) {
  return std::any_of(a.begin(), a.end(), [&](const RobotAction& x) { return x.kind == k; });
}

const RobotAction* find(const std::vector<RobotAction>& a, ActionKind k) {
  const auto it = std::find_if(a.begin(), a.end(), [&](const RobotAction& x) { return x.kind == k; });
  return it == a.end() ? nullptr : &*it;
}

/// Runs until engaged, moving the robot straight onto each navigation goal.
Supervisor engaged_with(const std::vector<Person>& people, Pose2& robot,
                        const std::vector<std::vector<std::string>>& groups, double& now) {
  Supervisor sup;
  for (now = 0.0; now < 5.0; now += 0.1) {
    const auto s = scene(people, robot, now, groups);
    const auto a = sup.step(s, build_cost_field(s, room()), now);
    if (sup.state().phase == Phase::engaged) break;
    if (const auto* nav = find(a, ActionKind::navigate_to)) robot = *nav->pose;
  }
  return sup;
}

}  // namespace

TEST_CASE("empty scene stays idle") {
  Supervisor sup;
  for (int k = 0; k < 30; ++k) {
    const auto s = scene({}, Pose2{}, k * 0.1);
    CHECK(sup.step(s, build_cost_field(s, room()), k * 0.1).empty());
    CHECK(sup.state().phase == Phase::idle);
    CHECK_FALSE(sup.state().target);
  }
}

TEST_CASE("dwelling person triggers an approach at the engage time") {
  Supervisor sup;
  const Pose2 robot{0, 0, 0};
  const std::vector<Person> people{{"p1", {2, 0}, kPi}};
  double transition = -1;
  for (int k = 0; k <= 25; ++k) {
    const double now = k * 0.1;
    const auto s = scene(people, robot, now);
    const auto field = build_cost_field(s, room());
    const auto actions = sup.step(s, field, now);
    if (sup.state().phase == Phase::approaching && transition < 0) {
      transition = now;
      const auto* nav = find(actions, ActionKind::navigate_to);
      REQUIRE(nav);
      const Pose2 expected = approach_pose(approach_target(s, person_id("p1")), field, robot.position());
      CHECK(*nav->pose == expected);
      CHECK(nav->pose->x == doctest::Approx(0.8));
      CHECK(sup.state().target == person_id("p1"));
    }
    if (sup.state().phase == Phase::idle) CHECK(actions.empty());
  }
  CHECK(transition == doctest::Approx(2.0));
}

TEST_CASE("turning away resets the facing timer; far or sideways persons never trigger") {
  Supervisor sup;
  const Pose2 robot{0, 0, 0};
  for (int k = 0; k <= 40; ++k) {
    const double now = k * 0.1;
    const double facing = (k % 15 == 14) ? 0.0 : kPi;  // glances away every 1.5 s
    const auto s = scene({{"p1", {2, 0}, facing}, {"p2", {5, 0}, kPi}, {"p3", {0, 2}, 0.0}}, robot, now);
    sup.step(s, build_cost_field(s, room()), now);
    CHECK(sup.state().phase == Phase::idle);
  }
}

TEST_CASE("group engagement and speaker handoff") {
  // p1 and p2 face each other; the robot stands on the bisector at the approach distance.
  const std::vector<Person> base{{"p1", {-0.7, 0}, 0.0}, {"p2", {0.7, 0}, kPi}};
  Pose2 robot{0, -1.2, kPi / 2};
  // p1 turns to the robot to trigger; the group is still detected from the earlier layout.
  std::vector<Person> people = base;
  people[0].facing = std::atan2(-1.2, 0.7);
  double now = 0;
  Supervisor sup = engaged_with(people, robot, {{"p1", "p2"}}, now);
  REQUIRE(sup.state().phase == Phase::engaged);
  CHECK(sup.state().target == group_id("group_1"));
  CHECK(sup.state().members.size() == 2);

  auto tick = [&](bool t1, bool t2) {
    now += 0.1;
    auto ppl = base;
    ppl[0].talking = t1;
    ppl[1].talking = t2;
    const auto s = scene(ppl, robot, now, {{"p1", "p2"}});
    return sup.step(s, build_cost_field(s, room()), now);
  };
  auto a = tick(true, false);
  REQUIRE(find(a, ActionKind::face));
  CHECK(*find(a, ActionKind::face)->target == person_id("p1"));
  a = tick(false, true);
  CHECK(*find(a, ActionKind::face)->target == person_id("p2"));
  // Overlap keeps the current focus.
  a = tick(true, true);
  CHECK(*find(a, ActionKind::face)->target == person_id("p2"));
  a = tick(true, false);
  CHECK(*find(a, ActionKind::face)->target == person_id("p1"));
}

TEST_CASE("half duplex: greeting, listening and farewell never overlap") {
  const Pose2 robot{0, 0, 0};
  const std::vector<Person> people{{"p1", {1.2, 0}, kPi}};
  Supervisor sup;
  bool greeted = false, farewell = false, listened = false;
  for (int k = 0; k < 120; ++k) {
    const double now = k * 0.1;
    auto ppl = people;
    ppl[0].visible = now < 6.0;
    const auto s = scene(ppl, robot, now);
    const auto a = sup.step(s, build_cost_field(s, room()), now);
    CHECK_FALSE((has(a, ActionKind::speak) && has(a, ActionKind::listen)));
    if (has(a, ActionKind::speak)) {
      greeted = greeted || find(a, ActionKind::speak)->utterance == "greeting";
      farewell = farewell || find(a, ActionKind::speak)->utterance == "farewell";
    }
    listened = listened || has(a, ActionKind::listen);
    if (has(a, ActionKind::navigate_to)) CHECK(sup.state().phase == Phase::approaching);
    CHECK(sup.state().target.has_value() == (sup.state().phase != Phase::idle));
  }
  CHECK(greeted);
  CHECK(listened);
  CHECK(farewell);
  CHECK(sup.state().phase == Phase::idle);
}

TEST_CASE("absence for the leave time disengages") {
  Pose2 robot{0, 0, 0};
  std::vector<Person> people{{"p1", {1.2, 0}, kPi}};
  double now = 0;
  Supervisor sup = engaged_with(people, robot, {}, now);
  REQUIRE(sup.state().phase == Phase::engaged);
  people[0].visible = false;
  const double gone = now + 0.1;
  double left = -1;
  for (int k = 1; k <= 40 && left < 0; ++k) {
    now += 0.1;
    const auto s = scene(people, robot, now);
    const auto a = sup.step(s, build_cost_field(s, room()), now);
    if (sup.state().phase == Phase::disengaging) {
      left = now;
      CHECK(find(a, ActionKind::speak)->utterance == "farewell");
    }
  }
  CHECK(left - gone == doctest::Approx(3.0));
  now += 0.1;
  const auto s = scene(people, robot, now);
  sup.step(s, build_cost_field(s, room()), now);
  CHECK(sup.state().phase == Phase::idle);
}

TEST_CASE("orphaned target forces disengaging") {
  Pose2 robot{0, 0, 0};
  double now = 0;
  Supervisor sup = engaged_with({{"p1", {1.2, 0}, kPi}}, robot, {}, now);
  REQUIRE(sup.state().phase == Phase::engaged);
  now += 0.1;
  const auto s = scene({{"p9", {2, 2}, 0.0}}, robot, now);
  const auto a = sup.step(s, build_cost_field(s, room()), now);
  CHECK(sup.state().phase == Phase::disengaging);
  CHECK(has(a, ActionKind::speak));
}

TEST_CASE("progress: closed-loop approach reaches engagement") {
  const std::vector<Person> people{{"p1", {2.5, 1.0}, std::atan2(-1.0, -2.5)}};
  Pose2 robot{0, 0, 0};
  Supervisor sup;
  ControlSequence prev;
  double engaged_at = -1;
  for (int k = 0; k < 300 && engaged_at < 0; ++k) {
    const double now = k * 0.1;
    const auto s = scene(people, robot, now);
    const auto field = build_cost_field(s, room());
    const auto a = sup.step(s, field, now);
    if (sup.state().phase == Phase::engaged) engaged_at = now;
    if (const auto* nav = find(a, ActionKind::navigate_to)) {
      const auto r = plan(robot, nav->pose->position(), field, {}, prev.controls.empty() ? nullptr : &prev);
      prev = r.sequence;
      robot = forward_model(robot, r.sequence.controls.front(), 0.1);
    }
  }
  CHECK(engaged_at > 0);
  CHECK(engaged_at < 30.0);
}
