#include "doctest.h"

#include "groups_oracle.hpp"
#include "sse/groups.hpp"

#include <Eigen/Geometry>

#include <numbers>
#include <set>
#include <random>

using namespace sse;
using sse::testing::exhaustive_groups;
using sse::testing::partition_cost;

namespace {

std::vector<PersonPose> poses(std::initializer_list<Pose2> list) {
  std::vector<PersonPose> out;
  int i = 0;
  for (const auto& p : list) out.push_back({person_id("p" + std::to_string(++i)), p});
  return out;
}

}  // namespace

TEST_CASE("o_space_candidate") {
  CHECK(o_space_candidate({0, 0, 0}, 0.7).isApprox(Vec2d(0.7, 0)));
  const Vec2d c = o_space_candidate({1, 1, std::numbers::pi / 2}, 0.7);
  CHECK(c.x() == doctest::Approx(1.0));
  CHECK(c.y() == doctest::Approx(1.7));

  // Rotating the pose about the person rotates the candidate by the same angle.
  const Pose2 p{0.4, -0.2, 0.3};
  const double rot = 1.1;
  const Vec2d d0 = o_space_candidate(p, 0.7) - p.position();
  const Vec2d d1 = o_space_candidate({p.x, p.y, p.theta + rot}, 0.7) - p.position();
  CHECK((Eigen::Rotation2Dd(rot) * d0).isApprox(d1));
}

TEST_CASE("detect_groups: worked examples") {
  const auto one = poses({{2, 3, 0.5}});
  const auto g1 = detect_groups(one);
  REQUIRE(g1.size() == 1);
  CHECK(g1[0].members.size() == 1);
  CHECK(g1[0].center.isApprox(o_space_candidate(one[0].pose, 0.7)));

  const auto facing = poses({{0, 0, 0}, {1.4, 0, std::numbers::pi}});
  const auto g2 = detect_groups(facing);
  REQUIRE(g2.size() == 1);
  CHECK(g2[0].id == group_id("group_1"));
  CHECK(g2[0].members.size() == 2);
  CHECK(g2[0].center.x() == doctest::Approx(0.7));
  CHECK(std::abs(g2[0].center.y()) < 1e-12);
  // Against both partitions of two persons.
  const GcffParams p;
  CHECK(partition_cost(facing, {0, 0}, p) < partition_cost(facing, {0, 1}, p));

  const auto back = poses({{0, 0, std::numbers::pi}, {0.2, 0, 0}});
  const auto g3 = detect_groups(back);
  CHECK(g3.size() == 2);
  CHECK(partition_cost(back, {0, 1}, p) < partition_cost(back, {0, 0}, p));

  CHECK(detect_groups(std::vector<PersonPose>{}).empty());
}

TEST_CASE("detect_groups: parameter validation") {
  const auto one = poses({{0, 0, 0}});
  CHECK_THROWS_AS(detect_groups(one, GcffParams{0.0, 3500, 0.01}), std::invalid_argument);
  CHECK_THROWS_AS(detect_groups(one, GcffParams{0.7, -1, 0.01}), std::invalid_argument);
  CHECK_THROWS_AS(detect_groups(poses({{0, 0, std::nan("")}})), std::invalid_argument);
}

TEST_CASE("property: equals the exhaustive optimum for up to 6 persons") {
  std::mt19937 rng(21);
  const GcffParams params;
  for (int trial = 0; trial < 150; ++trial) {
    const auto scene = sse::testing::random_group_scene(rng);
    const auto labels = gcff_partition(scene, params);
    const auto [best, partitions] = exhaustive_groups(scene, params);
    CHECK(partitions >= 1);
    CHECK(partition_cost(scene, labels, params) == doctest::Approx(best).epsilon(1e-9));
    CHECK(gcff_objective(scene, labels, params) == doctest::Approx(partition_cost(scene, labels, params)));
  }
}

TEST_CASE("property: no worse than all-singletons or one group, and a partition") {
  std::mt19937 rng(22);
  const GcffParams params;
  for (int trial = 0; trial < 60; ++trial) {
    const auto scene = sse::testing::random_group_scene(rng, 12);
    const int n = static_cast<int>(scene.size());
    const auto labels = gcff_partition(scene, params);
    std::vector<int> singletons(n), together(n, 0);
    for (int i = 0; i < n; ++i) singletons[i] = i;
    const double c = partition_cost(scene, labels, params);
    CHECK(c <= partition_cost(scene, singletons, params) + 1e-9);
    CHECK(c <= partition_cost(scene, together, params) + 1e-9);

    const auto groups = detect_groups(scene, params);
    std::set<PersonId> seen;
    std::size_t total = 0;
    for (const auto& g : groups) {
      total += g.members.size();
      seen.insert(g.members.begin(), g.members.end());
    }
    CHECK(total == scene.size());
    CHECK(seen.size() == scene.size());
  }
}

TEST_CASE("property: rigid motion moves centres and keeps membership") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-5.0, 5.0), a(-3.0, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto scene = sse::testing::random_group_scene(rng, 8);
    const Pose2 motion{u(rng), u(rng), a(rng)};
    std::vector<PersonPose> moved = scene;
    for (auto& p : moved) {
      const Vec2d q = to_map(motion, p.pose.position());
      p.pose = {q.x(), q.y(), p.pose.theta + motion.theta};
    }
    const auto g0 = detect_groups(scene), g1 = detect_groups(moved);
    REQUIRE(g0.size() == g1.size());
    for (std::size_t k = 0; k < g0.size(); ++k) {
      CHECK(g0[k].members == g1[k].members);
      CHECK((to_map(motion, g0[k].center) - g1[k].center).norm() < 1e-9);
    }
  }
}
