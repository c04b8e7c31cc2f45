#pragma once

// Exhaustive reference for the group partition objective.

#include "sse/groups.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace sse::testing {

/// Independent objective: group centre = mean of stride-shifted positions.
inline double partition_cost(const std::vector<PersonPose>& persons, const std::vector<int>& labels,
                             const GcffParams& p) {
  const int groups = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  double total = p.mdl * groups;
  for (int g = 0; g < groups; ++g) {
    double cx = 0, cy = 0;
    int n = 0;
    for (std::size_t i = 0; i < persons.size(); ++i)
      if (labels[i] == g) {
        cx += persons[i].pose.x + p.stride * std::cos(persons[i].pose.theta);
        cy += persons[i].pose.y + p.stride * std::sin(persons[i].pose.theta);
        ++n;
      }
    cx /= n;
    cy /= n;
    for (std::size_t i = 0; i < persons.size(); ++i)
      if (labels[i] == g) {
        const double dx = persons[i].pose.x + p.stride * std::cos(persons[i].pose.theta) - cx;
        const double dy = persons[i].pose.y + p.stride * std::sin(persons[i].pose.theta) - cy;
        total += (dx * dx + dy * dy) / (p.position_noise * p.position_noise);
      }
  }
  return total;
}

/// Minimum over every set partition (restricted growth strings).
inline std::pair<double, int> exhaustive_groups(const std::vector<PersonPose>& persons, const GcffParams& p) {
  const int n = static_cast<int>(persons.size());
  if (n == 0) return {0.0, 1};
  std::vector<int> a(n, 0);
  double best = std::numeric_limits<double>::infinity();
  int partitions = 0;
  for (;;) {
    ++partitions;
    best = std::min(best, partition_cost(persons, a, p));
    int i = n - 1;
    for (; i > 0; --i) {
      const int mx = *std::max_element(a.begin(), a.begin() + i);
      if (a[i] <= mx) {
        ++a[i];
        std::fill(a.begin() + i + 1, a.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  return {best, partitions};
}

/// Scene with a few clusters of persons roughly facing a shared centre, plus loners.
inline std::vector<PersonPose> random_group_scene(std::mt19937& rng, int max_persons = 6) {
  std::uniform_int_distribution<int> count(1, max_persons);
  std::uniform_real_distribution<double> coord(-3.0, 3.0), angle(-3.14159, 3.14159), unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.12), turn(0.0, 0.3);
  const int n = count(rng);
  std::vector<PersonPose> out;
  Vec2d centre{coord(rng), coord(rng)};
  for (int i = 0; i < n; ++i) {
    if (unit(rng) < 0.35) centre = {coord(rng), coord(rng)};
    PersonPose p;
    p.id = person_id("p" + std::to_string(i));
    if (unit(rng) < 0.2) {
      p.pose = {coord(rng), coord(rng), angle(rng)};
    } else {
      const double a = angle(rng);
      const double r = 0.7 + jitter(rng);
      p.pose = {centre.x() + r * std::cos(a), centre.y() + r * std::sin(a), wrap_angle(a + 3.14159265 + turn(rng))};
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace sse::testing
