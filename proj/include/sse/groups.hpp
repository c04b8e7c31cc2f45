#pragma once

// Conversational group (F-formation) detection: each person votes for an o-space centre at a
// fixed stride in front of them, and persons are partitioned to minimise the spread of votes
// around their group centre plus a per-group penalty.

#include "sse/geometry.hpp"
#include "sse/scene.hpp"

#include <span>
#include <vector>

namespace sse {

struct GcffParams {
  double stride = 0.7;           ///< person to o-space centre, m
  double mdl = 3500.0;           ///< group-existence penalty, in units of position_noise^2
  double position_noise = 0.01;  ///< m

  void validate() const;
};

struct PersonPose {
  PersonId id;
  Pose2 pose;
};

Vec2d o_space_candidate(const Pose2& pose, double stride);

/// Objective of a labelling (labels[i] is person i's group, any integers).
double gcff_objective(std::span<const PersonPose> persons, std::span<const int> labels, const GcffParams& params = {});

/// Labels of the optimised partition, canonical: groups numbered by first member.
std::vector<int> gcff_partition(std::span<const PersonPose> persons, const GcffParams& params = {});

/// Groups as records ("group_1", ... by first member), singletons included.
std::vector<GroupRecord> detect_groups(std::span<const PersonPose> persons, const GcffParams& params = {});

}  // namespace sse
