#pragma once

// SVG snapshot of one logged tick: map, cost contours, people, groups and the robot's paths.

#include "sse/nav.hpp"
#include "sse/scenario.hpp"
#include "sse/sim.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace sse {

using Segment = std::pair<Vec2d, Vec2d>;

/// Marching squares over `field` sampled at the map resolution.
std::vector<Segment> contour_segments(const CostField& field, FieldLayer layer, double level);

inline constexpr std::array<double, 3> kContourLevels{0.2, 0.5, 0.8};

/// Deterministic SVG of tick `index`, with the robot's path over ticks 0..index.
std::string render_svg(const std::vector<TickLog>& ticks, std::size_t index, const ScenarioScript& script);

}  // namespace sse
