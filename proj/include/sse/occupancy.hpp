#pragma once

// Occupancy grid of the map. Cell (i, j) covers [origin + (i, j) * resolution, +resolution);
// j grows with y, so the first text row of a map file is the highest j.

#include "sse/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sse {

struct MapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CellIndex {
  int i = 0;
  int j = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  /// All-free grid; throws std::invalid_argument on a non-positive resolution or size.
  OccupancyGrid(int width, int height, double resolution, Vec2d origin = Vec2d::Zero());

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Vec2d& origin() const { return origin_; }

  bool in_bounds(int i, int j) const { return i >= 0 && j >= 0 && i < width_ && j < height_; }
  bool occupied(int i, int j) const { return cells_[index(i, j)] != 0; }
  void set_occupied(int i, int j, bool value = true) { cells_[index(i, j)] = value ? 1 : 0; }

  std::optional<CellIndex> cell_of(const Vec2d& p) const;
  Vec2d cell_center(int i, int j) const;
  /// Outside the map counts as occupied.
  bool occupied_at(const Vec2d& p) const;
  /// Marks every cell whose centre lies in the axis-aligned box.
  void fill_box(const Vec2d& lo, const Vec2d& hi);

  double extent_x() const { return width_ * resolution_; }
  double extent_y() const { return height_ * resolution_; }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * width_ + i; }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  Vec2d origin_ = Vec2d::Zero();
  std::vector<std::uint8_t> cells_;
};

/// Text map: `resolution <m>` and optional `origin <x> <y>` header lines, then rows of
/// '#' (occupied) and '.' (free), top row first.
OccupancyGrid parse_map(const std::string& text);
OccupancyGrid load_map(const std::filesystem::path& path);
std::string format_map(const OccupancyGrid& grid);

/// Euclidean distance (m) from each cell centre to the nearest occupied cell centre, row-major
/// by j; +inf everywhere when nothing is occupied.
std::vector<double> distance_transform(const OccupancyGrid& grid);

}  // namespace sse
