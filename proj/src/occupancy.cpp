#include "sse/occupancy.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace sse {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Vec2d origin)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("occupancy grid: size must be positive");
  if (!(resolution > 0.0)) throw std::invalid_argument("occupancy grid: resolution must be positive");
  cells_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::optional<CellIndex> OccupancyGrid::cell_of(const Vec2d& p) const {
  const double fx = std::floor((p.x() - origin_.x()) / resolution_);
  const double fy = std::floor((p.y() - origin_.y()) / resolution_);
  if (!(fx >= 0 && fy >= 0 && fx < width_ && fy < height_)) return std::nullopt;
  return CellIndex{static_cast<int>(fx), static_cast<int>(fy)};
}

Vec2d OccupancyGrid::cell_center(int i, int j) const {
  return origin_ + Vec2d(i + 0.5, j + 0.5) * resolution_;
}

bool OccupancyGrid::occupied_at(const Vec2d& p) const {
  const auto c = cell_of(p);
  return !c || occupied(c->i, c->j);
}

void OccupancyGrid::fill_box(const Vec2d& lo, const Vec2d& hi) {
  for (int j = 0; j < height_; ++j)
    for (int i = 0; i < width_; ++i) {
      const Vec2d c = cell_center(i, j);
      if (c.x() >= lo.x() && c.x() <= hi.x() && c.y() >= lo.y() && c.y() <= hi.y()) set_occupied(i, j);
    }
}

OccupancyGrid parse_map(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::optional<double> resolution;
  Vec2d origin = Vec2d::Zero();
  std::vector<std::string> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream words(line);
    std::string key;
    words >> key;
    if (key == "resolution") {
      double r = 0;
      if (!(words >> r) || !(r > 0)) throw MapError("map line " + std::to_string(line_no) + ": bad resolution");
      resolution = r;
    } else if (key == "origin") {
      double x = 0, y = 0;
      if (!(words >> x >> y)) throw MapError("map line " + std::to_string(line_no) + ": bad origin");
      origin = {x, y};
    } else {
      if (line.find_first_not_of("#.") != std::string::npos)
        throw MapError("map line " + std::to_string(line_no) + ": expected only '#' and '.'");
      if (!rows.empty() && line.size() != rows.front().size())
        throw MapError("map line " + std::to_string(line_no) + ": ragged row");
      rows.push_back(line);
    }
  }
  if (!resolution) throw MapError("map: missing resolution header");
  if (rows.empty()) throw MapError("map: no rows");
  const int h = static_cast<int>(rows.size()), w = static_cast<int>(rows.front().size());
  OccupancyGrid grid(w, h, *resolution, origin);
  for (int r = 0; r < h; ++r)
    for (int i = 0; i < w; ++i)
      if (rows[r][i] == '#') grid.set_occupied(i, h - 1 - r);
  return grid;
}

OccupancyGrid load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MapError("map: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_map(ss.str());
}

std::string format_map(const OccupancyGrid& grid) {
  std::ostringstream out;
  out << "resolution " << grid.resolution() << "\n";
  out << "origin " << grid.origin().x() << " " << grid.origin().y() << "\n";
  for (int j = grid.height() - 1; j >= 0; --j) {
    for (int i = 0; i < grid.width(); ++i) out << (grid.occupied(i, j) ? '#' : '.');
    out << "\n";
  }
  return out.str();
}

namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas (Felzenszwalb and Huttenlocher), squared distances in cells.
void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  auto meet = [&](int q, int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p)); };
  int k = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = meet(q, v[k]);
    while (s <= z[k]) s = meet(q, v[--k]);
    v[++k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = double(q - v[k]) * (q - v[k]) + f[v[k]];
  }
}

}  // namespace

std::vector<double> distance_transform(const OccupancyGrid& grid) {
  const int w = grid.width(), h = grid.height();
  std::vector<double> sq(static_cast<std::size_t>(w) * h);
  bool any = false;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const bool occ = grid.occupied(i, j);
      any = any || occ;
      sq[static_cast<std::size_t>(j) * w + i] = occ ? 0.0 : kFar;
    }
  if (!any) return std::vector<double>(sq.size(), std::numeric_limits<double>::infinity());

  std::vector<double> f, d;
  f.resize(h);
  d.resize(h);
  for (int i = 0; i < w; ++i) {
    for (int j = 0; j < h; ++j) f[j] = sq[static_cast<std::size_t>(j) * w + i];
    edt_1d(f, d);
    for (int j = 0; j < h; ++j) sq[static_cast<std::size_t>(j) * w + i] = d[j];
  }
  f.resize(w);
  d.resize(w);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) f[i] = sq[static_cast<std::size_t>(j) * w + i];
    edt_1d(f, d);
    for (int i = 0; i < w; ++i) sq[static_cast<std::size_t>(j) * w + i] = std::sqrt(d[i]) * grid.resolution();
  }
  return sq;
}

}  // namespace sse
