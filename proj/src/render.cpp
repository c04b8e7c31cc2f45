#include "sse/render.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace sse {

namespace {

/// Edge crossing between samples a (at pa) and b (at pb).
Vec2d crossing(const Vec2d& pa, double a, const Vec2d& pb, double b, double level) {
  const double t = (level - a) / (b - a);
  return pa + t * (pb - pa);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  return s == "-0.000" ? "0.000" : s;
}

std::string pt(const Vec2d& p) { return fmt(p.x()) + "," + fmt(p.y()); }

}  // namespace

std::vector<Segment> contour_segments(const CostField& field, FieldLayer layer, double level) {
  const auto& g = field.grid();
  const int w = g.width(), h = g.height();
  const std::vector<double> values = field.layer(layer);
  auto at = [&](int i, int j) { return values[static_cast<std::size_t>(j) * w + i]; };
  std::vector<Segment> out;
  for (int j = 0; j + 1 < h; ++j) {
    for (int i = 0; i + 1 < w; ++i) {
      // Corners counter-clockwise from the lower left.
      const Vec2d p[4] = {g.cell_center(i, j), g.cell_center(i + 1, j), g.cell_center(i + 1, j + 1),
                          g.cell_center(i, j + 1)};
      const double v[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      int mask = 0;
      for (int k = 0; k < 4; ++k) mask |= (v[k] >= level) << k;
      if (mask == 0 || mask == 15) continue;
      auto edge = [&](int e) { return crossing(p[e], v[e], p[(e + 1) % 4], v[(e + 1) % 4], level); };
      std::vector<int> crossed;
      for (int e = 0; e < 4; ++e)
        if (((mask >> e) & 1) != ((mask >> ((e + 1) % 4)) & 1)) crossed.push_back(e);
      if (crossed.size() == 2) {
        out.emplace_back(edge(crossed[0]), edge(crossed[1]));
      } else {
        // Saddle: the centre value decides which corners connect.
        const bool centre_high = (v[0] + v[1] + v[2] + v[3]) / 4.0 >= level;
        const bool corner0_high = mask & 1;
        if (centre_high == corner0_high) {
          out.emplace_back(edge(0), edge(1));
          out.emplace_back(edge(2), edge(3));
        } else {
          out.emplace_back(edge(3), edge(0));
          out.emplace_back(edge(1), edge(2));
        }
      }
    }
  }
  return out;
}

std::string render_svg(const std::vector<TickLog>& ticks, std::size_t index, const ScenarioScript& script) {
  if (index >= ticks.size()) throw std::out_of_range("render_svg: tick index out of range");
  const TickLog& t = ticks[index];
  const OccupancyGrid& g = script.map;
  const CostField field(g, social_scene_from_snapshot(t.snapshot), script.social);
  const double res = g.resolution();
  const double x0 = g.origin().x(), y0 = g.origin().y();
  const double wm = g.extent_x(), hm = g.extent_y();

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + fmt(x0) + " " + fmt(-(y0 + hm)) + " " + fmt(wm) +
       " " + fmt(hm) + "\" width=\"" + std::to_string(int(std::lround(wm * 100))) + "\" height=\"" +
       std::to_string(int(std::lround(hm * 100))) + "\">\n";
  s += "<title>tick " + std::to_string(t.tick) + " t=" + fmt(t.time) + "</title>\n";
  s += "<g transform=\"scale(1,-1)\">\n";
  s += "<rect class=\"floor\" x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(wm) + "\" height=\"" + fmt(hm) +
       "\" fill=\"#ffffff\"/>\n";

  // Obstacles as horizontal runs of occupied cells.
  s += "<g class=\"obstacles\" fill=\"#444444\">\n";
  for (int j = 0; j < g.height(); ++j) {
    for (int i = 0; i < g.width();) {
      if (!g.occupied(i, j)) {
        ++i;
        continue;
      }
      int k = i;
      while (k < g.width() && g.occupied(k, j)) ++k;
      s += "<rect x=\"" + fmt(x0 + i * res) + "\" y=\"" + fmt(y0 + j * res) + "\" width=\"" + fmt((k - i) * res) +
           "\" height=\"" + fmt(res) + "\"/>\n";
      i = k;
    }
  }
  s += "</g>\n";

  const char* colours[] = {"#9ecae1", "#4292c6", "#08519c"};
  for (std::size_t l = 0; l < kContourLevels.size(); ++l) {
    const auto segs = contour_segments(field, FieldLayer::social, kContourLevels[l]);
    if (segs.empty()) continue;
    std::string d;
    for (const auto& [a, b] : segs) d += "M" + pt(a) + "L" + pt(b);
    s += "<path class=\"contour\" data-level=\"" + fmt(kContourLevels[l]) + "\" stroke=\"" + colours[l] +
         "\" stroke-width=\"0.02\" fill=\"none\" d=\"" + d + "\"/>\n";
  }

  for (const auto& grp : t.snapshot.groups)
    s += "<circle class=\"group\" cx=\"" + fmt(grp.center.x()) + "\" cy=\"" + fmt(grp.center.y()) +
         "\" r=\"0.08\" fill=\"none\" stroke=\"#d95f02\" stroke-width=\"0.03\"/>\n";

  for (const auto& b : t.snapshot.bodies) {
    if (!b.ground_pos) continue;
    const Vec2d p = *b.ground_pos;
    s += "<circle class=\"person\" cx=\"" + fmt(p.x()) + "\" cy=\"" + fmt(p.y()) + "\" r=\"0.2\" fill=\"#1b9e77\"/>\n";
    if (const auto facing = b.velocity.norm() > kWalkingSpeed ? std::optional(std::atan2(b.velocity.y(), b.velocity.x()))
                                                              : b.orientation) {
      const Vec2d tip = p + 0.4 * Vec2d(std::cos(*facing), std::sin(*facing));
      s += "<line class=\"facing\" x1=\"" + fmt(p.x()) + "\" y1=\"" + fmt(p.y()) + "\" x2=\"" + fmt(tip.x()) +
           "\" y2=\"" + fmt(tip.y()) + "\" stroke=\"#1b9e77\" stroke-width=\"0.04\"/>\n";
    }
  }
  for (const auto& a : t.agents)
    s += "<circle class=\"truth\" cx=\"" + fmt(a.pose.x) + "\" cy=\"" + fmt(a.pose.y) +
         "\" r=\"0.05\" fill=\"#999999\"/>\n";

  std::string path;
  for (std::size_t k = 0; k <= index; ++k) path += (path.empty() ? "" : " ") + pt(ticks[k].snapshot.robot.pose.position());
  s += "<polyline class=\"trajectory\" points=\"" + path + "\" fill=\"none\" stroke=\"#7570b3\" stroke-width=\"0.03\"/>\n";
  if (!t.plan.trajectory.empty()) {
    std::string plan;
    for (const auto& p : t.plan.trajectory) plan += (plan.empty() ? "" : " ") + pt(p);
    s += "<polyline class=\"plan\" points=\"" + plan +
         "\" fill=\"none\" stroke=\"#e7298a\" stroke-width=\"0.02\" stroke-dasharray=\"0.05,0.05\"/>\n";
  }
  const Pose2& r = t.snapshot.robot.pose;
  const Vec2d nose = r.position() + 0.35 * r.heading();
  s += "<circle class=\"robot\" cx=\"" + fmt(r.x) + "\" cy=\"" + fmt(r.y) + "\" r=\"0.25\" fill=\"#7570b3\"/>\n";
  s += "<line class=\"heading\" x1=\"" + fmt(r.x) + "\" y1=\"" + fmt(r.y) + "\" x2=\"" + fmt(nose.x()) + "\" y2=\"" +
       fmt(nose.y()) + "\" stroke=\"#000000\" stroke-width=\"0.04\"/>\n";
  s += "</g>\n</svg>\n";
  return s;
}

}  // namespace sse
