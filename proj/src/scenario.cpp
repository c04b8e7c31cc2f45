#include "sse/scenario.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sse {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

/// Object reader that rejects unknown and mistyped fields.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }
  ~Fields() = default;

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& get(const std::string& key) {
    if (!has(key)) fail(at(key), "required field missing");
    return j_.at(key);
  }
  double number(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected a boolean");
    return v.get<bool>();
  }
  std::string string(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }
  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(at(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.contains(key)) fail(at(key), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Vec2d point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) fail(path, "expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

FacingPolicy parse_facing(const json& j, const std::string& path) {
  FacingPolicy f;
  if (j.is_number()) {
    f.mode = FacingPolicy::Mode::fixed;
    f.theta = j.get<double>();
  } else if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "path") f.mode = FacingPolicy::Mode::path;
    else if (s == "robot") f.mode = FacingPolicy::Mode::robot;
    else fail(path, "expected \"path\", \"robot\", a heading or {\"towards\": [x, y]}");
  } else if (j.is_object()) {
    Fields o(j, path);
    f.mode = FacingPolicy::Mode::point;
    f.point = point(o.get("towards"), o.at("towards"));
    o.finish();
  } else {
    fail(path, "expected \"path\", \"robot\", a heading or {\"towards\": [x, y]}");
  }
  return f;
}

AgentScript parse_agent(const json& j, const std::string& path) {
  Fields o(j, path);
  AgentScript a;
  a.id = o.string("id");
  const auto& wps = o.get("waypoints");
  if (!wps.is_array() || wps.empty()) fail(o.at("waypoints"), "expected a non-empty array of [t, x, y]");
  for (std::size_t k = 0; k < wps.size(); ++k) {
    const auto& w = wps[k];
    const std::string wp = o.at("waypoints") + "[" + std::to_string(k) + "]";
    if (!w.is_array() || w.size() != 3 || !w[0].is_number() || !w[1].is_number() || !w[2].is_number())
      fail(wp, "expected [t, x, y]");
    a.waypoints.push_back({w[0].get<double>(), {w[1].get<double>(), w[2].get<double>()}});
  }
  if (o.has("facing")) a.facing = parse_facing(j.at("facing"), o.at("facing"));
  if (o.has("initial_heading")) a.facing.theta = o.number("initial_heading");
  a.seated = o.boolean("seated", false);
  if (o.has("speech")) {
    const auto& sp = j.at("speech");
    if (!sp.is_array()) fail(o.at("speech"), "expected an array of [start, end]");
    for (std::size_t k = 0; k < sp.size(); ++k) {
      const std::string p = o.at("speech") + "[" + std::to_string(k) + "]";
      const Vec2d iv = point(sp[k], p);
      a.speech.emplace_back(iv.x(), iv.y());
    }
  }
  if (o.has("speaking")) a.speaking = o.boolean("speaking", false);
  a.appearance_seed = o.unsigned_int("appearance_seed", 1);
  a.voice_seed = o.unsigned_int("voice_seed", 1);
  a.group = o.string("group", "");
  o.finish();
  return a;
}

SensorConfig parse_sensors(const json& j, const std::string& path) {
  Fields o(j, path);
  SensorConfig s;
  s.position_sigma = o.number("position_sigma", s.position_sigma);
  s.orientation_sigma = o.number("orientation_sigma", s.orientation_sigma);
  s.embedding_noise = o.number("embedding_noise", s.embedding_noise);
  s.doa_sigma_deg = o.number("doa_sigma_deg", s.doa_sigma_deg);
  s.snr_db = o.number("snr_db", s.snr_db);
  s.dropout = o.number("dropout", s.dropout);
  s.face_dropout = o.number("face_dropout", s.face_dropout);
  s.match_noise = o.number("match_noise", s.match_noise);
  s.max_range = o.number("max_range", s.max_range);
  o.finish();
  return s;
}

void parse_social(const json& j, const std::string& path, SocialSpaceParams& p) {
  Fields o(j, path);
  p.sigma_front = o.number("sigma_front", p.sigma_front);
  p.sigma_side = o.number("sigma_side", p.sigma_side);
  p.sigma_rear = o.number("sigma_rear", p.sigma_rear);
  p.velocity_gain = o.number("velocity_gain", p.velocity_gain);
  p.seated_scale = o.number("seated_scale", p.seated_scale);
  p.group_sigma = o.number("group_sigma", p.group_sigma);
  p.peak = o.number("peak", p.peak);
  p.obstacle_peak = o.number("obstacle_peak", p.obstacle_peak);
  p.inflation_radius = o.number("inflation_radius", p.inflation_radius);
  o.finish();
}

void parse_planner(const json& j, const std::string& path, PlannerConfig& p) {
  Fields o(j, path);
  p.w_goal = o.number("w_goal", p.w_goal);
  p.w_social = o.number("w_social", p.w_social);
  p.w_control = o.number("w_control", p.w_control);
  p.w_terminal = o.number("w_terminal", p.w_terminal);
  o.finish();
}

}  // namespace

void validate_scenario(const ScenarioScript& s) {
  if (!(s.duration > 0.0) || !std::isfinite(s.duration)) fail("duration", "must be positive");
  if (s.map.width() == 0) fail("map", "missing");
  if (!std::isfinite(s.robot.x) || !std::isfinite(s.robot.y) || !std::isfinite(s.robot.theta))
    fail("robot", "pose must be finite");
  if (s.map.occupied_at(s.robot.position())) fail("robot", "start pose is occupied or outside the map");
  if (s.goal && s.map.occupied_at(*s.goal)) fail("goal", "occupied or outside the map");
  const auto& n = s.sensors;
  if (!(n.dropout >= 0.0 && n.dropout < 1.0)) fail("sensors.dropout", "must be in [0, 1)");
  if (!(n.face_dropout >= 0.0 && n.face_dropout <= 1.0)) fail("sensors.face_dropout", "must be in [0, 1]");
  for (const auto& [name, v] : {std::pair{"position_sigma", n.position_sigma}, {"orientation_sigma", n.orientation_sigma},
                                {"embedding_noise", n.embedding_noise}, {"doa_sigma_deg", n.doa_sigma_deg},
                                {"match_noise", n.match_noise}})
    if (!(v >= 0.0)) fail(std::string("sensors.") + name, "must be non-negative");
  if (!(n.max_range > 0.0)) fail("sensors.max_range", "must be positive");
  try {
    s.social.validate();
  } catch (const std::invalid_argument& e) {
    fail("social", e.what());
  }
  std::set<std::string> ids;
  for (std::size_t k = 0; k < s.agents.size(); ++k) {
    const auto& a = s.agents[k];
    const std::string path = "agents[" + std::to_string(k) + "]";
    if (a.id.empty()) fail(path + ".id", "must be non-empty");
    if (!ids.insert(a.id).second) fail(path + ".id", "duplicate agent id " + a.id);
    if (a.waypoints.empty()) fail(path + ".waypoints", "must be non-empty");
    for (std::size_t w = 1; w < a.waypoints.size(); ++w)
      if (!(a.waypoints[w].t > a.waypoints[w - 1].t))
        fail(path + ".waypoints[" + std::to_string(w) + "]", "times must strictly increase");
    for (std::size_t w = 0; w < a.speech.size(); ++w)
      if (!(a.speech[w].second > a.speech[w].first))
        fail(path + ".speech[" + std::to_string(w) + "]", "end must follow start");
  }
}

ScenarioScript parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  Fields o(j, "");
  ScenarioScript s;
  s.name = o.string("name", "scenario");
  const bool has_path = o.has("map"), has_text = o.has("map_text");
  if (has_path == has_text) fail("map", "exactly one of map and map_text is required");
  try {
    if (has_path) s.map = load_map(base_dir / o.string("map"));
    else s.map = parse_map(o.string("map_text"));
  } catch (const MapError& e) {
    fail(has_path ? "map" : "map_text", e.what());
  }
  s.duration = o.number("duration");
  s.seed = o.unsigned_int("seed", 1);
  {
    Fields r(o.get("robot"), "robot");
    s.robot = {r.number("x"), r.number("y"), r.number("theta", 0.0)};
    r.finish();
  }
  if (o.has("goal")) s.goal = point(j.at("goal"), "goal");
  s.engage = o.boolean("engage", true);
  if (o.has("sensors")) s.sensors = parse_sensors(j.at("sensors"), "sensors");
  if (o.has("social")) parse_social(j.at("social"), "social", s.social);
  if (o.has("planner")) parse_planner(j.at("planner"), "planner", s.planner);
  if (o.has("agents")) {
    const auto& agents = j.at("agents");
    if (!agents.is_array()) fail("agents", "expected an array");
    for (std::size_t k = 0; k < agents.size(); ++k)
      s.agents.push_back(parse_agent(agents[k], "agents[" + std::to_string(k) + "]"));
  }
  o.finish();
  validate_scenario(s);
  return s;
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("scenario: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

std::string scenario_to_json(const ScenarioScript& s) {
  ordered_json j;
  j["name"] = s.name;
  j["map_text"] = format_map(s.map);
  j["duration"] = s.duration;
  j["seed"] = s.seed;
  j["robot"] = {{"x", s.robot.x}, {"y", s.robot.y}, {"theta", s.robot.theta}};
  if (s.goal) j["goal"] = {s.goal->x(), s.goal->y()};
  j["engage"] = s.engage;
  const auto& n = s.sensors;
  j["sensors"] = {{"position_sigma", n.position_sigma}, {"orientation_sigma", n.orientation_sigma},
                  {"embedding_noise", n.embedding_noise}, {"doa_sigma_deg", n.doa_sigma_deg},
                  {"snr_db", n.snr_db}, {"dropout", n.dropout}, {"face_dropout", n.face_dropout},
                  {"match_noise", n.match_noise}, {"max_range", n.max_range}};
  const auto& p = s.social;
  j["social"] = {{"sigma_front", p.sigma_front}, {"sigma_side", p.sigma_side}, {"sigma_rear", p.sigma_rear},
                 {"velocity_gain", p.velocity_gain}, {"seated_scale", p.seated_scale},
                 {"group_sigma", p.group_sigma}, {"peak", p.peak}, {"obstacle_peak", p.obstacle_peak},
                 {"inflation_radius", p.inflation_radius}};
  j["planner"] = {{"w_goal", s.planner.w_goal}, {"w_social", s.planner.w_social},
                  {"w_control", s.planner.w_control}, {"w_terminal", s.planner.w_terminal}};
  ordered_json agents = ordered_json::array();
  for (const auto& a : s.agents) {
    ordered_json aj;
    aj["id"] = a.id;
    ordered_json wps = ordered_json::array();
    for (const auto& w : a.waypoints) wps.push_back({w.t, w.pos.x(), w.pos.y()});
    aj["waypoints"] = wps;
    switch (a.facing.mode) {
      case FacingPolicy::Mode::path: aj["facing"] = "path"; break;
      case FacingPolicy::Mode::robot: aj["facing"] = "robot"; break;
      case FacingPolicy::Mode::fixed: aj["facing"] = a.facing.theta; break;
      case FacingPolicy::Mode::point: aj["facing"] = {{"towards", {a.facing.point.x(), a.facing.point.y()}}}; break;
    }
    if (a.facing.mode != FacingPolicy::Mode::fixed) aj["initial_heading"] = a.facing.theta;
    aj["seated"] = a.seated;
    ordered_json sp = ordered_json::array();
    for (const auto& [b, e] : a.speech) sp.push_back({b, e});
    aj["speech"] = sp;
    if (a.speaking) aj["speaking"] = *a.speaking;
    aj["appearance_seed"] = a.appearance_seed;
    aj["voice_seed"] = a.voice_seed;
    aj["group"] = a.group;
    agents.push_back(aj);
  }
  j["agents"] = agents;
  return j.dump(2) + "\n";
}

}  // namespace sse
