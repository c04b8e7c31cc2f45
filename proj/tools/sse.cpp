// sse: run scenarios, inspect logs, replay association input, estimate DOA from recordings,
// plan once over a scripted scene, and serve the tuning playground.
//
// Exit codes: 0 success, 1 other errors, 2 schema or parse errors, 3 a NoFeasiblePlan stop.

#include "sse/association.hpp"
#include "sse/doa.hpp"
#include "sse/groups.hpp"
#include "sse/render.hpp"
#include "sse/scenario.hpp"
#include "sse/server.hpp"
#include "sse/sim.hpp"
#include "sse/wav.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace sse;

namespace {

constexpr int kExitError = 1;
constexpr int kExitSchema = 2;
constexpr int kExitNoPlan = 3;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

/// The explicit scenario, else scenario.json next to the log.
std::optional<ScenarioScript> scenario_for(const fs::path& log, const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_scenario(explicit_path);
  const fs::path sibling = log.parent_path() / "scenario.json";
  if (fs::exists(sibling)) return load_scenario(sibling);
  return std::nullopt;
}

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, const std::string& out) {
  const ScenarioScript s = load_scenario(scenario);
  const RunResult r = run_scenario(s, seed);
  const std::string log = to_jsonl(r.ticks);
  if (out.empty()) {
    std::cout << log;
  } else {
    fs::create_directories(out);
    ScenarioScript recorded = s;
    if (seed) recorded.seed = *seed;
    write_file(fs::path(out) / "log.jsonl", log);
    write_file(fs::path(out) / "metrics.json", to_json(r.metrics).dump(2) + "\n");
    write_file(fs::path(out) / "scenario.json", scenario_to_json(recorded) + "\n");
    std::cout << to_json(r.metrics).dump(2) << "\n";
  }
  if (r.stopped) {
    std::cerr << "sse run: planner found no feasible plan; the robot stopped\n";
    return kExitNoPlan;
  }
  return 0;
}

int cmd_metrics(const std::string& log, const std::string& scenario) {
  const auto ticks = parse_jsonl(read_file(log));
  const auto s = scenario_for(log, scenario);
  std::cout << to_json(compute_metrics(ticks, s.value_or(ScenarioScript{}))).dump(2) << "\n";
  return 0;
}

int cmd_render(const std::string& log, int tick, const std::string& scenario, const std::string& out) {
  const auto ticks = parse_jsonl(read_file(log));
  const auto s = scenario_for(log, scenario);
  if (!s) throw ParseError("render: no scenario given and no scenario.json beside the log");
  if (tick < 0 || tick >= static_cast<int>(ticks.size()))
    throw SchemaError("tick: out of range 0.." + std::to_string(ticks.size() - 1));
  const std::string svg = render_svg(ticks, static_cast<std::size_t>(tick), *s);
  if (out.empty()) {
    std::cout << svg;
  } else {
    write_file(out, svg);
  }
  return 0;
}

/// One record per line: time, candidates [{a, b, likelihood}], and the features seen, either as
/// "observe" ["kind:token", ...] or as the "observations" block of a run log.
int cmd_assoc_replay(const std::string& file, double ttl) {
  PersonManagerConfig config;
  config.ttl = ttl;
  PersonManager manager(config);
  std::istringstream in(read_file(file));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      const double time = j.at("time").get<double>();
      if (j.contains("observe")) {
        for (const auto& f : j.at("observe")) manager.observe(entity_from_string(f.get<std::string>()));
      } else if (j.contains("observations")) {
        const auto& o = j.at("observations");
        for (const auto& f : o.at("faces")) manager.observe(face_id(f.at("id").get<std::string>()));
        for (const auto& b : o.at("bodies")) manager.observe(body_id(b.at("id").get<std::string>()));
        for (const auto& v : o.at("voices")) manager.observe(voice_id(v.at("id").get<std::string>()));
      }
      for (const auto& c : j.value("candidates", json::array()))
        manager.submit({entity_from_string(c.at("a").get<std::string>()), entity_from_string(c.at("b").get<std::string>()),
                        c.at("likelihood").get<double>(), time});
      const PartitionResult r = manager.resolve(time);
      ordered_json persons = ordered_json::array();
      for (const auto& p : r.persons) {
        ordered_json pj{{"id", p.id.token}, {"anonymous", p.anonymous}};
        pj["face"] = p.face ? ordered_json(p.face->token) : ordered_json(nullptr);
        pj["body"] = p.body ? ordered_json(p.body->token) : ordered_json(nullptr);
        pj["voice"] = p.voice ? ordered_json(p.voice->token) : ordered_json(nullptr);
        persons.push_back(pj);
      }
      std::cout << ordered_json{{"time", time}, {"affinity", r.affinity}, {"persons", persons}}.dump() << "\n";
    } catch (const json::exception& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (manager.rejected() > 0) std::cerr << "sse assoc replay: " << manager.rejected() << " inadmissible candidates ignored\n";
  return 0;
}

int cmd_doa(const std::string& wav, double spacing, int frame, int hop, double vad_db) {
  const WavData data = read_wav(wav);
  if (data.channels.size() != 2) throw SchemaError("wav: expected 2 channels, found " + std::to_string(data.channels.size()));
  MicPairGeometry geom;
  geom.spacing = spacing;
  geom.sample_rate = data.sample_rate;
  for (const auto& f : track_doa(data.channels[0], data.channels[1], geom, frame, hop, vad_db)) {
    ordered_json j{{"time", f.time}, {"tau", f.tdoa.tau}, {"doa_deg", rad2deg(f.doa)}, {"active", f.active},
                   {"reliable", f.tdoa.reliable}};
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int cmd_plan(const std::string& scenario, double time, const std::vector<double>& goal_xy,
             const std::vector<double>& from) {
  const ScenarioScript s = load_scenario(scenario);
  Pose2 start = s.robot;
  if (!from.empty()) start = {from[0], from[1], from[2]};
  std::optional<Vec2d> goal = s.goal;
  if (!goal_xy.empty()) goal = Vec2d(goal_xy[0], goal_xy[1]);
  if (!goal) throw SchemaError("goal: the scenario has none; pass --goal X Y");

  SocialScene scene;
  std::vector<PersonPose> poses;
  for (const auto& a : s.agents) {
    const AgentTruth t = agent_truth(a, time, start);
    scene.agents.push_back({t.pose.position(), t.pose.theta, t.velocity, t.seated});
    poses.push_back({person_id(a.id), t.pose});
  }
  for (const auto& g : detect_groups(poses))
    if (g.members.size() >= 2) scene.groups.push_back({g.center});
  const CostField field(s.map, scene, s.social);

  try {
    const PlanResult r = plan(start, *goal, field, s.planner);
    ordered_json traj = ordered_json::array();
    for (const auto& x : integrate(start, r.sequence)) traj.push_back({x.x, x.y, x.theta});
    ordered_json controls = ordered_json::array();
    for (const auto& u : r.sequence.controls) controls.push_back({u.v, u.omega});
    std::cout << ordered_json{{"u1", controls.front()},
                              {"cost", r.cost},
                              {"braking_cost", r.braking_cost},
                              {"controls", controls},
                              {"trajectory", traj}}
                     .dump()
              << "\n";
  } catch (const NoFeasiblePlan& e) {
    std::cerr << "sse plan: " << e.what() << "\n";
    return kExitNoPlan;
  }
  return 0;
}

int cmd_serve(const std::string& scenario, const std::string& host, int port, std::optional<std::uint64_t> seed,
              double rate) {
  ServerOptions options;
  options.host = host;
  options.port = port;
  options.seed = seed;
  options.rate_hz = rate;
  PlaygroundServer server(load_scenario(scenario), options);
  const int bound = server.start();
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  server.wait();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social scene engine: simulation, perception replay, planning and the tuning playground"};
  app.require_subcommand(1);

  std::string scenario, log, out, file, wav, host = "127.0.0.1";
  std::uint64_t seed_value = 0;
  int tick = 0, frame = kDefaultFrameLength, hop = kDefaultFrameHop, port = 8080;
  double ttl = PersonManagerConfig{}.ttl, spacing = MicPairGeometry{}.spacing, vad_db = -50.0, time = 0.0,
         rate = 10.0;
  std::vector<double> goal, from;

  auto* run = app.add_subcommand("run", "Run a scenario; prints JSONL, or writes log, metrics and script to --out");
  run->add_option("scenario", scenario, "Scenario JSON")->required();
  auto* run_seed = run->add_option("--seed", seed_value, "Override the scenario seed");
  run->add_option("--out", out, "Output directory");

  auto* metrics = app.add_subcommand("metrics", "Compute metrics from a JSONL log");
  metrics->add_option("log", log, "Log file")->required();
  metrics->add_option("--scenario", scenario, "Scenario JSON (default: scenario.json beside the log)");

  auto* render = app.add_subcommand("render", "Render one logged tick as SVG");
  render->add_option("log", log, "Log file")->required();
  render->add_option("--tick", tick, "Tick index")->required();
  render->add_option("--scenario", scenario, "Scenario JSON (default: scenario.json beside the log)");
  render->add_option("-o,--output", out, "SVG file (default: stdout)");

  auto* assoc = app.add_subcommand("assoc", "Association tools");
  assoc->require_subcommand(1);
  auto* replay = assoc->add_subcommand("replay", "Replay match candidates through the person manager");
  replay->add_option("file", file, "JSONL candidates or a run log")->required();
  replay->add_option("--ttl", ttl, "Edge time-to-live in seconds");

  auto* doa = app.add_subcommand("doa", "Per-frame direction of arrival from a stereo recording");
  doa->add_option("--wav", wav, "Two-channel WAV, left then right microphone")->required();
  doa->add_option("--spacing", spacing, "Microphone spacing in metres");
  doa->add_option("--frame", frame, "Frame length in samples");
  doa->add_option("--hop", hop, "Hop in samples");
  doa->add_option("--vad", vad_db, "Voice activity threshold in dBFS");

  auto* planc = app.add_subcommand("plan", "Plan once over the scripted scene at a given time");
  planc->add_option("scenario", scenario, "Scenario JSON")->required();
  planc->add_option("--time", time, "Scene time in seconds");
  planc->add_option("--goal", goal, "Goal X Y (default: the scenario goal)")->expected(2);
  planc->add_option("--from", from, "Start X Y THETA (default: the robot start)")->expected(3);

  auto* serve = app.add_subcommand("serve", "Serve the tuning playground over HTTP");
  serve->add_option("scenario", scenario, "Scenario JSON")->required();
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port, 0 for any free port");
  auto* serve_seed = serve->add_option("--seed", seed_value, "Override the scenario seed");
  serve->add_option("--rate", rate, "Ticks per second while playing")->check(CLI::Range(0.1, 10.0));

  CLI11_PARSE(app, argc, argv);

  auto seed_of = [&](CLI::Option* o) { return o->count() ? std::optional(seed_value) : std::nullopt; };
  try {
    if (*run) return cmd_run(scenario, seed_of(run_seed), out);
    if (*metrics) return cmd_metrics(log, scenario);
    if (*render) return cmd_render(log, tick, scenario, out);
    if (*replay) return cmd_assoc_replay(file, ttl);
    if (*doa) return cmd_doa(wav, spacing, frame, hop, vad_db);
    if (*planc) return cmd_plan(scenario, time, goal, from);
    if (*serve) return cmd_serve(scenario, host, port, seed_of(serve_seed), rate);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const WavError& e) {
    std::cerr << "wav error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
