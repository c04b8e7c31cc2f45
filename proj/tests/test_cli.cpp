#include "doctest.h"

#include "sse/audio_scene.hpp"
#include "sse/geometry.hpp"
#include "sse/wav.hpp"

#include "json.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace sse;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = SSE_SCENARIO_DIR;
const std::string kTool = SSE_TOOL;

struct Output {
  int code = -1;
  std::string out;
};

Output sh(const std::string& args) {
  Output o;
  FILE* pipe = popen((kTool + " " + args + " 2>/dev/null").c_str(), "r");
  REQUIRE(pipe);
  std::array<char, 4096> buf{};
  while (const std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) o.out.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sse_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<json> lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(json::parse(l));
  return out;
}

}  // namespace

TEST_CASE("run writes a log, metrics and the script; metrics and render read them back") {
  const auto dir = scratch("run");
  const auto r = sh("run " + (kScenarios / "approach_single.json").string() + " --seed 4 --out " + dir.string());
  CHECK(r.code == 0);
  REQUIRE(fs::exists(dir / "log.jsonl"));
  const auto stored = json::parse(std::ifstream(dir / "metrics.json"));
  const auto recomputed = json::parse(sh("metrics " + (dir / "log.jsonl").string()).out);
  CHECK(recomputed == stored);
  CHECK(stored.at("goal_success") == true);

  const auto svg = sh("render " + (dir / "log.jsonl").string() + " --tick 120");
  CHECK(svg.code == 0);
  CHECK(svg.out.starts_with("<svg"));
  CHECK(sh("render " + (dir / "log.jsonl").string() + " --tick 100000").code == 2);
}

TEST_CASE("run is byte-identical for the same seed") {
  const auto s = (kScenarios / "group_pass.json").string();
  const auto a = sh("run " + s + " --seed 11"), b = sh("run " + s + " --seed 11");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines(a.out).size() == 300);
}

TEST_CASE("schema errors exit with 2 and NoFeasiblePlan with 3") {
  const auto dir = scratch("errors");
  std::ofstream(dir / "bad.json") << R"({"name": "x", "map": ")" << (kScenarios / "maps/room.txt").string()
                                  << R"(", "duration": -2, "robot": {"x": 1, "y": 3, "theta": 0}})";
  CHECK(sh("run " + (dir / "bad.json").string()).code == 2);
  CHECK(sh("run " + (dir / "missing.json").string()).code == 2);
  CHECK(sh("plan " + (kScenarios / "blocking_person.json").string() + " --from 0.02 0.02 0").code == 3);
  const auto ok = sh("plan " + (kScenarios / "blocking_person.json").string());
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out).at("trajectory").size() == 21);
}

TEST_CASE("assoc replay resolves hand-written candidates") {
  const auto dir = scratch("assoc");
  std::ofstream(dir / "events.jsonl")
      << R"({"time": 0.0, "observe": ["body:b1", "face:f1"], "candidates": [{"a": "face:f1", "b": "body:b1", "likelihood": 0.9}]})"
      << "\n"
      << R"({"time": 0.1, "observe": ["body:b1", "face:f1", "voice:v1"], "candidates": [{"a": "voice:v1", "b": "body:b1", "likelihood": 0.7}]})"
      << "\n";
  const auto r = sh("assoc replay " + (dir / "events.jsonl").string());
  CHECK(r.code == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() == 2);
  REQUIRE(out[1].at("persons").size() == 1);
  const auto& p = out[1].at("persons")[0];
  CHECK(p.at("face") == "f1");
  CHECK(p.at("body") == "b1");
  CHECK(p.at("voice") == "v1");

  std::ofstream(dir / "broken.jsonl") << R"({"time": 0.0, "candidates": [{"a": "face-f1"}]})" << "\n";
  CHECK(sh("assoc replay " + (dir / "broken.jsonl").string()).code == 2);
}

TEST_CASE("doa reads a stereo recording") {
  const auto dir = scratch("doa");
  MicPairGeometry geom;
  std::mt19937_64 rng(5);
  const std::array<AudioSource, 1> src{AudioSource{deg2rad(30.0), 0.2}};
  const auto frame = synthesize_stereo(std::span<const AudioSource>(src), geom, 16000, 20.0, rng);
  write_wav(dir / "talker.wav", {16000, {frame[0], frame[1]}});
  const auto r = sh("doa --wav " + (dir / "talker.wav").string());
  CHECK(r.code == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() > 20);
  int close = 0;
  for (const auto& f : out) close += std::abs(f.at("doa_deg").get<double>() - 30.0) <= 3.0;
  CHECK(close >= int(0.95 * out.size()));
}
