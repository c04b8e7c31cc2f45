#include "sse/sim.hpp"

#include "sse/audio_scene.hpp"
#include "sse/doa.hpp"
#include "sse/groups.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sse {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr double kHeadHeight = 1.75;
constexpr double kSeatedHeadHeight = 1.3;
constexpr double kBodyWidth = 0.45;
constexpr double kFaceSize = 0.22;
constexpr double kFaceCone = deg2rad(70.0);
constexpr double kMinDepth = 0.3;
constexpr double kHearingRange = 8.0;
constexpr double kFaceBodyMinCoverage = 0.5;
constexpr double kFaceBodyMinLikelihood = 0.3;
constexpr double kGroupLikelihood = 0.9;
constexpr double kTurnGain = 2.0;
constexpr double kGoalTolerance = 0.2;
constexpr double kCarrotDistance = 1.5;
constexpr double kNavMemory = 2.0;

Eigen::VectorXd noisy(const Eigen::VectorXd& e, double sigma, CountingRng& rng) {
  std::normal_distribution<double> g(0.0, sigma / std::sqrt(double(e.size())));
  Eigen::VectorXd out = e;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += g(rng);
  return out.normalized();
}

bool inside(const BBox& b, const ImageSize& img) {
  return b.x >= 0.0 && b.y >= 0.0 && b.right() <= img.width && b.bottom() <= img.height;
}

/// Body box around a robot-frame floor point, clipped to the image; nullopt when the feet
/// are not visible or the clipped box loses the feet-in-bottom-quarter shape.
std::optional<std::pair<BBox, Vec2d>> body_box(const Vec2d& local, bool seated, const CameraModel& cam) {
  if (local.x() < kMinDepth) return std::nullopt;
  const auto feet = project_to_image(local, 0.0, cam);
  const auto head = project_to_image(local, seated ? kSeatedHeadHeight : kHeadHeight, cam);
  if (!feet || !head) return std::nullopt;
  const ImageSize& img = cam.image;
  if (feet->x() < 0.0 || feet->x() > img.width || feet->y() < 0.0 || feet->y() > img.height) return std::nullopt;
  const double w = cam.focal * kBodyWidth / local.x();
  const double top = std::max(0.0, head->y());
  const double bottom = std::min<double>(img.height, feet->y() + 0.04 * (feet->y() - head->y()));
  const double left = std::max(0.0, feet->x() - w / 2), right = std::min<double>(img.width, feet->x() + w / 2);
  BBox b{left, top, right - left, bottom - top};
  if (b.width < 0.25 * w || b.height <= 0.0) return std::nullopt;
  if (feet->y() < b.y + 0.75 * b.height) return std::nullopt;
  return std::pair{b, *feet};
}

std::optional<BBox> face_box(const Vec2d& local, bool seated, const CameraModel& cam) {
  if (local.x() < kMinDepth) return std::nullopt;
  const auto c = project_to_image(local, (seated ? kSeatedHeadHeight : kHeadHeight) - 0.12, cam);
  if (!c) return std::nullopt;
  const double s = cam.focal * kFaceSize / local.x();
  BBox b{c->x() - s / 2, c->y() - s / 2, s, s};
  if (!inside(b, cam.image)) return std::nullopt;
  return b;
}

double heading_at(const AgentScript& a, double t) {
  double heading = a.facing.theta;
  for (std::size_t k = 1; k < a.waypoints.size(); ++k) {
    if (a.waypoints[k - 1].t > t) break;
    const Vec2d d = a.waypoints[k].pos - a.waypoints[k - 1].pos;
    if (d.norm() > 1e-9) heading = std::atan2(d.y(), d.x());
  }
  return heading;
}

ordered_json opt_token(const std::optional<FeatureId>& f) { return f ? ordered_json(f->token) : ordered_json(nullptr); }

ordered_json bbox_json(const BBox& b) { return {b.x, b.y, b.width, b.height}; }
BBox bbox_from(const json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()}; }
ordered_json vec_json(const Vec2d& v) { return {v.x(), v.y()}; }
Vec2d vec_from(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

}  // namespace

std::string entity_string(const EntityId& id) { return std::string(to_string(id.kind)) + ":" + id.token; }

EntityId entity_from_string(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ParseError("log: malformed entity id " + s);
  return {entity_kind_from_string(s.substr(0, colon)), s.substr(colon + 1)};
}

// Agents and sensing --------------------------------------------------------------------------

Eigen::VectorXd seeded_embedding(std::uint64_t seed, int dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd e(dim);
  for (int i = 0; i < dim; ++i) e[i] = g(rng);
  return e.normalized();
}

EmbeddingBank make_embeddings(const ScenarioScript& s) {
  EmbeddingBank bank;
  for (const auto& a : s.agents) {
    bank.appearance[a.id] = seeded_embedding(a.appearance_seed, kAppearanceDim);
    bank.face[a.id] = seeded_embedding(a.appearance_seed ^ 0x9e3779b97f4a7c15ULL, kFaceDim);
    bank.voice[a.id] = seeded_embedding(a.voice_seed, kVoiceEmbeddingDim);
  }
  return bank;
}

AgentTruth agent_truth(const AgentScript& a, double t, const Pose2& robot) {
  AgentTruth out;
  out.id = a.id;
  out.seated = a.seated;
  out.group = a.group;
  const auto& w = a.waypoints;
  Vec2d pos = w.front().pos;
  if (t >= w.back().t) {
    pos = w.back().pos;
  } else if (t > w.front().t) {
    const auto it = std::upper_bound(w.begin(), w.end(), t, [](double x, const Waypoint& p) { return x < p.t; });
    const Waypoint& b = *it;
    const Waypoint& a0 = *(it - 1);
    const double s = (t - a0.t) / (b.t - a0.t);
    pos = a0.pos + s * (b.pos - a0.pos);
    out.velocity = (b.pos - a0.pos) / (b.t - a0.t);
  }
  double theta = a.facing.theta;
  switch (a.facing.mode) {
    case FacingPolicy::Mode::path: theta = heading_at(a, t); break;
    case FacingPolicy::Mode::fixed: break;
    case FacingPolicy::Mode::robot: theta = std::atan2(robot.y - pos.y(), robot.x - pos.x()); break;
    case FacingPolicy::Mode::point: theta = std::atan2(a.facing.point.y() - pos.y(), a.facing.point.x() - pos.x()); break;
  }
  out.pose = {pos.x(), pos.y(), wrap_angle(theta)};
  if (a.speaking) {
    out.speaking = *a.speaking;
  } else {
    for (const auto& [b, e] : a.speech) out.speaking = out.speaking || (t >= b && t < e);
  }
  return out;
}

Observations emit_observations(const std::vector<AgentTruth>& agents, const RobotState& robot,
                               const ScenarioScript& script, const EmbeddingBank& bank, const CameraModel& camera,
                               EpisodeState& episodes, CountingRng& rng) {
  const SensorConfig& n = script.sensors;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Observations obs;

  for (const auto& a : agents) {
    const Vec2d local = to_local(robot.pose, a.pose.position());
    const bool in_range = local.norm() <= n.max_range;

    // Body: noisy floor point through the camera and back.
    if (in_range && uniform(rng) >= n.dropout) {
      const Vec2d noisy_pos = a.pose.position() + n.position_sigma * Vec2d(gauss(rng), gauss(rng));
      const double orientation = wrap_angle(a.pose.theta + n.orientation_sigma * gauss(rng));
      const Eigen::VectorXd emb = noisy(bank.appearance.at(a.id), n.embedding_noise, rng);
      if (const auto box = body_box(to_local(robot.pose, noisy_pos), a.seated, camera)) {
        const std::string det = "det_" + std::to_string(episodes.next_detection++);
        Detection d;
        d.ground_pos = to_map(robot.pose, project_to_ground(box->second, camera));
        d.embedding = emb;
        d.confidence = 0.9;
        d.source = det;
        d.orientation = orientation;
        d.seated = a.seated;
        obs.detections.push_back(d);
        BodyObservation b;
        b.id = body_id(det);
        b.bbox = box->first;
        b.feet_pixel = box->second;
        b.ground_pos = d.ground_pos;
        b.orientation = orientation;
        b.embedding = emb;
        b.seated = a.seated;
        obs.bodies.push_back(b);
        obs.detection_agent[det] = a.id;
      }
    }

    // Face: frontal within the cone and fully in the image.
    const Vec2d to_robot = robot.pose.position() - a.pose.position();
    const bool frontal = std::abs(wrap_angle(std::atan2(to_robot.y(), to_robot.x()) - a.pose.theta)) <= kFaceCone;
    const auto fbox = in_range && frontal ? face_box(local, a.seated, camera) : std::nullopt;
    if (fbox && uniform(rng) >= n.face_dropout) {
      auto [it, fresh] = episodes.face.try_emplace(a.id);
      if (fresh) it->second = "face_" + std::to_string(episodes.next_face++);
      FaceObservation f;
      f.id = face_id(it->second);
      f.bbox = *fbox;
      f.embedding = noisy(bank.face.at(a.id), n.embedding_noise, rng);
      f.confidence = 0.9;
      obs.faces.push_back(f);
      obs.feature_agent[f.id] = a.id;
    } else {
      episodes.face.erase(a.id);
    }
  }

  // Face-body likelihood from box coverage and horizontal alignment.
  for (const auto& f : obs.faces) {
    for (const auto& b : obs.bodies) {
      const double cov = coverage(f.bbox, b.bbox);
      if (cov < kFaceBodyMinCoverage) continue;
      const double dx = std::abs((f.bbox.x + f.bbox.width / 2) - (b.bbox.x + b.bbox.width / 2)) / (b.bbox.width / 2);
      const double l = std::clamp(cov * std::exp(-2.0 * dx * dx) + n.match_noise * gauss(rng), 0.05, 0.99);
      if (l > kFaceBodyMinLikelihood) obs.face_body.push_back({f.id, b.id, l, 0.0});
    }
  }

  // Voices: one stereo frame of every audible talker, a single GCC-PHAT estimate. The array
  // is deaf while the robot talks.
  std::vector<const AgentTruth*> talkers;
  for (const auto& a : agents)
    if (a.speaking && (a.pose.position() - robot.pose.position()).norm() <= kHearingRange) talkers.push_back(&a);
  for (const auto& a : agents)
    if (!a.speaking) episodes.voice.erase(a.id);
  if (!talkers.empty() && !robot.speaking) {
    std::vector<AudioSource> sources;
    for (const auto* a : talkers) {
      const double d = (a->pose.position() - robot.pose.position()).norm();
      sources.push_back({bearing_from(robot.pose, a->pose.position()), 1.0 / std::max(d, 0.5)});
    }
    const MicPairGeometry geom;
    const auto frame = synthesize_stereo(std::span<const AudioSource>(sources), geom, kDefaultFrameLength, n.snr_db, rng);
    const auto est = gcc_phat(frame[0], frame[1], geom);
    const double doa = tdoa_to_doa(est.tau, geom);
    for (const auto* a : talkers) {
      auto [it, fresh] = episodes.voice.try_emplace(a->id);
      if (fresh) it->second = "voice_" + std::to_string(episodes.next_voice++);
      VoiceObservation v;
      v.id = voice_id(it->second);
      v.doa = std::clamp(doa + deg2rad(n.doa_sigma_deg) * gauss(rng), -std::numbers::pi / 2, std::numbers::pi / 2);
      v.active = true;
      v.doa_reliable = est.reliable && talkers.size() == 1;
      v.embedding = noisy(bank.voice.at(a->id), n.embedding_noise, rng);
      obs.voices.push_back(v);
      obs.feature_agent[v.id] = a->id;
    }
  }
  return obs;
}

// Simulation ----------------------------------------------------------------------------------

Simulation::Simulation(ScenarioScript script, std::optional<std::uint64_t> seed)
    : script_(std::move(script)), rng_(seed.value_or(script_.seed)), bank_(make_embeddings(script_)) {
  validate_scenario(script_);
  SupervisorConfig sc;
  sc.initiate = script_.engage;
  supervisor_ = Supervisor(sc);
  robot_.pose = script_.robot;
  robot_.pose.theta = wrap_angle(robot_.pose.theta);
  total_ticks_ = static_cast<int>(std::llround(script_.duration / kSimDt));
  field_ = std::make_unique<CostField>(script_.map, SocialScene{}, script_.social);
}

void Simulation::edit_script(const std::function<void(ScenarioScript&)>& edit) {
  ScenarioScript next = script_;
  edit(next);
  validate_scenario(next);
  script_ = std::move(next);
  bank_ = make_embeddings(script_);
}

TickLog Simulation::step() {
  const double now = time();
  TickLog log;
  log.tick = tick_;
  log.time = now;

  for (const auto& a : script_.agents) {
    AgentTruth truth = agent_truth(a, now, robot_.pose);
    const Vec2d local = to_local(robot_.pose, truth.pose.position());
    truth.visible = local.norm() <= script_.sensors.max_range && body_box(local, truth.seated, camera_).has_value();
    log.agents.push_back(std::move(truth));
  }
  const Observations obs = emit_observations(log.agents, robot_, script_, bank_, camera_, episodes_, rng_);

  // Perception: tracking, then the person partition.
  const TrackerStep ts = tracker_.step(obs.detections, obs.voices, robot_.pose, kSimDt, now);
  std::vector<MatchCandidate> candidates = ts.candidates;
  for (auto c : obs.face_body) {
    const auto it = ts.detection_to_track.find(c.b.token);
    if (it == ts.detection_to_track.end()) continue;
    c.b = it->second;
    c.time = now;
    candidates.push_back(c);
  }
  for (const auto& v : obs.voices)
    if (auto c = voice_match_candidate(v, persons_.voices(), persons_.config().voice_threshold, now))
      candidates.push_back(*c);
  for (const auto& c : candidates) persons_.submit(c);
  for (const auto& [det, track] : ts.detection_to_track) persons_.observe(track);
  for (const auto& f : obs.faces) persons_.observe(f.id);
  for (const auto& v : obs.voices) persons_.observe(v.id);
  const PartitionResult partition = persons_.resolve(now);

  SceneSnapshot& snap = log.snapshot;
  snap.time = now;
  snap.image = camera_.image;
  snap.faces = obs.faces;
  snap.voices = obs.voices;
  for (const auto& b : obs.bodies) {
    const FeatureId& track_id = ts.detection_to_track.at(b.id.token);
    const auto tr = std::find_if(tracker_.tracks().begin(), tracker_.tracks().end(),
                                 [&](const Track& t) { return t.id == track_id; });
    BodyObservation body = b;
    body.id = track_id;
    if (tr != tracker_.tracks().end()) {
      body.ground_pos = tr->state.position();
      body.velocity = tr->state.velocity();
      body.embedding = tr->embedding;
    }
    snap.bodies.push_back(std::move(body));
  }
  snap.persons = partition.persons;
  for (const auto& p : snap.persons)
    for (const auto* slot : {&p.face, &p.body, &p.voice}) {
      if (!*slot) continue;
      const FeatureId& f = **slot;
      const bool seen = (f.kind == EntityKind::body && snap.find_body(f)) ||
                        (f.kind == EntityKind::voice && snap.find_voice(f)) ||
                        (f.kind == EntityKind::face &&
                         std::any_of(snap.faces.begin(), snap.faces.end(), [&](const auto& x) { return x.id == f; }));
      if (!seen) snap.stale.insert(f);
    }
  for (const auto& p : snap.persons)
    if (p.voice && snap.find_voice(*p.voice)) persons_.voices().store(p.id, snap.find_voice(*p.voice)->embedding);
  snap.robot = robot_;
  log.affinity = partition.affinity;
  log.candidates = candidates;

  for (const auto& [det, agent] : obs.detection_agent)
    if (const auto* p = partition.person_of(ts.detection_to_track.at(det))) log.truth_person[agent] = p->id.token;

  // Groups from the tracked bodies of persons.
  std::vector<PersonPose> poses;
  for (const auto& p : snap.persons) {
    if (!p.body) continue;
    const auto* b = snap.find_body(*p.body);
    // F-formations are static; walkers are left out.
    if (!b || !b->ground_pos || b->velocity.norm() > kWalkingSpeed) continue;
    const auto facing = body_facing(*b);
    if (!facing) continue;
    poses.push_back({p.id, {b->ground_pos->x(), b->ground_pos->y(), *facing}});
  }
  std::vector<MatchCandidate> group_edges;
  std::map<GroupId, Vec2d> centres;
  for (auto& g : detect_groups(poses)) {
    if (g.members.size() < 2) continue;
    for (const auto& m : g.members)
      if (const auto* p = snap.find_person(m); p && p->body) group_edges.push_back({*p->body, g.id, kGroupLikelihood, now});
    centres[g.id] = g.center;
    snap.groups.push_back(std::move(g));
  }
  persons_.replace_groups(group_edges, centres);

  // Decision and control.
  SocialScene social = social_scene_from_snapshot(snap);
  std::set<FeatureId> seen;
  for (const auto& b : snap.bodies) {
    if (!b.ground_pos) continue;
    seen.insert(b.id);
    nav_memory_[b.id] = {SocialAgent{*b.ground_pos, body_facing(b), b.velocity, b.seated}, now};
  }
  std::erase_if(nav_memory_, [&](const auto& e) { return now - e.second.second > kNavMemory; });
  for (const auto& [id, entry] : nav_memory_) {
    if (seen.contains(id)) continue;
    SocialAgent ghost = entry.first;
    ghost.velocity = Vec2d::Zero();
    social.agents.push_back(ghost);
  }
  field_ = std::make_unique<CostField>(script_.map, social, script_.social);
  log.actions = supervisor_.step(snap, *field_, now);
  const InteractionState& st = supervisor_.state();

  // Joining a group means entering its o-space rim, so that group's term is left out of the
  // planning field; its members' personal spaces stay.
  const CostField* planning_field = field_.get();
  std::unique_ptr<CostField> joining_field;
  if (st.phase == Phase::approaching && st.target && st.target->kind == EntityKind::group) {
    for (const auto& g : snap.groups)
      if (std::any_of(g.members.begin(), g.members.end(), [&](const PersonId& m) { return st.members.contains(m); }))
        std::erase_if(social.groups, [&](const SocialGroup& sg) { return (sg.centre - g.center).norm() < 1e-9; });
    joining_field = std::make_unique<CostField>(script_.map, std::move(social), script_.social);
    planning_field = joining_field.get();
  }
  log.phase = st.phase;
  log.target = st.target;

  PlanLog& pl = log.plan;
  Control u;
  std::optional<Vec2d> goal;
  if (st.phase == Phase::approaching && supervisor_.goal()) goal = supervisor_.goal()->position();
  else if (st.phase == Phase::idle) goal = script_.goal;

  if (goal) {
    pl.mode = "plan";
    pl.goal = goal;
    // A far goal would swamp the social term; the MPC chases a carrot on a global grid path.
    Vec2d local_goal = *goal;
    if ((*goal - robot_.pose.position()).norm() > kCarrotDistance) {
      try {
        local_goal = point_along(grid_path(*planning_field, robot_.pose.position(), *goal), kCarrotDistance);
      } catch (const Unreachable&) {
        local_goal = robot_.pose.position() + kCarrotDistance * (*goal - robot_.pose.position()).normalized();
      }
    }
    try {
      const PlanResult r = plan(robot_.pose, local_goal, *planning_field, script_.planner, previous_ ? &*previous_ : nullptr);
      u = r.sequence.controls.front();
      pl.cost = r.cost;
      pl.braking_cost = r.braking_cost;
      for (const auto& x : integrate(robot_.pose, r.sequence)) pl.trajectory.push_back(x.position());
      previous_ = r.sequence;
    } catch (const NoFeasiblePlan&) {
      pl.mode = "stop";
      pl.stopped = true;
      stopped_ = true;
      previous_.reset();
    }
  } else {
    previous_.reset();
    std::optional<Vec2d> look;
    if (st.phase == Phase::engaged || st.phase == Phase::disengaging) {
      const std::optional<EntityId> who = st.focus ? st.focus : st.target;
      if (who && who->kind == EntityKind::person) {
        if (const auto* p = snap.find_person(*who); p && p->body)
          if (const auto* b = snap.find_body(*p->body); b && b->ground_pos) look = *b->ground_pos;
      } else if (who) {
        for (const auto& g : snap.groups)
          if (g.id == *who) look = g.center;
      }
    }
    if (look) {
      pl.mode = "turn";
      const double err = bearing_from(robot_.pose, *look);
      u.omega = std::clamp(kTurnGain * err, -script_.planner.omega_max, script_.planner.omega_max);
    } else {
      pl.mode = "hold";
    }
  }
  pl.u1 = u;

  robot_.pose = forward_model(robot_.pose, u, kSimDt);
  robot_.pose.theta = wrap_angle(robot_.pose.theta);
  robot_.v = u.v;
  robot_.omega = u.omega;
  robot_.speaking = st.speaking_until > now + kSimDt;

  for (const auto& t : tracker_.tracks())
    log.tracks.push_back({t.id.token, t.state.mean, std::string(to_string(t.status))});
  log.rng_draws = rng_.draws();
  ++tick_;
  last_ = log;
  return log;
}

RunResult run_scenario(const ScenarioScript& script, std::optional<std::uint64_t> seed) {
  Simulation sim(script, seed);
  RunResult r;
  while (!sim.done()) r.ticks.push_back(sim.step());
  r.stopped = sim.stopped();
  r.metrics = compute_metrics(r.ticks, script);
  return r;
}

// Metrics -------------------------------------------------------------------------------------

Metrics compute_metrics(const std::vector<TickLog>& ticks, const ScenarioScript& script) {
  Metrics m;
  m.ticks = static_cast<int>(ticks.size());

  // Identity: each agent's modal person id, and changes between consecutive observations.
  std::map<std::string, std::map<std::string, int>> counts;
  std::map<std::string, std::string> last_id;
  long total = 0;
  for (const auto& t : ticks)
    for (const auto& [agent, person] : t.truth_person) {
      ++counts[agent][person];
      ++total;
      auto it = last_id.find(agent);
      if (it != last_id.end() && it->second != person) ++m.id_switches;
      last_id[agent] = person;
    }
  if (total > 0) {
    long modal = 0;
    for (const auto& [agent, c] : counts) {
      int best = 0;
      for (const auto& [_, k] : c) best = std::max(best, k);
      modal += best;
    }
    m.association_accuracy = double(modal) / double(total);
  }

  // Groups: a detection matches a true group when they share at least 2/3 of the larger one.
  long tp = 0, fp = 0, fn = 0;
  for (const auto& t : ticks) {
    std::map<std::string, std::set<std::string>> truth;
    for (const auto& a : t.agents)
      if (!a.group.empty() && a.visible) truth[a.group].insert(a.id);
    std::vector<std::set<std::string>> true_groups;
    for (auto& [_, g] : truth)
      if (g.size() >= 2) true_groups.push_back(g);
    std::map<std::string, std::string> agent_of;
    for (const auto& [agent, person] : t.truth_person) agent_of[person] = agent;
    std::vector<std::set<std::string>> found;
    for (const auto& g : t.snapshot.groups) {
      std::set<std::string> agents;
      for (const auto& p : g.members)
        if (auto it = agent_of.find(p.token); it != agent_of.end()) agents.insert(it->second);
      found.push_back(agents);
    }
    std::vector<bool> used(found.size(), false);
    for (const auto& tg : true_groups) {
      bool hit = false;
      for (std::size_t k = 0; k < found.size() && !hit; ++k) {
        if (used[k]) continue;
        std::size_t common = 0;
        for (const auto& a : tg) common += found[k].count(a);
        if (3 * common >= 2 * std::max(tg.size(), found[k].size())) {
          used[k] = hit = true;
        }
      }
      hit ? ++tp : ++fn;
    }
    fp += std::count(used.begin(), used.end(), false);
  }
  m.group_f1 = (tp + fp + fn) == 0 ? 1.0 : 2.0 * tp / double(2 * tp + fp + fn);

  // Proximity, path and outcome.
  double sum = 0.0;
  int with_agents = 0;
  m.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ticks.size(); ++k) {
    const auto& t = ticks[k];
    const Vec2d r = t.snapshot.robot.pose.position();
    if (!t.agents.empty()) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& a : t.agents) nearest = std::min(nearest, (a.pose.position() - r).norm());
      sum += nearest;
      ++with_agents;
      m.min_distance = std::min(m.min_distance, nearest);
    }
    if (k > 0) m.path_length += (r - ticks[k - 1].snapshot.robot.pose.position()).norm();
    if (t.plan.stopped) ++m.stop_events;
    if (t.phase == Phase::engaged && !m.time_to_engage) m.time_to_engage = t.time;
    if (script.goal && (r - *script.goal).norm() <= kGoalTolerance) m.goal_success = true;
  }
  if (with_agents > 0) {
    m.mean_distance = sum / with_agents;
  } else {
    m.min_distance = 0.0;
  }
  if (!script.goal) m.goal_success = m.time_to_engage.has_value();
  return m;
}

ordered_json to_json(const Metrics& m) {
  ordered_json j;
  j["association_accuracy"] = m.association_accuracy;
  j["id_switches"] = m.id_switches;
  j["group_f1"] = m.group_f1;
  j["mean_distance"] = m.mean_distance;
  j["min_distance"] = m.min_distance;
  j["goal_success"] = m.goal_success;
  j["time_to_engage"] = m.time_to_engage ? ordered_json(*m.time_to_engage) : ordered_json(nullptr);
  j["path_length"] = m.path_length;
  j["ticks"] = m.ticks;
  j["stop_events"] = m.stop_events;
  return j;
}

// Logs ----------------------------------------------------------------------------------------

ordered_json to_json(const TickLog& t) {
  ordered_json j;
  j["tick"] = t.tick;
  j["time"] = t.time;
  const RobotState& r = t.snapshot.robot;
  j["robot"] = {{"x", r.pose.x}, {"y", r.pose.y}, {"theta", r.pose.theta},
                {"v", r.v},      {"omega", r.omega}, {"speaking", r.speaking}};
  ordered_json agents = ordered_json::array();
  for (const auto& a : t.agents)
    agents.push_back({{"id", a.id}, {"x", a.pose.x}, {"y", a.pose.y}, {"theta", a.pose.theta},
                      {"velocity", vec_json(a.velocity)}, {"speaking", a.speaking}, {"seated", a.seated},
                      {"group", a.group}, {"visible", a.visible}});
  j["agents"] = agents;
  j["truth_person"] = t.truth_person;

  const SceneSnapshot& s = t.snapshot;
  ordered_json faces = ordered_json::array(), bodies = ordered_json::array(), voices = ordered_json::array();
  for (const auto& f : s.faces) faces.push_back({{"id", f.id.token}, {"bbox", bbox_json(f.bbox)}, {"confidence", f.confidence}});
  for (const auto& b : s.bodies)
    bodies.push_back({{"id", b.id.token},
                      {"bbox", bbox_json(b.bbox)},
                      {"feet", vec_json(b.feet_pixel)},
                      {"ground", b.ground_pos ? vec_json(*b.ground_pos) : ordered_json(nullptr)},
                      {"orientation", b.orientation ? ordered_json(*b.orientation) : ordered_json(nullptr)},
                      {"velocity", vec_json(b.velocity)},
                      {"seated", b.seated}});
  for (const auto& v : s.voices)
    voices.push_back({{"id", v.id.token}, {"doa", v.doa}, {"active", v.active}, {"reliable", v.doa_reliable}});
  j["observations"] = {{"faces", faces}, {"bodies", bodies}, {"voices", voices}};

  ordered_json cands = ordered_json::array();
  for (const auto& c : t.candidates)
    cands.push_back({{"a", entity_string(c.a)}, {"b", entity_string(c.b)}, {"likelihood", c.likelihood}});
  j["candidates"] = cands;
  ordered_json tracks = ordered_json::array();
  for (const auto& tr : t.tracks)
    tracks.push_back({{"id", tr.id}, {"state", {tr.state[0], tr.state[1], tr.state[2], tr.state[3]}}, {"status", tr.status}});
  j["tracks"] = tracks;

  ordered_json persons = ordered_json::array();
  for (const auto& p : s.persons)
    persons.push_back({{"id", p.id.token}, {"face", opt_token(p.face)}, {"body", opt_token(p.body)},
                       {"voice", opt_token(p.voice)}, {"anonymous", p.anonymous}});
  j["persons"] = persons;
  ordered_json stale = ordered_json::array();
  for (const auto& f : s.stale) stale.push_back(entity_string(f));
  j["stale"] = stale;
  ordered_json groups = ordered_json::array();
  for (const auto& g : s.groups) {
    ordered_json members = ordered_json::array();
    for (const auto& m : g.members) members.push_back(m.token);
    groups.push_back({{"id", g.id.token}, {"members", members}, {"center", vec_json(g.center)}});
  }
  j["groups"] = groups;
  j["affinity"] = t.affinity;

  ordered_json actions = ordered_json::array();
  for (const auto& a : t.actions) {
    ordered_json aj{{"kind", std::string(to_string(a.kind))}};
    if (a.pose) aj["pose"] = {a.pose->x, a.pose->y, a.pose->theta};
    if (a.target) aj["target"] = entity_string(*a.target);
    if (!a.utterance.empty()) aj["utterance"] = a.utterance;
    actions.push_back(aj);
  }
  j["supervisor"] = {{"phase", std::string(to_string(t.phase))},
                     {"target", t.target ? ordered_json(entity_string(*t.target)) : ordered_json(nullptr)},
                     {"actions", actions}};
  ordered_json traj = ordered_json::array();
  for (const auto& p : t.plan.trajectory) traj.push_back(vec_json(p));
  j["plan"] = {{"mode", t.plan.mode},
               {"goal", t.plan.goal ? vec_json(*t.plan.goal) : ordered_json(nullptr)},
               {"u1", {t.plan.u1.v, t.plan.u1.omega}},
               {"cost", t.plan.cost},
               {"braking_cost", t.plan.braking_cost},
               {"trajectory", traj},
               {"stopped", t.plan.stopped}};
  j["rng_draws"] = t.rng_draws;
  return j;
}

namespace {

Phase phase_from_string(const std::string& s) {
  for (Phase p : {Phase::idle, Phase::approaching, Phase::engaged, Phase::disengaging})
    if (to_string(p) == s) return p;
  throw ParseError("log: unknown phase " + s);
}

ActionKind action_from_string(const std::string& s) {
  for (ActionKind k : {ActionKind::navigate_to, ActionKind::face, ActionKind::speak, ActionKind::listen,
                       ActionKind::wave, ActionKind::point, ActionKind::stop})
    if (to_string(k) == s) return k;
  throw ParseError("log: unknown action " + s);
}

std::optional<FeatureId> opt_feature(const json& j, EntityId (*make)(std::string)) {
  if (j.is_null()) return std::nullopt;
  return make(j.get<std::string>());
}

}  // namespace

TickLog tick_from_json(const json& j) {
  TickLog t;
  try {
    t.tick = j.at("tick").get<int>();
    t.time = j.at("time").get<double>();
    SceneSnapshot& s = t.snapshot;
    s.time = t.time;
    const auto& r = j.at("robot");
    s.robot.pose = {r.at("x").get<double>(), r.at("y").get<double>(), r.at("theta").get<double>()};
    s.robot.v = r.at("v").get<double>();
    s.robot.omega = r.at("omega").get<double>();
    s.robot.speaking = r.at("speaking").get<bool>();
    for (const auto& a : j.at("agents")) {
      AgentTruth at;
      at.id = a.at("id").get<std::string>();
      at.pose = {a.at("x").get<double>(), a.at("y").get<double>(), a.at("theta").get<double>()};
      at.velocity = vec_from(a.at("velocity"));
      at.speaking = a.at("speaking").get<bool>();
      at.seated = a.at("seated").get<bool>();
      at.group = a.at("group").get<std::string>();
      at.visible = a.at("visible").get<bool>();
      t.agents.push_back(at);
    }
    t.truth_person = j.at("truth_person").get<std::map<std::string, std::string>>();
    const auto& o = j.at("observations");
    for (const auto& f : o.at("faces")) {
      FaceObservation fo;
      fo.id = face_id(f.at("id").get<std::string>());
      fo.bbox = bbox_from(f.at("bbox"));
      fo.confidence = f.at("confidence").get<double>();
      s.faces.push_back(fo);
    }
    for (const auto& b : o.at("bodies")) {
      BodyObservation bo;
      bo.id = body_id(b.at("id").get<std::string>());
      bo.bbox = bbox_from(b.at("bbox"));
      bo.feet_pixel = vec_from(b.at("feet"));
      if (!b.at("ground").is_null()) bo.ground_pos = vec_from(b.at("ground"));
      if (!b.at("orientation").is_null()) bo.orientation = b.at("orientation").get<double>();
      bo.velocity = vec_from(b.at("velocity"));
      bo.seated = b.at("seated").get<bool>();
      s.bodies.push_back(bo);
    }
    for (const auto& v : o.at("voices")) {
      VoiceObservation vo;
      vo.id = voice_id(v.at("id").get<std::string>());
      vo.doa = v.at("doa").get<double>();
      vo.active = v.at("active").get<bool>();
      vo.doa_reliable = v.at("reliable").get<bool>();
      s.voices.push_back(vo);
    }
    for (const auto& c : j.at("candidates"))
      t.candidates.push_back({entity_from_string(c.at("a").get<std::string>()),
                              entity_from_string(c.at("b").get<std::string>()), c.at("likelihood").get<double>(),
                              t.time});
    for (const auto& tr : j.at("tracks")) {
      TrackLog tl;
      tl.id = tr.at("id").get<std::string>();
      for (int k = 0; k < 4; ++k) tl.state[k] = tr.at("state")[k].get<double>();
      tl.status = tr.at("status").get<std::string>();
      t.tracks.push_back(tl);
    }
    for (const auto& p : j.at("persons")) {
      PersonRecord pr;
      pr.id = person_id(p.at("id").get<std::string>());
      pr.face = opt_feature(p.at("face"), face_id);
      pr.body = opt_feature(p.at("body"), body_id);
      pr.voice = opt_feature(p.at("voice"), voice_id);
      pr.anonymous = p.at("anonymous").get<bool>();
      s.persons.push_back(pr);
    }
    for (const auto& f : j.at("stale")) s.stale.insert(entity_from_string(f.get<std::string>()));
    for (const auto& g : j.at("groups")) {
      GroupRecord gr;
      gr.id = group_id(g.at("id").get<std::string>());
      for (const auto& m : g.at("members")) gr.members.insert(person_id(m.get<std::string>()));
      gr.center = vec_from(g.at("center"));
      s.groups.push_back(gr);
    }
    t.affinity = j.at("affinity").get<double>();
    const auto& sup = j.at("supervisor");
    t.phase = phase_from_string(sup.at("phase").get<std::string>());
    if (!sup.at("target").is_null()) t.target = entity_from_string(sup.at("target").get<std::string>());
    for (const auto& a : sup.at("actions")) {
      RobotAction ra;
      ra.kind = action_from_string(a.at("kind").get<std::string>());
      if (a.contains("pose")) ra.pose = Pose2{a["pose"][0].get<double>(), a["pose"][1].get<double>(), a["pose"][2].get<double>()};
      if (a.contains("target")) ra.target = entity_from_string(a["target"].get<std::string>());
      if (a.contains("utterance")) ra.utterance = a["utterance"].get<std::string>();
      t.actions.push_back(ra);
    }
    const auto& p = j.at("plan");
    t.plan.mode = p.at("mode").get<std::string>();
    if (!p.at("goal").is_null()) t.plan.goal = vec_from(p.at("goal"));
    t.plan.u1 = {p.at("u1")[0].get<double>(), p.at("u1")[1].get<double>()};
    t.plan.cost = p.at("cost").get<double>();
    t.plan.braking_cost = p.at("braking_cost").get<double>();
    for (const auto& x : p.at("trajectory")) t.plan.trajectory.push_back(vec_from(x));
    t.plan.stopped = p.at("stopped").get<bool>();
    t.rng_draws = j.at("rng_draws").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("log: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("log: ") + e.what());
  }
  return t;
}

std::string to_jsonl(const std::vector<TickLog>& ticks) {
  std::string out;
  for (const auto& t : ticks) {
    out += to_json(t).dump();
    out += '\n';
  }
  return out;
}

std::vector<TickLog> parse_jsonl(const std::string& text) {
  std::vector<TickLog> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(tick_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError("log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace sse
