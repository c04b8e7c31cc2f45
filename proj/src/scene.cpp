#include "sse/scene.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace sse {

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::face: return "face";
    case EntityKind::body: return "body";
    case EntityKind::voice: return "voice";
    case EntityKind::person: return "person";
    case EntityKind::group: return "group";
  }
  return "unknown";
}

EntityKind entity_kind_from_string(std::string_view name) {
  if (name == "face") return EntityKind::face;
  if (name == "body") return EntityKind::body;
  if (name == "voice") return EntityKind::voice;
  if (name == "person") return EntityKind::person;
  if (name == "group") return EntityKind::group;
  throw std::invalid_argument("unknown entity kind '" + std::string(name) + "'");
}

double coverage(const BBox& inner, const BBox& outer) {
  if (inner.area() <= 0.0) return 0.0;
  const double w = std::min(inner.right(), outer.right()) - std::max(inner.x, outer.x);
  const double h = std::min(inner.bottom(), outer.bottom()) - std::max(inner.y, outer.y);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return (w * h) / inner.area();
}

const BodyObservation* SceneSnapshot::find_body(const FeatureId& id) const {
  for (const auto& b : bodies)
    if (b.id == id) return &b;
  return nullptr;
}

const VoiceObservation* SceneSnapshot::find_voice(const FeatureId& id) const {
  for (const auto& v : voices)
    if (v.id == id) return &v;
  return nullptr;
}

const PersonRecord* SceneSnapshot::find_person(const PersonId& id) const {
  for (const auto& p : persons)
    if (p.id == id) return &p;
  return nullptr;
}

namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr double kPi = std::numbers::pi;

std::string name(const EntityId& id) { return std::string(to_string(id.kind)) + " " + id.token; }

bool angle_in_range(double a) { return std::isfinite(a) && a > -kPi && a <= kPi; }

bool inside_image(const BBox& b, const ImageSize& img) {
  return b.width >= 0.0 && b.height >= 0.0 && b.x >= 0.0 && b.y >= 0.0 && b.right() <= img.width &&
         b.bottom() <= img.height;
}

class Checker {
 public:
  explicit Checker(const SceneSnapshot& s) : s_(s) {}

  std::vector<std::string> run() {
    if (!std::isfinite(s_.time)) add("snapshot: non-finite time");
    for (const auto& f : s_.faces) check_face(f);
    for (const auto& b : s_.bodies) check_body(b);
    for (const auto& v : s_.voices) check_voice(v);
    check_duplicates();
    check_persons();
    check_groups();
    if (!angle_in_range(s_.robot.pose.theta)) add("robot: heading outside (-pi, pi]");
    return std::move(out_);
  }

 private:
  void add(std::string msg) { out_.push_back(std::move(msg)); }

  void check_kind(const EntityId& id, EntityKind expected) {
    if (id.kind != expected) add(name(id) + ": listed as " + std::string(to_string(expected)));
  }

  void check_embedding(const EntityId& id, const Eigen::VectorXd& e) {
    if (e.size() == 0) return;
    if (std::abs(e.norm() - 1.0) > kUnitTolerance) add(name(id) + ": embedding not unit norm");
  }

  void check_face(const FaceObservation& f) {
    check_kind(f.id, EntityKind::face);
    if (!inside_image(f.bbox, s_.image)) add(name(f.id) + ": bbox outside image");
    if (!(f.confidence >= 0.0 && f.confidence <= 1.0)) add(name(f.id) + ": confidence outside [0,1]");
    check_embedding(f.id, f.embedding);
  }

  void check_body(const BodyObservation& b) {
    check_kind(b.id, EntityKind::body);
    if (!inside_image(b.bbox, s_.image)) add(name(b.id) + ": bbox outside image");
    const double quarter_top = b.bbox.y + 0.75 * b.bbox.height;
    const Vec2d& fp = b.feet_pixel;
    if (fp.x() < b.bbox.x || fp.x() > b.bbox.right() || fp.y() < quarter_top || fp.y() > b.bbox.bottom())
      add(name(b.id) + ": feet pixel outside bbox bottom quarter");
    if (b.orientation && !angle_in_range(*b.orientation)) add(name(b.id) + ": orientation outside (-pi, pi]");
    check_embedding(b.id, b.embedding);
  }

  void check_voice(const VoiceObservation& v) {
    check_kind(v.id, EntityKind::voice);
    if (!(v.doa >= -kPi / 2 && v.doa <= kPi / 2)) add(name(v.id) + ": doa outside frontal half-plane");
    if (v.embedding.size() != kVoiceEmbeddingDim)
      add(name(v.id) + ": embedding dimension " + std::to_string(v.embedding.size()) + " != 192");
    check_embedding(v.id, v.embedding);
  }

  template <typename Range, typename Proj>
  void duplicates_in(const Range& r, Proj id_of) {
    std::map<EntityId, int> seen;
    for (const auto& item : r)
      if (++seen[id_of(item)] == 2) add(name(id_of(item)) + ": duplicate id");
  }

  void check_duplicates() {
    duplicates_in(s_.faces, [](const auto& x) { return x.id; });
    duplicates_in(s_.bodies, [](const auto& x) { return x.id; });
    duplicates_in(s_.voices, [](const auto& x) { return x.id; });
    duplicates_in(s_.persons, [](const auto& x) { return x.id; });
    duplicates_in(s_.groups, [](const auto& x) { return x.id; });
  }

  bool feature_known(const FeatureId& id) const {
    if (s_.stale.contains(id)) return true;
    switch (id.kind) {
      case EntityKind::face:
        for (const auto& f : s_.faces)
          if (f.id == id) return true;
        return false;
      case EntityKind::body: return s_.find_body(id) != nullptr;
      case EntityKind::voice: return s_.find_voice(id) != nullptr;
      default: return false;
    }
  }

  void check_persons() {
    std::map<FeatureId, PersonId> owner;
    for (const auto& p : s_.persons) {
      check_kind(p.id, EntityKind::person);
      const std::pair<const std::optional<FeatureId>*, EntityKind> slots[] = {
          {&p.face, EntityKind::face}, {&p.body, EntityKind::body}, {&p.voice, EntityKind::voice}};
      for (const auto& [slot, kind] : slots) {
        if (!*slot) continue;
        const FeatureId& f = **slot;
        if (f.kind != kind) {
          add("person " + p.id.token + ": " + std::string(to_string(kind)) + " slot holds " + name(f));
          continue;
        }
        if (!feature_known(f)) add("person " + p.id.token + ": dangling " + name(f));
        auto [it, inserted] = owner.emplace(f, p.id);
        if (!inserted) add(name(f) + ": bound to persons " + it->second.token + " and " + p.id.token);
      }
    }
  }

  void check_groups() {
    std::map<PersonId, GroupId> membership;
    for (const auto& g : s_.groups) {
      check_kind(g.id, EntityKind::group);
      if (g.members.empty()) add(name(g.id) + ": no members");
      if (!g.center.allFinite()) add(name(g.id) + ": non-finite centre");
      for (const auto& m : g.members) {
        if (!s_.find_person(m)) add(name(g.id) + ": unknown member " + m.token);
        auto [it, inserted] = membership.emplace(m, g.id);
        if (!inserted) add("person " + m.token + ": member of " + it->second.token + " and " + g.id.token);
      }
    }
  }

  const SceneSnapshot& s_;
  std::vector<std::string> out_;
};

}  // namespace

std::vector<std::string> validate_snapshot(const SceneSnapshot& s) { return Checker(s).run(); }

std::vector<std::string> validate_sequence(const std::vector<SceneSnapshot>& run) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < run.size(); ++i) {
    for (auto& v : validate_snapshot(run[i])) out.push_back("snapshot " + std::to_string(i) + ": " + v);
    if (i > 0 && !(run[i].time > run[i - 1].time))
      out.push_back("snapshot " + std::to_string(i) + ": time does not increase");
  }
  return out;
}

}  // namespace sse
