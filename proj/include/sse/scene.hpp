#pragma once

#include "sse/geometry.hpp"

#include <Eigen/Core>

#include <compare>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sse {

enum class EntityKind { face, body, voice, person, group };

std::string_view to_string(EntityKind kind);
/// Throws std::invalid_argument on an unknown name.
EntityKind entity_kind_from_string(std::string_view name);

inline bool is_feature(EntityKind k) {
  return k == EntityKind::face || k == EntityKind::body || k == EntityKind::voice;
}

/// Identifier of any entity. Feature ids are transient; person ids persist within a run.
struct EntityId {
  EntityKind kind = EntityKind::person;
  std::string token;

  friend auto operator<=>(const EntityId&, const EntityId&) = default;
  friend bool operator==(const EntityId&, const EntityId&) = default;
};

using FeatureId = EntityId;
using PersonId = EntityId;
using GroupId = EntityId;

inline EntityId face_id(std::string t) { return {EntityKind::face, std::move(t)}; }
inline EntityId body_id(std::string t) { return {EntityKind::body, std::move(t)}; }
inline EntityId voice_id(std::string t) { return {EntityKind::voice, std::move(t)}; }
inline EntityId person_id(std::string t) { return {EntityKind::person, std::move(t)}; }
inline EntityId group_id(std::string t) { return {EntityKind::group, std::move(t)}; }

/// Axis-aligned image rectangle in pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return x + width; }
  double bottom() const { return y + height; }
  double area() const { return width * height; }
};

/// Fraction of `inner` covered by `outer`.
double coverage(const BBox& inner, const BBox& outer);

struct FaceObservation {
  FeatureId id;
  BBox bbox;
  Eigen::VectorXd embedding;
  double confidence = 1.0;
};

struct BodyObservation {
  FeatureId id;
  BBox bbox;
  Vec2d feet_pixel = Vec2d::Zero();
  std::optional<Vec2d> ground_pos;
  std::optional<double> orientation;
  Eigen::VectorXd embedding;
  /// Filled by the tracker; zero for a fresh detection.
  Vec2d velocity = Vec2d::Zero();
  bool seated = false;
};

inline constexpr int kVoiceEmbeddingDim = 192;

struct VoiceObservation {
  FeatureId id;
  double doa = 0.0;  ///< radians relative to robot heading, frontal array
  bool active = false;
  bool doa_reliable = true;
  Eigen::VectorXd embedding;
};

struct PersonRecord {
  PersonId id;
  std::optional<FeatureId> face;
  std::optional<FeatureId> body;
  std::optional<FeatureId> voice;
  bool anonymous = true;

  friend bool operator==(const PersonRecord&, const PersonRecord&) = default;
};

struct GroupRecord {
  GroupId id;
  std::set<PersonId> members;
  Vec2d center = Vec2d::Zero();
};

struct RobotState {
  Pose2 pose;
  double v = 0.0;
  double omega = 0.0;
  bool speaking = false;
};

struct ImageSize {
  int width = 1280;
  int height = 720;
};

struct SceneSnapshot {
  double time = 0.0;
  ImageSize image;
  std::vector<FaceObservation> faces;
  std::vector<BodyObservation> bodies;
  std::vector<VoiceObservation> voices;
  std::vector<PersonRecord> persons;
  std::vector<GroupRecord> groups;
  RobotState robot;
  /// Features that persons may still reference after they stopped being observed.
  std::set<FeatureId> stale;

  const BodyObservation* find_body(const FeatureId& id) const;
  const VoiceObservation* find_voice(const FeatureId& id) const;
  const PersonRecord* find_person(const PersonId& id) const;
};

/// Lists every invariant violation in `s`; empty iff the snapshot is valid.
std::vector<std::string> validate_snapshot(const SceneSnapshot& s);

/// Violations for a sequence: each snapshot plus strictly increasing timestamps.
std::vector<std::string> validate_sequence(const std::vector<SceneSnapshot>& run);

}  // namespace sse
