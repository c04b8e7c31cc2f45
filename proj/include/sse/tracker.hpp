#pragma once

// Ground-plane multi-person tracker: Kalman prediction, appearance-aware assignment, and
// bearing-only fusion of audio directions of arrival.

#include "sse/association.hpp"
#include "sse/geometry.hpp"
#include "sse/kalman.hpp"
#include "sse/scene.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sse {

// Floor-plane camera geometry ------------------------------------------------------------------

struct HorizonViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pinhole camera on the robot's x axis at `height`, pitched about the lateral axis
/// (negative pitch looks down). Pixel v grows downwards.
struct CameraModel {
  double height = 1.2;
  double pitch = deg2rad(-30.0);
  double focal = 300.0;
  Vec2d principal{640.0, 360.0};
  ImageSize image{1280, 720};
};

/// Robot-frame floor point seen through `feet_pixel`.
Vec2d project_to_ground(const Vec2d& feet_pixel, const CameraModel& camera);
/// Pixel of a robot-frame point at `height` above the floor; nullopt when behind the camera.
std::optional<Vec2d> project_to_image(const Vec2d& point, double height, const CameraModel& camera);

// Tracks ---------------------------------------------------------------------------------------

struct Detection {
  Vec2d ground_pos = Vec2d::Zero();  ///< map frame
  Eigen::VectorXd embedding;
  double confidence = 1.0;
  std::string source;  ///< detection id, rewritten to the track id once associated
  std::optional<double> orientation;
  bool seated = false;
};

enum class TrackStatus { tentative, confirmed, dead };
std::string_view to_string(TrackStatus s);

struct Track {
  FeatureId id;
  CvState<double> state;
  Eigen::VectorXd embedding;
  int hits = 0;    ///< consecutive visual matches
  int misses = 0;  ///< consecutive ticks without any update
  TrackStatus status = TrackStatus::tentative;
  std::optional<double> orientation;
  bool seated = false;
  double last_innovation = 0.0;
  /// Two-point initiation: velocity is set from the first two visual fixes.
  bool velocity_initialised = false;
  Vec2d last_fix = Vec2d::Zero();
  double since_fix = 0.0;
};

struct TrackerConfig {
  /// Weight of the Mahalanobis term; 1 - weight goes to appearance distance.
  double position_weight = 0.3;
  /// chi-square(2 dof, 0.99).
  double gate_chi2 = 9.2103;
  int confirm_hits = 3;
  int max_misses = 5;
  double process_noise = 0.1;       ///< white-acceleration density, m^2/s^3
  double measurement_sigma = 0.1;   ///< m
  double initial_velocity_sigma = 1.0;
  double embedding_smoothing = 0.9;
  double doa_gate = deg2rad(15.0);
  double doa_likelihood_sigma = deg2rad(10.0);
  double doa_measurement_sigma = deg2rad(5.0);
};

void predict(std::vector<Track>& tracks, double dt, const TrackerConfig& config = {});

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;  ///< (track index, detection index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

/// Association cost of one pair, +inf when outside the gate.
double association_cost(const Track& track, const Detection& det, const TrackerConfig& config = {});
AssociationResult associate(const std::vector<Track>& tracks, const std::vector<Detection>& detections,
                            const TrackerConfig& config = {});

/// Bearing update of the track nearest to the direction of arrival, if within the gate.
/// Returns the emitted body-voice candidate. Unreliable or inactive voices are ignored.
std::optional<MatchCandidate> fuse_doa(std::vector<Track>& tracks, const VoiceObservation& voice,
                                       const Pose2& robot_pose, double now, const TrackerConfig& config = {});

struct TrackerStep {
  std::vector<MatchCandidate> candidates;
  /// Detection source id -> track id for this tick's visual matches and new tracks.
  std::map<std::string, FeatureId> detection_to_track;
};

class Tracker {
 public:
  explicit Tracker(TrackerConfig config = {}) : config_(config) {}

  /// predict, associate, update, fuse DOA, lifecycle, spawn. Audio never creates tracks.
  TrackerStep step(const std::vector<Detection>& detections, const std::vector<VoiceObservation>& voices,
                   const Pose2& robot_pose, double dt, double now);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
};

}  // namespace sse
