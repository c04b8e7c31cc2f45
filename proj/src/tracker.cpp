#include "sse/tracker.hpp"

#include "sse/hungarian.hpp"

#include <cmath>
#include <limits>

namespace sse {

namespace {

struct CameraAxes {
  Eigen::Vector3d forward, down, right;
};

CameraAxes axes(const CameraModel& c) {
  const double s = std::sin(c.pitch), co = std::cos(c.pitch);
  return {{co, 0.0, s}, {s, 0.0, -co}, {0.0, -1.0, 0.0}};
}

Eigen::Matrix2d measurement_cov(const TrackerConfig& c) {
  return Eigen::Matrix2d::Identity() * c.measurement_sigma * c.measurement_sigma;
}

bool usable(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.size() > 0 && a.size() == b.size(); }

// Second fix of a new track: finite-difference velocity with its exact covariance.
void initiate_velocity(Track& t, const Vec2d& z, double r) {
  const double T = t.since_fix;
  t.last_innovation = (z - t.state.position()).norm();
  const Vec2d v = (z - t.last_fix) / T;
  t.state.mean << z.x(), z.y(), v.x(), v.y();
  t.state.covariance.setZero();
  for (int axis = 0; axis < 2; ++axis) {
    t.state.covariance(axis, axis) = r;
    t.state.covariance(axis, axis + 2) = t.state.covariance(axis + 2, axis) = r / T;
    t.state.covariance(axis + 2, axis + 2) = 2.0 * r / (T * T);
  }
  t.velocity_initialised = true;
}

Eigen::VectorXd normalised(const Eigen::VectorXd& e) {
  const double n = e.norm();
  return n > 0.0 ? Eigen::VectorXd(e / n) : e;
}

}  // namespace

Vec2d project_to_ground(const Vec2d& feet_pixel, const CameraModel& camera) {
  if (!(camera.height > 0.0) || !(camera.focal > 0.0))
    throw std::invalid_argument("camera: height and focal length must be positive");
  const auto ax = axes(camera);
  const double a = (feet_pixel.y() - camera.principal.y()) / camera.focal;
  const double b = (feet_pixel.x() - camera.principal.x()) / camera.focal;
  const Eigen::Vector3d dir = ax.forward + a * ax.down + b * ax.right;
  if (dir.z() >= 0.0) throw HorizonViolation("project_to_ground: ray at or above the horizon");
  const double t = camera.height / -dir.z();
  return {t * dir.x(), t * dir.y()};
}

std::optional<Vec2d> project_to_image(const Vec2d& point, double height, const CameraModel& camera) {
  const auto ax = axes(camera);
  const Eigen::Vector3d p{point.x(), point.y(), height - camera.height};
  const double depth = p.dot(ax.forward);
  if (depth <= 1e-9) return std::nullopt;
  return Vec2d{camera.principal.x() + camera.focal * p.dot(ax.right) / depth,
               camera.principal.y() + camera.focal * p.dot(ax.down) / depth};
}

std::string_view to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::tentative: return "tentative";
    case TrackStatus::confirmed: return "confirmed";
    case TrackStatus::dead: return "dead";
  }
  return "?";
}

void predict(std::vector<Track>& tracks, double dt, const TrackerConfig& config) {
  if (!(dt > 0.0)) throw std::invalid_argument("predict: dt must be positive");
  for (auto& t : tracks) {
    if (t.status == TrackStatus::dead) continue;
    cv_predict(t.state, dt, config.process_noise);
    t.since_fix += dt;
  }
}

double association_cost(const Track& track, const Detection& det, const TrackerConfig& config) {
  const double m2 = position_mahalanobis2(track.state, det.ground_pos, measurement_cov(config));
  if (!(m2 <= config.gate_chi2)) return forbidden<double>();
  const double appearance = usable(track.embedding, det.embedding) ? 1.0 - track.embedding.dot(det.embedding) : 0.5;
  return config.position_weight * std::sqrt(m2) + (1.0 - config.position_weight) * appearance;
}

AssociationResult associate(const std::vector<Track>& tracks, const std::vector<Detection>& detections,
                            const TrackerConfig& config) {
  const int n = static_cast<int>(tracks.size()), m = static_cast<int>(detections.size());
  Eigen::MatrixXd cost(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      cost(i, j) = tracks[i].status == TrackStatus::dead ? forbidden<double>()
                                                          : association_cost(tracks[i], detections[j], config);
  const auto assignment = hungarian_assign(cost);
  AssociationResult out;
  std::vector<bool> used(m, false);
  for (int i = 0; i < n; ++i) {
    const int j = assignment.row_to_col[i];
    if (j >= 0) {
      out.matches.emplace_back(i, j);
      used[j] = true;
    } else {
      out.unmatched_tracks.push_back(i);
    }
  }
  for (int j = 0; j < m; ++j)
    if (!used[j]) out.unmatched_detections.push_back(j);
  return out;
}

std::optional<MatchCandidate> fuse_doa(std::vector<Track>& tracks, const VoiceObservation& voice,
                                       const Pose2& robot_pose, double now, const TrackerConfig& config) {
  if (!voice.active || !voice.doa_reliable) return std::nullopt;
  Track* best = nullptr;
  double best_abs = std::numeric_limits<double>::infinity();
  for (auto& t : tracks) {
    if (t.status == TrackStatus::dead) continue;
    const double r = std::abs(bearing_residual(t.state, robot_pose, voice.doa));
    if (r <= config.doa_gate && r < best_abs) {
      best_abs = r;
      best = &t;
    }
  }
  if (!best) return std::nullopt;
  const double residual = bearing_update(best->state, robot_pose, voice.doa, config.doa_measurement_sigma);
  best->misses = 0;
  const double s = config.doa_likelihood_sigma;
  return MatchCandidate{best->id, voice.id, std::exp(-residual * residual / (2.0 * s * s)), now};
}

TrackerStep Tracker::step(const std::vector<Detection>& detections, const std::vector<VoiceObservation>& voices,
                          const Pose2& robot_pose, double dt, double now) {
  std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::dead; });
  predict(tracks_, dt, config_);

  TrackerStep out;
  const auto assoc = associate(tracks_, detections, config_);
  const Eigen::Matrix2d r = measurement_cov(config_);
  for (auto [ti, di] : assoc.matches) {
    Track& t = tracks_[ti];
    const Detection& d = detections[di];
    if (t.velocity_initialised) {
      t.last_innovation = position_update(t.state, d.ground_pos, r).norm();
    } else {
      initiate_velocity(t, d.ground_pos, r(0, 0));
    }
    t.last_fix = d.ground_pos;
    t.since_fix = 0.0;
    if (usable(t.embedding, d.embedding)) {
      const double a = config_.embedding_smoothing;
      t.embedding = normalised(a * t.embedding + (1.0 - a) * d.embedding);
    } else if (d.embedding.size() > 0) {
      t.embedding = normalised(d.embedding);
    }
    if (d.orientation) t.orientation = d.orientation;
    t.seated = d.seated;
    ++t.hits;
    t.misses = 0;
    out.detection_to_track[d.source] = t.id;
  }
  for (int ti : assoc.unmatched_tracks) {
    tracks_[ti].hits = 0;
    ++tracks_[ti].misses;
  }

  for (const auto& v : voices)
    if (auto c = fuse_doa(tracks_, v, robot_pose, now, config_)) out.candidates.push_back(*c);

  for (auto& t : tracks_) {
    if (t.misses >= config_.max_misses) t.status = TrackStatus::dead;
    else if (t.status == TrackStatus::tentative && t.hits >= config_.confirm_hits) t.status = TrackStatus::confirmed;
  }

  const double pv = config_.measurement_sigma * config_.measurement_sigma;
  const double vv = config_.initial_velocity_sigma * config_.initial_velocity_sigma;
  for (int di : assoc.unmatched_detections) {
    const Detection& d = detections[di];
    Track t;
    t.id = body_id("body_" + std::to_string(next_id_++));
    t.state.mean << d.ground_pos.x(), d.ground_pos.y(), 0.0, 0.0;
    t.state.covariance = Eigen::Vector4d(pv, pv, vv, vv).asDiagonal();
    if (d.embedding.size() > 0) t.embedding = normalised(d.embedding);
    t.orientation = d.orientation;
    t.seated = d.seated;
    t.last_fix = d.ground_pos;
    t.hits = 1;
    if (t.hits >= config_.confirm_hits) t.status = TrackStatus::confirmed;
    out.detection_to_track[d.source] = t.id;
    tracks_.push_back(std::move(t));
  }
  return out;
}

}  // namespace sse
