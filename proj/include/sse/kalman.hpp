#pragma once

// Constant-velocity Kalman filter on the ground plane, state (x, y, vx, vy).

#include "sse/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace sse {

template <typename Scalar>
struct CvState {
  using Vector = Eigen::Matrix<Scalar, 4, 1>;
  using Matrix = Eigen::Matrix<Scalar, 4, 4>;
  Vector mean = Vector::Zero();
  Matrix covariance = Matrix::Identity();

  Vec2<Scalar> position() const { return mean.template head<2>(); }
  Vec2<Scalar> velocity() const { return mean.template tail<2>(); }
};

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> cv_transition(Scalar dt) {
  Eigen::Matrix<Scalar, 4, 4> f = Eigen::Matrix<Scalar, 4, 4>::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

/// Discretised continuous white-acceleration noise with spectral density q. Exact for the
/// continuous model, so two steps of dt/2 compose to one step of dt.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> cv_process_noise(Scalar dt, Scalar q) {
  const Scalar dt2 = dt * dt, dt3 = dt2 * dt;
  Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    m(axis, axis) = q * dt3 / 3;
    m(axis, axis + 2) = m(axis + 2, axis) = q * dt2 / 2;
    m(axis + 2, axis + 2) = q * dt;
  }
  return m;
}

template <typename Scalar>
void cv_predict(CvState<Scalar>& s, Scalar dt, Scalar q) {
  const auto f = cv_transition(dt);
  s.mean = f * s.mean;
  s.covariance = f * s.covariance * f.transpose() + cv_process_noise(dt, q);
  s.covariance = Scalar(0.5) * (s.covariance + s.covariance.transpose()).eval();
}

/// Innovation covariance of a position measurement.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> position_innovation_cov(const CvState<Scalar>& s, const Eigen::Matrix<Scalar, 2, 2>& r) {
  return s.covariance.template topLeftCorner<2, 2>() + r;
}

/// Squared Mahalanobis distance of a position measurement from the prediction.
template <typename Scalar>
Scalar position_mahalanobis2(const CvState<Scalar>& s, const Vec2<Scalar>& z, const Eigen::Matrix<Scalar, 2, 2>& r) {
  const Vec2<Scalar> nu = z - s.position();
  return nu.dot(position_innovation_cov(s, r).ldlt().solve(nu));
}

/// Generic linear(ised) update in Joseph form; returns the innovation.
template <typename Scalar, int M>
Eigen::Matrix<Scalar, M, 1> kalman_update(CvState<Scalar>& s, const Eigen::Matrix<Scalar, M, 4>& h,
                                          const Eigen::Matrix<Scalar, M, 1>& innovation,
                                          const Eigen::Matrix<Scalar, M, M>& r) {
  using Mat4 = Eigen::Matrix<Scalar, 4, 4>;
  const Eigen::Matrix<Scalar, M, M> innov_cov = h * s.covariance * h.transpose() + r;
  const Eigen::Matrix<Scalar, 4, M> gain =
      innov_cov.ldlt().solve(h * s.covariance.transpose()).transpose();
  s.mean += gain * innovation;
  const Mat4 ikh = Mat4::Identity() - gain * h;
  s.covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
  s.covariance = Scalar(0.5) * (s.covariance + s.covariance.transpose()).eval();
  return innovation;
}

template <typename Scalar>
Vec2<Scalar> position_update(CvState<Scalar>& s, const Vec2<Scalar>& z, const Eigen::Matrix<Scalar, 2, 2>& r) {
  Eigen::Matrix<Scalar, 2, 4> h = Eigen::Matrix<Scalar, 2, 4>::Zero();
  h(0, 0) = h(1, 1) = 1;
  return kalman_update<Scalar, 2>(s, h, z - s.position(), r);
}

/// Bearing residual (measured minus predicted) of the track seen from `sensor`.
template <typename Scalar>
Scalar bearing_residual(const CvState<Scalar>& s, const Pose2& sensor, Scalar measured) {
  return wrap_angle<Scalar>(measured - static_cast<Scalar>(bearing_from(sensor, s.position().template cast<double>())));
}

/// Linearised bearing-only update (atan2 observation from `sensor`).
template <typename Scalar>
Scalar bearing_update(CvState<Scalar>& s, const Pose2& sensor, Scalar measured, Scalar sigma) {
  const Scalar dx = s.mean(0) - Scalar(sensor.x), dy = s.mean(1) - Scalar(sensor.y);
  const Scalar r2 = std::max(dx * dx + dy * dy, Scalar(1e-6));
  Eigen::Matrix<Scalar, 1, 4> h = Eigen::Matrix<Scalar, 1, 4>::Zero();
  h(0, 0) = -dy / r2;
  h(0, 1) = dx / r2;
  const Scalar residual = bearing_residual(s, sensor, measured);
  Eigen::Matrix<Scalar, 1, 1> nu, r;
  nu << residual;
  r << sigma * sigma;
  kalman_update<Scalar, 1>(s, h, nu, r);
  return residual;
}

/// Smallest eigenvalue of the (symmetric) covariance.
template <typename Scalar>
Scalar min_eigenvalue(const Eigen::Matrix<Scalar, 4, 4>& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 4, 4>> es(p, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace sse
