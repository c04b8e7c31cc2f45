#pragma once

// Two-microphone time difference of arrival by GCC-PHAT, its far-field direction of arrival,
// and an energy voice-activity gate.
//
// Channel convention: `x` is the left microphone, `y` the right one, both on the robot's lateral
// axis. A positive delay means the sound reached the left microphone first, which maps to a
// positive (counter-clockwise) direction of arrival.

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sse {

struct DegenerateSignal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MicPairGeometry {
  double spacing = 0.1;          ///< metres
  double speed_of_sound = 343.0;  ///< m/s
  double sample_rate = 16000.0;  ///< Hz

  double max_delay() const { return spacing / speed_of_sound; }
  void validate() const {
    if (!(spacing > 0.0) || !(speed_of_sound > 0.0) || !(sample_rate > 0.0))
      throw std::invalid_argument("mic geometry: spacing, speed of sound and sample rate must be positive");
  }
};

struct GccPhatOptions {
  /// Upsampling of the correlation before parabolic peak refinement.
  int interpolation = 8;
  /// Mean-square energy below which a frame is degenerate.
  double energy_floor = 1e-12;
  /// Second/first peak ratio above which the frame is flagged unreliable.
  double reliability_ratio = 0.7;
  std::size_t min_length = 256;
};

inline constexpr int kDefaultFrameLength = 1024;
inline constexpr int kDefaultFrameHop = 512;

struct TdoaEstimate {
  double tau = 0.0;         ///< seconds, positive when y lags x
  double peak_value = 0.0;  ///< PHAT-weighted correlation at the peak, 1 for a pure delay
  double frame_time = 0.0;
  double second_peak_ratio = 0.0;
  bool reliable = true;
};

namespace detail {

template <typename Scalar>
Scalar mean_square(std::span<const Scalar> s) {
  Scalar acc = 0;
  for (Scalar v : s) acc += v * v;
  return s.empty() ? Scalar(0) : acc / Scalar(s.size());
}

}  // namespace detail

template <typename Scalar>
TdoaEstimate gcc_phat(std::span<const Scalar> x, std::span<const Scalar> y, const MicPairGeometry& geom,
                      const GccPhatOptions& options = {}, double frame_time = 0.0) {
  using Complex = std::complex<Scalar>;
  geom.validate();
  if (x.size() != y.size()) throw std::invalid_argument("gcc_phat: frames differ in length");
  if (x.size() < options.min_length)
    throw std::invalid_argument("gcc_phat: frame shorter than " + std::to_string(options.min_length));
  if (detail::mean_square(x) < options.energy_floor || detail::mean_square(y) < options.energy_floor)
    throw DegenerateSignal("gcc_phat: frame energy below floor");

  const int n = static_cast<int>(x.size());
  const int nfft = 2 * n;
  const int r = std::max(1, options.interpolation);
  const int nup = nfft * r;

  std::vector<Scalar> xp(nfft, Scalar(0)), yp(nfft, Scalar(0));
  std::copy(x.begin(), x.end(), xp.begin());
  std::copy(y.begin(), y.end(), yp.begin());

  Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::Unscaled);
  std::vector<Complex> spec_x, spec_y;
  fft.fwd(spec_x, xp);
  fft.fwd(spec_y, yp);
  if (static_cast<int>(spec_x.size()) != nfft) {  // half-spectrum backends
    spec_x.resize(nfft);
    spec_y.resize(nfft);
    for (int k = nfft / 2 + 1; k < nfft; ++k) {
      spec_x[k] = std::conj(spec_x[nfft - k]);
      spec_y[k] = std::conj(spec_y[nfft - k]);
    }
  }

  // Phase transform, zero-padded in frequency to interpolate the correlation.
  std::vector<Complex> cross(nup, Complex(0));
  for (int k = 0; k < nfft; ++k) {
    Complex g = spec_x[k] * std::conj(spec_y[k]);
    const Scalar mag = std::abs(g);
    g = mag > std::numeric_limits<Scalar>::min() ? g / mag : Complex(0);
    if (k < nfft / 2) {
      cross[k] = g;
    } else if (k == nfft / 2) {
      cross[k] = g / Scalar(2);
      cross[nup - nfft / 2] = g / Scalar(2);
    } else {
      cross[nup - (nfft - k)] = g;
    }
  }
  std::vector<Complex> cc_complex;
  fft.inv(cc_complex, cross);
  // Unscaled inverse: a pure delay peaks at nfft.
  auto cc = [&](int lag) { return cc_complex[((lag % nup) + nup) % nup].real() / Scalar(nfft); };

  // X conj(Y) peaks at lag -D when y lags x by D; search the physical window only.
  const int max_lag = static_cast<int>(std::floor(geom.max_delay() * geom.sample_rate * r));
  int best = 0;
  Scalar best_val = -std::numeric_limits<Scalar>::infinity();
  for (int lag = -max_lag; lag <= max_lag; ++lag)
    if (cc(lag) > best_val) {
      best_val = cc(lag);
      best = lag;
    }

  Scalar second = 0;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    if (lag == best) continue;
    const Scalar v = cc(lag);
    if (v > cc(lag - 1) && v >= cc(lag + 1)) second = std::max(second, v);
  }

  const Scalar left = cc(best - 1), mid = best_val, right = cc(best + 1);
  const Scalar denom = left - 2 * mid + right;
  Scalar offset = 0;
  if (denom < 0) offset = std::clamp(Scalar(0.5) * (left - right) / denom, Scalar(-0.5), Scalar(0.5));

  TdoaEstimate est;
  const double limit = geom.max_delay() + 1.0 / geom.sample_rate;
  est.tau = std::clamp(-(static_cast<double>(best) + static_cast<double>(offset)) / (r * geom.sample_rate),
                       -limit, limit);
  est.peak_value = static_cast<double>(mid);
  est.frame_time = frame_time;
  est.second_peak_ratio = mid > 0 ? static_cast<double>(std::max(Scalar(0), second) / mid) : 1.0;
  est.reliable = est.second_peak_ratio <= options.reliability_ratio;
  return est;
}

template <typename Scalar>
TdoaEstimate gcc_phat(const std::vector<Scalar>& x, const std::vector<Scalar>& y, const MicPairGeometry& geom,
                      const GccPhatOptions& options = {}, double frame_time = 0.0) {
  return gcc_phat(std::span<const Scalar>(x), std::span<const Scalar>(y), geom, options, frame_time);
}

/// Far-field direction of arrival, 0 at broadside; |c tau / d| up to 1 + eps is clamped.
inline double tdoa_to_doa(double tau, const MicPairGeometry& geom, double eps = 0.02) {
  geom.validate();
  const double s = geom.speed_of_sound * tau / geom.spacing;
  if (!(std::abs(s) <= 1.0 + eps)) throw OutOfRange("tdoa_to_doa: |c tau / d| = " + std::to_string(std::abs(s)));
  return std::asin(std::clamp(s, -1.0, 1.0));
}

/// Frame RMS in dB relative to full scale 1.0; -inf for silence.
template <typename Scalar>
double frame_dbfs(std::span<const Scalar> frame) {
  const double ms = static_cast<double>(detail::mean_square(frame));
  if (ms <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ms);
}

template <typename Scalar>
bool voice_active(std::span<const Scalar> frame, double threshold_db) {
  return frame_dbfs(frame) >= threshold_db;
}

template <typename Scalar>
bool voice_active(const std::vector<Scalar>& frame, double threshold_db) {
  return voice_active(std::span<const Scalar>(frame), threshold_db);
}

struct DoaFrame {
  double time = 0.0;
  TdoaEstimate tdoa;
  double doa = 0.0;
  bool active = false;
};

/// Frames a stereo recording and estimates tau and DOA per frame. Silent frames are marked
/// inactive and unreliable rather than raising.
std::vector<DoaFrame> track_doa(std::span<const double> left, std::span<const double> right,
                                const MicPairGeometry& geom, int frame_length = kDefaultFrameLength,
                                int hop = kDefaultFrameHop, double vad_threshold_db = -50.0,
                                const GccPhatOptions& options = {});

}  // namespace sse
