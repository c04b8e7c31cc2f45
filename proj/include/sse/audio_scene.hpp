#pragma once

// Synthetic far-field recordings for the two-microphone array.

#include "sse/doa.hpp"

#include <array>
#include <complex>
#include <random>
#include <span>
#include <vector>

namespace sse {

struct AudioSource {
  double doa = 0.0;  ///< radians, positive towards the left microphone
  double gain = 1.0;
};

using StereoFrame = std::array<std::vector<double>, 2>;

/// White-noise sources delayed per microphone (exact fractional delays in frequency), plus
/// independent sensor noise at `snr_db` relative to the mixed signal power.
template <typename Rng>
StereoFrame synthesize_stereo(std::span<const AudioSource> sources, const MicPairGeometry& geom, int length,
                              double snr_db, Rng& rng) {
  using Complex = std::complex<double>;
  const int guard = 64;
  const int m = length + 2 * guard;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::FFT<double> fft;

  std::array<std::vector<double>, 2> mix{std::vector<double>(length, 0.0), std::vector<double>(length, 0.0)};
  for (const auto& src : sources) {
    std::vector<double> s(m);
    for (auto& v : s) v = gauss(rng) * src.gain;
    std::vector<Complex> spec;
    fft.fwd(spec, s);
    spec.resize(m);
    for (int k = m / 2 + 1; k < m; ++k) spec[k] = std::conj(spec[m - k]);
    // Left mic at +d/2 on the lateral axis hears the source d sin(doa) / c earlier than the right.
    const double half = 0.5 * geom.spacing * std::sin(src.doa) / geom.speed_of_sound;
    const double delays[2] = {-half, half};
    for (int ch = 0; ch < 2; ++ch) {
      std::vector<Complex> shifted(m);
      for (int k = 0; k < m; ++k) {
        const int signed_k = k <= m / 2 ? k : k - m;
        const double omega = 2.0 * std::numbers::pi * signed_k / m * geom.sample_rate;
        shifted[k] = spec[k] * std::polar(1.0, -omega * delays[ch]);
      }
      if (m % 2 == 0) shifted[m / 2] = Complex(shifted[m / 2].real(), 0.0);
      std::vector<Complex> out;
      fft.inv(out, shifted);
      for (int i = 0; i < length; ++i) mix[ch][i] += out[guard + i].real();
    }
  }

  double power = 0.0;
  for (const auto& ch : mix)
    for (double v : ch) power += v * v;
  power /= 2.0 * length;
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  for (auto& ch : mix)
    for (auto& v : ch) v += sigma * gauss(rng);
  return mix;
}

}  // namespace sse
