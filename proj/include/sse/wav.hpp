#pragma once

// Minimal RIFF/WAVE reader and writer (PCM 16/24/32-bit integer and IEEE float 32/64).

#include <filesystem>
#include <stdexcept>
#include <vector>

namespace sse {

struct WavError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WavData {
  int sample_rate = 16000;
  /// One vector per channel, samples scaled to [-1, 1].
  std::vector<std::vector<double>> channels;
};

WavData read_wav(const std::filesystem::path& path);
/// Writes 16-bit PCM; all channels must have equal length.
void write_wav(const std::filesystem::path& path, const WavData& data);

}  // namespace sse
