#include "sse/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sse {

namespace {

std::uint32_t u32(const unsigned char* p) { return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24); }
std::uint16_t u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put32(std::ofstream& os, std::uint32_t v) {
  const char b[4] = {char(v & 0xff), char(v >> 8 & 0xff), char(v >> 16 & 0xff), char(v >> 24 & 0xff)};
  os.write(b, 4);
}
void put16(std::ofstream& os, std::uint16_t v) {
  const char b[2] = {char(v & 0xff), char(v >> 8 & 0xff)};
  os.write(b, 2);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw WavError(path.string() + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  for (std::size_t pos = 12; pos + 8 <= buf.size();) {
    const unsigned char* chunk = buf.data() + pos;
    const std::size_t size = u32(chunk + 4);
    if (pos + 8 + size > buf.size()) throw WavError(path.string() + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0 && size >= 16) {
      format = u16(chunk + 8);
      channels = u16(chunk + 10);
      rate = u32(chunk + 12);
      bits = u16(chunk + 22);
      if (format == kFormatExtensible && size >= 26) format = u16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1);
  }
  if (!data || channels == 0 || rate == 0) throw WavError(path.string() + ": missing fmt or data chunk");
  const int bytes = bits / 8;
  if (!((format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32)) ||
        (format == kFormatFloat && (bits == 32 || bits == 64))))
    throw WavError(path.string() + ": unsupported sample format");

  WavData out;
  out.sample_rate = static_cast<int>(rate);
  out.channels.assign(channels, {});
  const std::size_t frames = data_size / (bytes * channels);
  for (auto& c : out.channels) c.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f)
    for (int c = 0; c < channels; ++c) {
      const unsigned char* s = data + (f * channels + c) * bytes;
      double v = 0.0;
      if (format == kFormatFloat && bits == 32) {
        float x;
        std::memcpy(&x, s, 4);
        v = x;
      } else if (format == kFormatFloat) {
        std::memcpy(&v, s, 8);
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(u16(s)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t x = s[0] | (s[1] << 8) | (s[2] << 16);
        if (x & 0x800000) x -= 0x1000000;
        v = x / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(u32(s)) / 2147483648.0;
      }
      out.channels[c].push_back(v);
    }
  return out;
}

void write_wav(const std::filesystem::path& path, const WavData& data) {
  if (data.channels.empty()) throw WavError("write_wav: no channels");
  const std::size_t frames = data.channels[0].size();
  for (const auto& c : data.channels)
    if (c.size() != frames) throw WavError("write_wav: channel lengths differ");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw WavError("cannot write " + path.string());
  const auto nch = static_cast<std::uint16_t>(data.channels.size());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * nch * 2);
  os.write("RIFF", 4);
  put32(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  put32(os, 16);
  put16(os, kFormatPcm);
  put16(os, nch);
  put32(os, static_cast<std::uint32_t>(data.sample_rate));
  put32(os, static_cast<std::uint32_t>(data.sample_rate) * nch * 2);
  put16(os, static_cast<std::uint16_t>(nch * 2));
  put16(os, 16);
  os.write("data", 4);
  put32(os, data_bytes);
  for (std::size_t f = 0; f < frames; ++f)
    for (const auto& c : data.channels) {
      const double v = std::clamp(c[f], -1.0, 32767.0 / 32768.0);
      put16(os, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(v * 32768.0))));
    }
}

}  // namespace sse
