#include "sse/doa.hpp"

namespace sse {

std::vector<DoaFrame> track_doa(std::span<const double> left, std::span<const double> right,
                                const MicPairGeometry& geom, int frame_length, int hop, double vad_threshold_db,
                                const GccPhatOptions& options) {
  if (left.size() != right.size()) throw std::invalid_argument("track_doa: channels differ in length");
  if (frame_length <= 0 || hop <= 0) throw std::invalid_argument("track_doa: frame length and hop must be positive");
  std::vector<DoaFrame> frames;
  for (std::size_t start = 0; start + frame_length <= left.size(); start += hop) {
    const auto l = left.subspan(start, frame_length);
    const auto r = right.subspan(start, frame_length);
    DoaFrame f;
    f.time = static_cast<double>(start) / geom.sample_rate;
    f.active = voice_active(l, vad_threshold_db) || voice_active(r, vad_threshold_db);
    try {
      f.tdoa = gcc_phat(l, r, geom, options, f.time);
      f.doa = tdoa_to_doa(f.tdoa.tau, geom);
    } catch (const DegenerateSignal&) {
      f.tdoa.frame_time = f.time;
      f.tdoa.reliable = false;
    }
    frames.push_back(f);
  }
  return frames;
}

}  // namespace sse
