#pragma once

#include <cstdint>
#include <vector>

#include "festa/errors.hpp"

namespace festa::wav {

// 16-bit PCM audio, interleaved frames.
struct WavData {
  int sample_rate = 16000;
  int channels = 1;
  std::vector<int16_t> samples;  // frame-major, channel-interleaved

  int64_t frame_count() const {
    return channels == 0 ? 0 : static_cast<int64_t>(samples.size()) / channels;
  }
  double duration_s() const {
    return sample_rate == 0 ? 0.0 : static_cast<double>(frame_count()) / sample_rate;
  }
};

// Parses a RIFF/WAVE container holding 16-bit PCM (mono or stereo).
// Throws InputError on anything else.
WavData decode(const std::vector<uint8_t>& bytes);

// Canonical 44-byte-header PCM16 encoding.
std::vector<uint8_t> encode(const WavData& wav);

}  // namespace festa::wav
