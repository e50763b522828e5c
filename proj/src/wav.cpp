#include "festa/wav.hpp"

#include <cstring>

namespace festa::wav {

namespace {

uint32_t read_u32(const uint8_t* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) { return uint16_t(p[0]) | (uint16_t(p[1]) << 8); }

void write_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 24));
}

void write_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

}  // namespace

WavData decode(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw InputError("malformed WAV: missing RIFF/WAVE header");
  }
  WavData wav;
  bool have_fmt = false;
  bool have_data = false;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t chunk_len = read_u32(bytes.data() + pos + 4);
    const size_t body = pos + 8;
    if (body + chunk_len > bytes.size()) {
      throw InputError("malformed WAV: truncated chunk");
    }
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw InputError("malformed WAV: short fmt chunk");
      const uint16_t format = read_u16(bytes.data() + body);
      const uint16_t channels = read_u16(bytes.data() + body + 2);
      const uint32_t rate = read_u32(bytes.data() + body + 4);
      const uint16_t bits = read_u16(bytes.data() + body + 14);
      if (format != 1) throw InputError("unsupported WAV: only PCM (format 1) accepted");
      if (bits != 16) throw InputError("unsupported WAV: only 16-bit samples accepted");
      if (channels != 1 && channels != 2) {
        throw InputError("unsupported WAV: only mono or stereo accepted");
      }
      wav.channels = channels;
      wav.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw InputError("malformed WAV: data before fmt");
      const size_t n = chunk_len / 2;
      wav.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        wav.samples[i] = static_cast<int16_t>(read_u16(bytes.data() + body + 2 * i));
      }
      have_data = true;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || !have_data) throw InputError("malformed WAV: missing fmt or data chunk");
  return wav;
}

std::vector<uint8_t> encode(const WavData& wav) {
  const uint32_t data_len = static_cast<uint32_t>(wav.samples.size() * 2);
  const uint32_t byte_rate = uint32_t(wav.sample_rate) * wav.channels * 2;
  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  write_u32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, uint16_t(wav.channels));
  write_u32(out, uint32_t(wav.sample_rate));
  write_u32(out, byte_rate);
  write_u16(out, uint16_t(wav.channels * 2));  // block align
  write_u16(out, 16);                           // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  write_u32(out, data_len);
  for (int16_t s : wav.samples) write_u16(out, static_cast<uint16_t>(s));
  return out;
}

}  // namespace festa::wav
