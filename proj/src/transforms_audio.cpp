#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "festa/rng.hpp"
#include "festa/transforms.hpp"

namespace festa::transforms {

namespace fs = std::filesystem;
using wav::WavData;

namespace {

double param(const TransformSpec& spec, const std::string& key, double fallback) {
  const auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

bool has_param(const TransformSpec& spec, const std::string& key) {
  return spec.params.count(key) != 0;
}

int64_t to_frame(double seconds, int rate, int64_t max_frame) {
  const int64_t f = static_cast<int64_t>(std::llround(seconds * rate));
  return std::clamp<int64_t>(f, 0, max_frame);
}

// Frame range [begin, end) of one segment, interleaved-sample indices.
struct FrameRange {
  int64_t begin = 0;
  int64_t end = 0;
};

FrameRange segment_frames(const EventSegment& seg, const WavData& audio) {
  const int64_t frames = audio.frame_count();
  return {to_frame(seg.start_s, audio.sample_rate, frames),
          to_frame(seg.end_s, audio.sample_rate, frames)};
}

void append_frames(std::vector<int16_t>& out, const WavData& src, int64_t begin,
                   int64_t end) {
  out.insert(out.end(), src.samples.begin() + begin * src.channels,
             src.samples.begin() + end * src.channels);
}

int16_t scale_sample(int16_t s, double gain) {
  const double v = std::llround(double(s) * gain);
  return static_cast<int16_t>(std::clamp<double>(v, -32768.0, 32767.0));
}

// Fits a library snippet into exactly n frames of the target layout
// (truncate or tile), adapting channel count.
std::vector<int16_t> fit_event(const WavData& snippet, int64_t n_frames, int channels) {
  std::vector<int16_t> out;
  out.reserve(n_frames * channels);
  const int64_t src_frames = snippet.frame_count();
  if (src_frames == 0) return std::vector<int16_t>(n_frames * channels, 0);
  for (int64_t f = 0; f < n_frames; ++f) {
    const int64_t sf = f % src_frames;
    for (int ch = 0; ch < channels; ++ch) {
      const int src_ch = snippet.channels == 1 ? 0 : std::min(ch, snippet.channels - 1);
      out.push_back(snippet.samples[sf * snippet.channels + src_ch]);
    }
  }
  return out;
}

std::vector<int16_t> synth_tone(double hz, int64_t n_frames, int rate, int channels) {
  std::vector<int16_t> out;
  out.reserve(n_frames * channels);
  for (int64_t f = 0; f < n_frames; ++f) {
    const double v = 0.3 * 32767.0 * std::sin(2.0 * M_PI * hz * double(f) / rate);
    const auto s = static_cast<int16_t>(std::llround(v));
    for (int ch = 0; ch < channels; ++ch) out.push_back(s);
  }
  return out;
}

AudioTransformResult insert_silence(const WavData& audio,
                                    const std::vector<EventSegment>& segments,
                                    const TransformSpec& spec) {
  const double duration = param(spec, "duration_s", 0.0);
  if (duration < 0.0) throw ConfigError("insert_silence duration_s must be >= 0");
  AudioTransformResult res{audio, segments};
  if (duration == 0.0) return res;

  // gap_index g inserts right after segment g; position_frac is the
  // fallback when the instance has no annotations.
  int64_t at_frame;
  if (has_param(spec, "gap_index")) {
    const auto gap = static_cast<size_t>(param(spec, "gap_index", 0));
    if (segments.empty() || gap >= segments.size()) {
      throw ConfigError("insert_silence gap_index out of range");
    }
    at_frame = segment_frames(segments[gap], audio).end;
  } else {
    const double frac = param(spec, "position_frac", 0.5);
    at_frame = to_frame(frac * audio.duration_s(), audio.sample_rate, audio.frame_count());
  }

  const int64_t n = static_cast<int64_t>(std::llround(duration * audio.sample_rate));
  res.audio.samples.insert(res.audio.samples.begin() + at_frame * audio.channels,
                           static_cast<size_t>(n) * audio.channels, 0);
  const double at_s = double(at_frame) / audio.sample_rate;
  const double shift = double(n) / audio.sample_rate;
  for (auto& seg : res.segments) {
    if (seg.start_s >= at_s) {
      seg.start_s += shift;
      seg.end_s += shift;
    }
  }
  return res;
}

AudioTransformResult adjust_volume(const WavData& audio,
                                   const std::vector<EventSegment>& segments,
                                   const TransformSpec& spec) {
  AudioTransformResult res{audio, segments};
  if (segments.empty()) {
    const double gain = param(spec, "gain", 1.0);
    for (auto& s : res.audio.samples) s = scale_sample(s, gain);
    return res;
  }
  for (size_t i = 0; i < segments.size(); ++i) {
    const double gain = param(spec, "gain" + std::to_string(i), 1.0);
    if (gain == 1.0) continue;
    const auto [begin, end] = segment_frames(segments[i], audio);
    for (int64_t s = begin * audio.channels; s < end * audio.channels; ++s) {
      res.audio.samples[s] = scale_sample(res.audio.samples[s], gain);
    }
  }
  return res;
}

AudioTransformResult swap_events(const WavData& audio,
                                 const std::vector<EventSegment>& segments,
                                 const TransformSpec& spec) {
  const size_t n = segments.size();
  if (n < 2) throw InputError("swap_events requires at least 2 segments");
  std::vector<size_t> perm(n);
  bool identity = true;
  for (size_t i = 0; i < n; ++i) {
    perm[i] = static_cast<size_t>(param(spec, "perm" + std::to_string(i), double(i)));
    if (perm[i] >= n) throw ConfigError("swap_events permutation index out of range");
    if (perm[i] != i) identity = false;
  }
  {
    std::vector<size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < n; ++i) {
      if (sorted[i] != i) throw ConfigError("swap_events params are not a permutation");
    }
  }
  if (identity) throw ConfigError("swap_events permutation must reorder events");

  // Keep inter-event gaps; lay the permuted event audio between them.
  std::vector<FrameRange> ranges(n);
  for (size_t i = 0; i < n; ++i) ranges[i] = segment_frames(segments[i], audio);

  AudioTransformResult res;
  res.audio.sample_rate = audio.sample_rate;
  res.audio.channels = audio.channels;
  auto& out = res.audio.samples;
  int64_t cursor = 0;  // frames emitted so far
  for (size_t i = 0; i < n; ++i) {
    const int64_t gap_begin = i == 0 ? 0 : ranges[i - 1].end;
    append_frames(out, audio, gap_begin, ranges[i].begin);
    cursor += ranges[i].begin - gap_begin;
    const FrameRange& src = ranges[perm[i]];
    append_frames(out, audio, src.begin, src.end);
    EventSegment seg;
    seg.label = segments[perm[i]].label;
    seg.start_s = double(cursor) / audio.sample_rate;
    cursor += src.end - src.begin;
    seg.end_s = double(cursor) / audio.sample_rate;
    res.segments.push_back(seg);
  }
  append_frames(out, audio, ranges[n - 1].end, audio.frame_count());
  return res;
}

AudioTransformResult add_event(const WavData& audio,
                               const std::vector<EventSegment>& segments,
                               const TransformSpec& spec, const EventLibrary* library) {
  if (segments.empty()) throw InputError("add_event requires segment annotations");
  const double duration = param(spec, "duration_s", 0.5);
  const bool at_end = param(spec, "position", 1.0) >= 0.5;
  const int64_t n_frames =
      static_cast<int64_t>(std::llround(duration * audio.sample_rate));
  const int64_t gap_frames = audio.sample_rate / 5;  // 0.2 s separation

  std::string label;
  std::vector<int16_t> event;
  if (library != nullptr && !library->empty()) {
    std::vector<std::string> present;
    for (const auto& s : segments) present.push_back(s.label);
    std::vector<std::string> eligible;
    for (const auto& l : library->labels()) {
      if (std::find(present.begin(), present.end(), l) == present.end()) {
        eligible.push_back(l);
      }
    }
    if (!eligible.empty()) {
      rng::Stream stream(rng::derive(spec.seed, "add-event-pick"));
      label = eligible[static_cast<size_t>(
          stream.uniform_int(0, static_cast<int64_t>(eligible.size()) - 1))];
      event = fit_event(library->get(label), n_frames, audio.channels);
    }
  }
  if (event.empty()) {
    const double hz = param(spec, "tone_hz", 440.0);
    label = "tone" + std::to_string(static_cast<int>(hz));
    event = synth_tone(hz, n_frames, audio.sample_rate, audio.channels);
  }

  AudioTransformResult res{audio, segments};
  const double dur_s = double(n_frames) / audio.sample_rate;
  const double gap_s = double(gap_frames) / audio.sample_rate;
  if (at_end) {
    const double start = res.audio.duration_s() + gap_s;
    res.audio.samples.insert(res.audio.samples.end(),
                             static_cast<size_t>(gap_frames) * audio.channels, 0);
    res.audio.samples.insert(res.audio.samples.end(), event.begin(), event.end());
    res.segments.push_back({label, start, start + dur_s});
  } else {
    std::vector<int16_t> head = std::move(event);
    head.insert(head.end(), static_cast<size_t>(gap_frames) * audio.channels, 0);
    res.audio.samples.insert(res.audio.samples.begin(), head.begin(), head.end());
    const double shift = dur_s + gap_s;
    for (auto& seg : res.segments) {
      seg.start_s += shift;
      seg.end_s += shift;
    }
    res.segments.insert(res.segments.begin(), {label, 0.0, dur_s});
  }
  return res;
}

AudioTransformResult replace_extremal_event(const WavData& audio,
                                            const std::vector<EventSegment>& segments,
                                            const TransformSpec& spec,
                                            const EventLibrary* library) {
  if (segments.empty()) throw InputError("replace_extremal_event requires segments");
  if (library == nullptr || library->empty()) {
    throw InputError("replace_extremal_event requires an event library");
  }
  const bool longest = param(spec, "extremal", 0.0) < 0.5;
  size_t pick = 0;
  for (size_t i = 1; i < segments.size(); ++i) {
    const bool better = longest ? segments[i].duration() > segments[pick].duration()
                                : segments[i].duration() < segments[pick].duration();
    if (better) pick = i;
  }
  std::vector<std::string> present;
  for (const auto& s : segments) present.push_back(s.label);
  std::vector<std::string> eligible;
  for (const auto& l : library->labels()) {
    if (std::find(present.begin(), present.end(), l) == present.end()) {
      eligible.push_back(l);
    }
  }
  if (eligible.empty()) {
    throw InputError("event library has no label absent from the instance");
  }
  rng::Stream stream(rng::derive(spec.seed, "replace-event-pick"));
  const std::string label = eligible[static_cast<size_t>(
      stream.uniform_int(0, static_cast<int64_t>(eligible.size()) - 1))];

  AudioTransformResult res{audio, segments};
  const auto [begin, end] = segment_frames(segments[pick], audio);
  const auto replacement = fit_event(library->get(label), end - begin, audio.channels);
  std::copy(replacement.begin(), replacement.end(),
            res.audio.samples.begin() + begin * audio.channels);
  res.segments[pick].label = label;  // timing slot unchanged
  return res;
}

}  // namespace

EventLibrary::EventLibrary(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw InputError("event library directory not found: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::ifstream in(p, std::ios::binary);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    entries_.emplace_back(p.stem().string(), wav::decode(bytes));
  }
  if (entries_.empty()) throw InputError("event library is empty: " + dir);
}

std::vector<std::string> EventLibrary::labels() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [label, _] : entries_) out.push_back(label);
  return out;
}

const wav::WavData& EventLibrary::get(const std::string& label) const {
  for (const auto& [l, data] : entries_) {
    if (l == label) return data;
  }
  throw InputError("event library has no entry: " + label);
}

AudioTransformResult apply_audio_transform(const WavData& audio,
                                           const std::vector<EventSegment>& segments,
                                           const TransformSpec& spec,
                                           const EventLibrary* library) {
  if (spec.modality != Modality::audio) {
    throw ConfigError("apply_audio_transform requires an audio-modality spec");
  }
  spec.validate();
  switch (spec.kind) {
    case TransformKind::identity:
      return {audio, segments};
    case TransformKind::insert_silence:
      return insert_silence(audio, segments, spec);
    case TransformKind::adjust_volume:
      return adjust_volume(audio, segments, spec);
    case TransformKind::swap_events:
      return swap_events(audio, segments, spec);
    case TransformKind::add_event:
      return add_event(audio, segments, spec, library);
    case TransformKind::replace_extremal_event:
      return replace_extremal_event(audio, segments, spec, library);
    default:
      throw ConfigError("unsupported audio transform kind: " + to_string(spec.kind));
  }
}

std::pair<std::vector<uint8_t>, std::vector<EventSegment>> apply_audio_transform_bytes(
    const std::vector<uint8_t>& wav_bytes, const std::vector<EventSegment>& segments,
    const TransformSpec& spec, const EventLibrary* library) {
  if (spec.kind == TransformKind::identity) return {wav_bytes, segments};
  const WavData audio = wav::decode(wav_bytes);
  auto res = apply_audio_transform(audio, segments, spec, library);
  return {wav::encode(res.audio), std::move(res.segments)};
}

}  // namespace festa::transforms
