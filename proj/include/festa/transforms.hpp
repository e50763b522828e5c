#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "festa/types.hpp"
#include "festa/wav.hpp"

namespace festa::transforms {

// Which modality carries the complementary transform in FCS generation.
enum class FcsModality { text, media };

std::string to_string(FcsModality m);
FcsModality fcs_modality_from_string(const std::string& s);

// Parameter ranges for equivalence transforms. Each range is sized so a
// human answer to the task would not change; all configurable.
struct TransformConfig {
  // image
  double contrast_lo = 0.8, contrast_hi = 1.2;
  double blur_radius_max = 3.0;       // px
  double noise_sigma_max = 10.0;      // on the 0-255 scale
  double mask_fraction_max = 0.01;    // fraction of pixels hidden
  double rotate_deg_max = 5.0;
  double shift_fraction_max = 0.05;   // of each dimension
  // audio
  double silence_max_s = 0.5;
  double volume_gain_lo = 0.8, volume_gain_hi = 1.25;
  double added_event_s = 0.5;         // synthesized/add_event duration
  // complementary sampling
  FcsModality fcs_modality = FcsModality::text;
  std::string event_library_dir;      // labeled WAV snippets for audio FCS
};

// ---------------------------------------------------------------------------
// Image transforms (PNG/JPEG bytes in, PNG bytes out; dimensions preserved)

std::vector<uint8_t> apply_image_transform(const std::vector<uint8_t>& image_bytes,
                                           const TransformSpec& spec);

// ---------------------------------------------------------------------------
// Audio transforms

// A directory of <label>.wav snippets used as replacement/new events.
class EventLibrary {
 public:
  EventLibrary() = default;
  explicit EventLibrary(const std::string& dir);  // throws InputError if unusable
  bool empty() const { return entries_.empty(); }
  // Labels sorted by name; deterministic across runs.
  std::vector<std::string> labels() const;
  const wav::WavData& get(const std::string& label) const;

 private:
  std::vector<std::pair<std::string, wav::WavData>> entries_;
};

struct AudioTransformResult {
  wav::WavData audio;
  std::vector<EventSegment> segments;
};

AudioTransformResult apply_audio_transform(const wav::WavData& audio,
                                           const std::vector<EventSegment>& segments,
                                           const TransformSpec& spec,
                                           const EventLibrary* library = nullptr);

// Byte-level convenience wrapper (PCM WAV in/out).
std::pair<std::vector<uint8_t>, std::vector<EventSegment>> apply_audio_transform_bytes(
    const std::vector<uint8_t>& wav_bytes, const std::vector<EventSegment>& segments,
    const TransformSpec& spec, const EventLibrary* library = nullptr);

// ---------------------------------------------------------------------------
// Text transforms

class ParaphraseProvider;

// Offline rule-based paraphrasing: politeness clauses before or after the
// question plus safe synonym swaps from a bundled lexicon. Deterministic per
// seed; degrades to duplicates (with a warning) when fewer than n distinct
// variants exist.
std::vector<std::string> paraphrase_question(const std::string& question,
                                             const ParaphraseProvider& provider,
                                             int n, uint64_t seed);

// Replaces the first recognized invertible relation with its antonym
// (left/right, above/below, in front of/behind, before/after,
// longer/shorter, more/fewer). Never inserts a negation word. Throws
// NotComplementable when no relation is found.
std::string complement_question(const std::string& question,
                                const ParaphraseProvider& provider, uint64_t seed);

// Template mode is fully offline; model_backed issues prompts through a
// caller-supplied completion hook (wired to the client module by the
// pipeline).
class ParaphraseProvider {
 public:
  enum class Mode { template_mode, model_backed };

  // One prompt in, one rewritten question out. Index is the replicate.
  using CompletionFn = std::function<std::string(const std::string& prompt, int index)>;

  ParaphraseProvider() = default;
  static ParaphraseProvider model_backed(CompletionFn fn);

  Mode mode() const { return mode_; }
  const CompletionFn& completion() const { return completion_; }

  std::string paraphrase_prompt_template =
      "Rewrite the question so the meaning is unchanged. Reply with the "
      "rewritten question only.\nQuestion: {question}";
  std::string complement_prompt_template =
      "Rewrite the question so the correct answer becomes the opposite. Do "
      "not use negation words. Reply with the rewritten question only.\n"
      "Question: {question}";

 private:
  Mode mode_ = Mode::template_mode;
  CompletionFn completion_;
};

// True when complement_question would succeed in template mode.
bool has_invertible_relation(const std::string& question);

// ---------------------------------------------------------------------------
// Combinatoric sample-set generation (the K1 = K11 x K12 grid)

// Media bytes are loaded lazily through this hook so grid generation stays
// testable without touching the filesystem.
using MediaLoader = std::function<std::vector<uint8_t>(const std::string& path)>;

MediaLoader file_media_loader();

// k11 media-equivalence variants crossed with k12 text-equivalence variants.
// Media-absent instances degenerate to identity copies on the media axis so
// the K1 = k11 x k12 contract always holds.
std::vector<TransformedInput> generate_fes_set(const McqInstance& instance, int k11,
                                               int k12, const TransformConfig& config,
                                               uint64_t seed,
                                               const MediaLoader& loader = {},
                                               const ParaphraseProvider& provider = {});

// k21 complementary variants (text by default; media when configured)
// crossed with k22 equivalence variants of the other modality. Exactly one
// modality is complemented per sample. Throws NotComplementable when the
// chosen modality cannot be complemented for this instance.
std::vector<TransformedInput> generate_fcs_set(const McqInstance& instance, int k21,
                                               int k22, const TransformConfig& config,
                                               uint64_t seed,
                                               const MediaLoader& loader = {},
                                               const ParaphraseProvider& provider = {});

// The equivalence catalogs the media axis cycles through.
const std::vector<TransformKind>& image_equivalence_catalog();
const std::vector<TransformKind>& audio_equivalence_catalog();

// Seeded equivalence spec for media-axis position i (exposed for the
// augmentation baselines, which reuse the same sampling law).
TransformSpec media_equivalence_spec(const McqInstance& instance, int i,
                                     const TransformConfig& config, uint64_t seed);

}  // namespace festa::transforms
