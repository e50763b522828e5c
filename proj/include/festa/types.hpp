#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "festa/errors.hpp"

namespace festa {

enum class TaskTag { spatial, order, duration, count, generic };

std::string to_string(TaskTag t);
TaskTag task_tag_from_string(const std::string& s);

enum class MediaKind { none, image, audio };

std::string to_string(MediaKind k);
MediaKind media_kind_from_string(const std::string& s);

// Labeled, non-overlapping span of an audio clip, in seconds.
struct EventSegment {
  std::string label;
  double start_s = 0.0;
  double end_s = 0.0;

  double duration() const { return end_s - start_s; }
};

struct MediaRef {
  MediaKind kind = MediaKind::none;
  std::string path;
  std::vector<EventSegment> events;  // audio only; sorted, non-overlapping
};

struct McqOption {
  std::string label;  // single alphanumeric token, e.g. "A"
  std::string text;
};

// One dataset item: question, labeled options, media reference, ground truth.
struct McqInstance {
  std::string id;
  std::string question;
  std::vector<McqOption> options;
  std::string target_label;
  MediaRef media;
  TaskTag task = TaskTag::generic;

  std::vector<std::string> option_labels() const;
  bool has_label(const std::string& label) const;
  // Throws ValidationError on any invariant violation (duplicate labels,
  // option count outside [2,26], target outside the option set,
  // overlapping/unsorted audio segments).
  void validate() const;
};

enum class SampleFamily { original, fes, fcs };

std::string to_string(SampleFamily f);
SampleFamily family_from_string(const std::string& s);

enum class Modality { image, audio, text };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

// Transform algebra: which kinds exist per modality and which are
// complementary (answer-flipping) rather than equivalence-preserving.
enum class TransformKind {
  identity,
  // image equivalence
  contrast,
  blur,
  noise,
  mask,
  rotate,
  shift,
  grayscale,
  // image complementary
  hflip,
  // audio equivalence
  insert_silence,
  adjust_volume,
  // audio complementary (task-specific)
  swap_events,
  add_event,
  replace_extremal_event,
  // text
  paraphrase,
  complement,
};

std::string to_string(TransformKind k);
TransformKind transform_kind_from_string(const std::string& s);
bool kind_valid_for_modality(TransformKind k, Modality m);
bool is_complementary_kind(TransformKind k);

struct TransformSpec {
  Modality modality = Modality::text;
  TransformKind kind = TransformKind::identity;
  std::map<std::string, double> params;
  uint64_t seed = 0;

  void validate() const;  // kind/modality agreement + documented param ranges
};

// A concrete FES or FCS sample with full transform provenance.
struct TransformedInput {
  std::string parent_id;
  SampleFamily family = SampleFamily::fes;
  TransformSpec media_transform;
  TransformSpec text_transform;
  std::string rendered_question;
  std::vector<uint8_t> media_bytes;  // in-memory until staged
  std::string media_path;            // staged location (content-addressed)
  std::string media_sha256;          // hash of media_bytes / staged payload
  MediaKind media_kind = MediaKind::none;
  int replicate_i = 0;  // media axis position
  int replicate_j = 0;  // text axis position

  int flat_index(int axis2_len) const { return replicate_i * axis2_len + replicate_j; }
  void validate() const;
};

// Empirical categorical distribution over option labels (or over the binary
// support {predicted, predicted^c}).
struct AnswerDistribution {
  std::map<std::string, double> probs;
  int support_size = 0;   // labels with probability > 0
  int sample_count = 0;   // responses aggregated

  void validate() const;  // non-negative, sums to 1 within 1e-9
};

// Canonical key for the pooled non-predicted outcome in the binary support.
std::string complement_label(const std::string& predicted);

struct FestaScores {
  double u_fes = 0.0;
  double u_fcs = 0.0;
  double u_festa = 0.0;
  int fes_parsed = 0;
  int fes_total = 0;
  int fcs_parsed = 0;
  int fcs_total = 0;
};

// Per-instance scores for FESTA and every requested baseline. Score fields
// are optional: an instance with no complementable modality carries u_fes
// but no u_fcs/u_festa, and a baseline whose reply could not be parsed is
// simply absent from the map.
struct UncertaintyRecord {
  std::string instance_id;
  std::string predicted_label;
  bool correct = false;
  std::optional<double> u_fes;
  std::optional<double> u_fcs;
  std::optional<double> u_festa;              // u_fes + u_fcs exactly
  std::map<std::string, double> baselines;    // method name -> uncertainty
  std::array<int, 4> k_used = {0, 0, 0, 0};   // K11, K12, K21, K22
  int fes_parsed = 0;
  int fes_total = 0;
  int fcs_parsed = 0;
  int fcs_total = 0;
};

// Lexicographically-smallest argmax; logs a warning to stderr on ties.
std::string argmax_label(const AnswerDistribution& dist);

void log_warn(const std::string& msg);

}  // namespace festa
