#include <cctype>
#include <fstream>

#include "festa/rng.hpp"
#include "festa/sha256.hpp"
#include "festa/transforms.hpp"

namespace festa::transforms {

namespace {

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open media file: " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

TransformSpec identity_spec(Modality modality, uint64_t seed) {
  TransformSpec spec;
  spec.modality = modality;
  spec.kind = TransformKind::identity;
  spec.seed = seed;
  return spec;
}

TransformSpec image_equivalence_spec(int i, const TransformConfig& config,
                                     uint64_t seed) {
  const auto& catalog = image_equivalence_catalog();
  TransformSpec spec;
  spec.modality = Modality::image;
  spec.kind = catalog[static_cast<size_t>(i) % catalog.size()];
  spec.seed = rng::derive(seed, "image-equivalence", static_cast<uint64_t>(i));
  rng::Stream stream(spec.seed);
  switch (spec.kind) {
    case TransformKind::contrast:
      spec.params["alpha"] = stream.uniform(config.contrast_lo, config.contrast_hi);
      break;
    case TransformKind::blur:
      spec.params["radius_px"] = stream.uniform(0.5, config.blur_radius_max);
      break;
    case TransformKind::noise:
      spec.params["sigma"] = stream.uniform(1.0, config.noise_sigma_max);
      break;
    case TransformKind::mask:
      spec.params["fraction"] = stream.uniform(0.001, config.mask_fraction_max);
      break;
    case TransformKind::rotate:
      spec.params["degrees"] =
          stream.uniform(-config.rotate_deg_max, config.rotate_deg_max);
      break;
    case TransformKind::shift:
      spec.params["dx_frac"] =
          stream.uniform(-config.shift_fraction_max, config.shift_fraction_max);
      spec.params["dy_frac"] =
          stream.uniform(-config.shift_fraction_max, config.shift_fraction_max);
      break;
    case TransformKind::grayscale:
    default:
      break;
  }
  return spec;
}

TransformSpec audio_equivalence_spec(const McqInstance& instance, int i,
                                     const TransformConfig& config, uint64_t seed) {
  const auto& catalog = audio_equivalence_catalog();
  TransformSpec spec;
  spec.modality = Modality::audio;
  spec.kind = catalog[static_cast<size_t>(i) % catalog.size()];
  spec.seed = rng::derive(seed, "audio-equivalence", static_cast<uint64_t>(i));
  rng::Stream stream(spec.seed);
  const auto& events = instance.media.events;
  if (spec.kind == TransformKind::insert_silence) {
    spec.params["duration_s"] = stream.uniform(0.05, config.silence_max_s);
    if (!events.empty()) {
      spec.params["gap_index"] =
          double(stream.uniform_int(0, static_cast<int64_t>(events.size()) - 1));
    } else {
      spec.params["position_frac"] = stream.uniform(0.2, 0.8);
    }
  } else if (spec.kind == TransformKind::adjust_volume) {
    if (events.empty()) {
      spec.params["gain"] = stream.uniform(config.volume_gain_lo, config.volume_gain_hi);
    } else {
      for (size_t s = 0; s < events.size(); ++s) {
        spec.params["gain" + std::to_string(s)] =
            stream.uniform(config.volume_gain_lo, config.volume_gain_hi);
      }
    }
  }
  return spec;
}

// Seeded non-identity permutation of n segment positions.
std::vector<size_t> complement_permutation(size_t n, uint64_t seed) {
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  rng::Stream stream(seed);
  stream.shuffle(perm);
  bool identity = true;
  for (size_t i = 0; i < n; ++i) {
    if (perm[i] != i) {
      identity = false;
      break;
    }
  }
  if (identity && n >= 2) std::swap(perm[0], perm[1]);
  return perm;
}

TransformSpec audio_complement_spec(const McqInstance& instance, int i,
                                    const TransformConfig& config, uint64_t seed) {
  TransformSpec spec;
  spec.modality = Modality::audio;
  spec.seed = rng::derive(seed, "audio-complement", static_cast<uint64_t>(i));
  rng::Stream stream(spec.seed);
  const auto& events = instance.media.events;
  switch (instance.task) {
    case TaskTag::order: {
      if (events.size() < 2) {
        throw NotComplementable("order task needs >= 2 segments: " + instance.id);
      }
      spec.kind = TransformKind::swap_events;
      const auto perm = complement_permutation(events.size(),
                                               rng::derive(spec.seed, "perm"));
      for (size_t p = 0; p < perm.size(); ++p) {
        spec.params["perm" + std::to_string(p)] = double(perm[p]);
      }
      break;
    }
    case TaskTag::count: {
      if (events.empty()) {
        throw NotComplementable("count task needs segment annotations: " + instance.id);
      }
      spec.kind = TransformKind::add_event;
      spec.params["position"] = double(stream.uniform_int(0, 1));
      spec.params["duration_s"] = config.added_event_s;
      static const double tones[] = {330.0, 440.0, 550.0, 660.0, 880.0};
      spec.params["tone_hz"] = tones[stream.uniform_int(0, 4)];
      break;
    }
    case TaskTag::duration: {
      if (events.empty()) {
        throw NotComplementable("duration task needs segment annotations: " +
                                instance.id);
      }
      spec.kind = TransformKind::replace_extremal_event;
      spec.params["extremal"] = double(i % 2);  // alternate longest/shortest
      break;
    }
    default:
      throw NotComplementable("no audio complement for task " +
                              to_string(instance.task) + ": " + instance.id);
  }
  return spec;
}

bool mentions_left_or_right(const McqInstance& instance) {
  auto contains_word = [](const std::string& text, const char* w) {
    std::string lower;
    lower.reserve(text.size());
    for (char c : text) {
      lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    const std::string needle(w);
    size_t at = lower.find(needle);
    while (at != std::string::npos) {
      const bool l = at == 0 || std::isalnum(static_cast<unsigned char>(lower[at - 1])) == 0;
      const size_t end = at + needle.size();
      const bool r = end == lower.size() ||
                     std::isalnum(static_cast<unsigned char>(lower[end])) == 0;
      if (l && r) return true;
      at = lower.find(needle, at + 1);
    }
    return false;
  };
  if (contains_word(instance.question, "left") ||
      contains_word(instance.question, "right")) {
    return true;
  }
  for (const auto& o : instance.options) {
    if (contains_word(o.text, "left") || contains_word(o.text, "right")) return true;
  }
  return false;
}

struct MediaVariant {
  TransformSpec spec;
  std::vector<uint8_t> bytes;
  std::string sha256;
};

std::vector<uint8_t> load_media(const McqInstance& instance, const MediaLoader& loader) {
  const MediaLoader& use = loader ? loader : file_media_loader();
  return use(instance.media.path);
}

MediaVariant make_media_variant(const McqInstance& instance, const TransformSpec& spec,
                                const std::vector<uint8_t>& original,
                                const EventLibrary* library) {
  MediaVariant v;
  v.spec = spec;
  switch (instance.media.kind) {
    case MediaKind::none:
      break;
    case MediaKind::image:
      v.bytes = apply_image_transform(original, spec);
      break;
    case MediaKind::audio:
      v.bytes =
          apply_audio_transform_bytes(original, instance.media.events, spec, library)
              .first;
      break;
  }
  if (!v.bytes.empty()) v.sha256 = sha256_hex(v.bytes);
  return v;
}

std::optional<EventLibrary> maybe_library(const McqInstance& instance,
                                          const TransformConfig& config) {
  if (instance.media.kind == MediaKind::audio && !config.event_library_dir.empty()) {
    return EventLibrary(config.event_library_dir);
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(FcsModality m) {
  return m == FcsModality::text ? "text" : "media";
}

FcsModality fcs_modality_from_string(const std::string& s) {
  if (s == "text") return FcsModality::text;
  if (s == "media") return FcsModality::media;
  throw ValidationError("unknown fcs modality: " + s);
}

MediaLoader file_media_loader() {
  return [](const std::string& path) { return read_file_bytes(path); };
}

const std::vector<TransformKind>& image_equivalence_catalog() {
  static const std::vector<TransformKind> catalog = {
      TransformKind::contrast, TransformKind::blur,  TransformKind::noise,
      TransformKind::mask,     TransformKind::rotate, TransformKind::shift,
      TransformKind::grayscale,
  };
  return catalog;
}

const std::vector<TransformKind>& audio_equivalence_catalog() {
  static const std::vector<TransformKind> catalog = {
      TransformKind::insert_silence,
      TransformKind::adjust_volume,
  };
  return catalog;
}

TransformSpec media_equivalence_spec(const McqInstance& instance, int i,
                                     const TransformConfig& config, uint64_t seed) {
  switch (instance.media.kind) {
    case MediaKind::image:
      return image_equivalence_spec(i, config, seed);
    case MediaKind::audio:
      return audio_equivalence_spec(instance, i, config, seed);
    case MediaKind::none:
    default:
      return identity_spec(Modality::image,
                           rng::derive(seed, "identity", static_cast<uint64_t>(i)));
  }
}

std::vector<TransformedInput> generate_fes_set(const McqInstance& instance, int k11,
                                               int k12, const TransformConfig& config,
                                               uint64_t seed, const MediaLoader& loader,
                                               const ParaphraseProvider& provider) {
  if (k11 < 1 || k12 < 1) throw DomainError("generate_fes_set requires k11, k12 >= 1");
  instance.validate();

  const uint64_t root = rng::derive(seed, instance.id, "fes");
  const auto library = maybe_library(instance, config);

  std::vector<uint8_t> original_bytes;
  if (instance.media.kind != MediaKind::none) {
    original_bytes = load_media(instance, loader);
  }
  std::vector<MediaVariant> media;
  media.reserve(k11);
  for (int i = 0; i < k11; ++i) {
    const TransformSpec spec =
        media_equivalence_spec(instance, i, config, rng::derive(root, "media"));
    media.push_back(make_media_variant(instance, spec, original_bytes,
                                       library ? &*library : nullptr));
  }

  const std::vector<std::string> texts = paraphrase_question(
      instance.question, provider, k12, rng::derive(root, "text"));

  std::vector<TransformedInput> out;
  out.reserve(static_cast<size_t>(k11) * k12);
  for (int i = 0; i < k11; ++i) {
    for (int j = 0; j < k12; ++j) {
      TransformedInput t;
      t.parent_id = instance.id;
      t.family = SampleFamily::fes;
      t.media_transform = media[i].spec;
      t.text_transform.modality = Modality::text;
      t.text_transform.kind = TransformKind::paraphrase;
      t.text_transform.seed = rng::derive(root, "text", static_cast<uint64_t>(j));
      t.rendered_question = texts[static_cast<size_t>(j)];
      t.media_bytes = media[i].bytes;
      t.media_sha256 = media[i].sha256;
      t.media_kind = instance.media.kind;
      t.replicate_i = i;
      t.replicate_j = j;
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<TransformedInput> generate_fcs_set(const McqInstance& instance, int k21,
                                               int k22, const TransformConfig& config,
                                               uint64_t seed, const MediaLoader& loader,
                                               const ParaphraseProvider& provider) {
  if (k21 < 1 || k22 < 1) throw DomainError("generate_fcs_set requires k21, k22 >= 1");
  instance.validate();

  const uint64_t root = rng::derive(seed, instance.id, "fcs");
  const auto library = maybe_library(instance, config);

  std::vector<uint8_t> original_bytes;
  if (instance.media.kind != MediaKind::none) {
    original_bytes = load_media(instance, loader);
  }

  std::vector<TransformedInput> out;
  out.reserve(static_cast<size_t>(k21) * k22);

  if (config.fcs_modality == FcsModality::text) {
    // Text carries the complement; media carries equivalence transforms.
    const std::string complemented =
        complement_question(instance.question, provider, rng::derive(root, "complement"));
    const std::vector<std::string> texts =
        paraphrase_question(complemented, provider, k21, rng::derive(root, "text"));
    std::vector<MediaVariant> media;
    media.reserve(k22);
    for (int j = 0; j < k22; ++j) {
      const TransformSpec spec =
          media_equivalence_spec(instance, j, config, rng::derive(root, "media"));
      media.push_back(make_media_variant(instance, spec, original_bytes,
                                         library ? &*library : nullptr));
    }
    for (int i = 0; i < k21; ++i) {
      for (int j = 0; j < k22; ++j) {
        TransformedInput t;
        t.parent_id = instance.id;
        t.family = SampleFamily::fcs;
        t.media_transform = media[j].spec;
        t.text_transform.modality = Modality::text;
        t.text_transform.kind = TransformKind::complement;
        t.text_transform.seed = rng::derive(root, "text", static_cast<uint64_t>(i));
        t.rendered_question = texts[static_cast<size_t>(i)];
        t.media_bytes = media[j].bytes;
        t.media_sha256 = media[j].sha256;
        t.media_kind = instance.media.kind;
        t.replicate_i = i;
        t.replicate_j = j;
        out.push_back(std::move(t));
      }
    }
    return out;
  }

  // Media carries the complement; text carries equivalence paraphrases.
  if (instance.media.kind == MediaKind::none) {
    throw NotComplementable("media complement requested but instance " + instance.id +
                            " has no media");
  }
  std::vector<MediaVariant> media;
  media.reserve(k21);
  for (int i = 0; i < k21; ++i) {
    TransformSpec spec;
    if (instance.media.kind == MediaKind::image) {
      // Horizontal flip provably inverts left/right spatial relations and
      // nothing else; gate on the question actually asking about them.
      if (!mentions_left_or_right(instance)) {
        throw NotComplementable("image complement is limited to left/right questions: " +
                                instance.id);
      }
      spec.modality = Modality::image;
      spec.kind = TransformKind::hflip;
      spec.seed = rng::derive(root, "media-complement", static_cast<uint64_t>(i));
    } else {
      spec = audio_complement_spec(instance, i, config, rng::derive(root, "media-complement"));
    }
    media.push_back(make_media_variant(instance, spec, original_bytes,
                                       library ? &*library : nullptr));
  }
  const std::vector<std::string> texts = paraphrase_question(
      instance.question, provider, k22, rng::derive(root, "text"));
  for (int i = 0; i < k21; ++i) {
    for (int j = 0; j < k22; ++j) {
      TransformedInput t;
      t.parent_id = instance.id;
      t.family = SampleFamily::fcs;
      t.media_transform = media[i].spec;
      t.text_transform.modality = Modality::text;
      t.text_transform.kind = TransformKind::paraphrase;
      t.text_transform.seed = rng::derive(root, "text", static_cast<uint64_t>(j));
      t.rendered_question = texts[static_cast<size_t>(j)];
      t.media_bytes = media[i].bytes;
      t.media_sha256 = media[i].sha256;
      t.media_kind = instance.media.kind;
      t.replicate_i = i;
      t.replicate_j = j;
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace festa::transforms
