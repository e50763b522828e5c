#include "festa/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <set>

namespace festa {

std::string to_string(TaskTag t) {
  switch (t) {
    case TaskTag::spatial: return "spatial";
    case TaskTag::order: return "order";
    case TaskTag::duration: return "duration";
    case TaskTag::count: return "count";
    case TaskTag::generic: return "generic";
  }
  return "generic";
}

TaskTag task_tag_from_string(const std::string& s) {
  if (s == "spatial") return TaskTag::spatial;
  if (s == "order") return TaskTag::order;
  if (s == "duration") return TaskTag::duration;
  if (s == "count") return TaskTag::count;
  if (s == "generic" || s.empty()) return TaskTag::generic;
  throw ValidationError("unknown task tag: " + s);
}

std::string to_string(MediaKind k) {
  switch (k) {
    case MediaKind::none: return "none";
    case MediaKind::image: return "image";
    case MediaKind::audio: return "audio";
  }
  return "none";
}

MediaKind media_kind_from_string(const std::string& s) {
  if (s == "none" || s.empty()) return MediaKind::none;
  if (s == "image") return MediaKind::image;
  if (s == "audio") return MediaKind::audio;
  throw ValidationError("unknown media kind: " + s);
}

std::string to_string(SampleFamily f) {
  switch (f) {
    case SampleFamily::original: return "original";
    case SampleFamily::fes: return "fes";
    case SampleFamily::fcs: return "fcs";
  }
  return "original";
}

SampleFamily family_from_string(const std::string& s) {
  if (s == "original") return SampleFamily::original;
  if (s == "fes") return SampleFamily::fes;
  if (s == "fcs") return SampleFamily::fcs;
  throw ValidationError("unknown sample family: " + s);
}

std::string to_string(Modality m) {
  switch (m) {
    case Modality::image: return "image";
    case Modality::audio: return "audio";
    case Modality::text: return "text";
  }
  return "text";
}

Modality modality_from_string(const std::string& s) {
  if (s == "image") return Modality::image;
  if (s == "audio") return Modality::audio;
  if (s == "text") return Modality::text;
  throw ValidationError("unknown modality: " + s);
}

std::string to_string(TransformKind k) {
  switch (k) {
    case TransformKind::identity: return "identity";
    case TransformKind::contrast: return "contrast";
    case TransformKind::blur: return "blur";
    case TransformKind::noise: return "noise";
    case TransformKind::mask: return "mask";
    case TransformKind::rotate: return "rotate";
    case TransformKind::shift: return "shift";
    case TransformKind::grayscale: return "grayscale";
    case TransformKind::hflip: return "hflip";
    case TransformKind::insert_silence: return "insert_silence";
    case TransformKind::adjust_volume: return "adjust_volume";
    case TransformKind::swap_events: return "swap_events";
    case TransformKind::add_event: return "add_event";
    case TransformKind::replace_extremal_event: return "replace_extremal_event";
    case TransformKind::paraphrase: return "paraphrase";
    case TransformKind::complement: return "complement";
  }
  return "identity";
}

TransformKind transform_kind_from_string(const std::string& s) {
  static const std::map<std::string, TransformKind> table = {
      {"identity", TransformKind::identity},
      {"contrast", TransformKind::contrast},
      {"blur", TransformKind::blur},
      {"noise", TransformKind::noise},
      {"mask", TransformKind::mask},
      {"rotate", TransformKind::rotate},
      {"shift", TransformKind::shift},
      {"grayscale", TransformKind::grayscale},
      {"hflip", TransformKind::hflip},
      {"insert_silence", TransformKind::insert_silence},
      {"adjust_volume", TransformKind::adjust_volume},
      {"swap_events", TransformKind::swap_events},
      {"add_event", TransformKind::add_event},
      {"replace_extremal_event", TransformKind::replace_extremal_event},
      {"paraphrase", TransformKind::paraphrase},
      {"complement", TransformKind::complement},
  };
  const auto it = table.find(s);
  if (it == table.end()) throw ValidationError("unknown transform kind: " + s);
  return it->second;
}

bool kind_valid_for_modality(TransformKind k, Modality m) {
  switch (m) {
    case Modality::image:
      switch (k) {
        case TransformKind::identity:
        case TransformKind::contrast:
        case TransformKind::blur:
        case TransformKind::noise:
        case TransformKind::mask:
        case TransformKind::rotate:
        case TransformKind::shift:
        case TransformKind::grayscale:
        case TransformKind::hflip:
          return true;
        default:
          return false;
      }
    case Modality::audio:
      switch (k) {
        case TransformKind::identity:
        case TransformKind::insert_silence:
        case TransformKind::adjust_volume:
        case TransformKind::swap_events:
        case TransformKind::add_event:
        case TransformKind::replace_extremal_event:
          return true;
        default:
          return false;
      }
    case Modality::text:
      switch (k) {
        case TransformKind::identity:
        case TransformKind::paraphrase:
        case TransformKind::complement:
          return true;
        default:
          return false;
      }
  }
  return false;
}

bool is_complementary_kind(TransformKind k) {
  switch (k) {
    case TransformKind::hflip:
    case TransformKind::swap_events:
    case TransformKind::add_event:
    case TransformKind::replace_extremal_event:
    case TransformKind::complement:
      return true;
    default:
      return false;
  }
}

namespace {

bool is_single_alnum_token(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) != 0;
  });
}

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

std::vector<std::string> McqInstance::option_labels() const {
  std::vector<std::string> out;
  out.reserve(options.size());
  for (const auto& o : options) out.push_back(o.label);
  return out;
}

bool McqInstance::has_label(const std::string& label) const {
  return std::any_of(options.begin(), options.end(),
                     [&](const McqOption& o) { return o.label == label; });
}

void McqInstance::validate() const {
  if (id.empty()) throw ValidationError("instance id must be non-empty");
  if (options.size() < 2 || options.size() > 26) {
    throw ValidationError("instance " + id + ": option count " +
                          std::to_string(options.size()) + " outside [2, 26]");
  }
  std::set<std::string> seen;
  for (const auto& o : options) {
    if (!is_single_alnum_token(o.label)) {
      throw ValidationError("instance " + id + ": option label '" + o.label +
                            "' is not a single alphanumeric token");
    }
    if (!seen.insert(o.label).second) {
      throw ValidationError("instance " + id + ": duplicate option label " + o.label);
    }
  }
  if (!has_label(target_label)) {
    throw ValidationError("instance " + id + ": target label '" + target_label +
                          "' not among options");
  }
  if (media.kind != MediaKind::audio && !media.events.empty()) {
    throw ValidationError("instance " + id + ": event segments require audio media");
  }
  double prev_end = -1.0;
  double prev_start = -1.0;
  for (const auto& ev : media.events) {
    if (ev.end_s <= ev.start_s) {
      throw ValidationError("instance " + id + ": segment '" + ev.label +
                            "' has non-positive duration");
    }
    if (ev.start_s < prev_start) {
      throw ValidationError("instance " + id + ": segments not sorted by start time");
    }
    if (ev.start_s < prev_end) {
      throw ValidationError("instance " + id + ": segments overlap");
    }
    prev_start = ev.start_s;
    prev_end = ev.end_s;
  }
}

void TransformSpec::validate() const {
  if (!kind_valid_for_modality(kind, modality)) {
    throw ConfigError("transform kind " + to_string(kind) +
                      " is not valid for modality " + to_string(modality));
  }
  // Documented parameter ranges; "slight" perturbations only.
  switch (kind) {
    case TransformKind::blur: {
      const double r = get_param(params, "radius_px", 0.0);
      if (r < 0.0 || r > 3.0) throw ConfigError("blur radius_px outside [0, 3]");
      break;
    }
    case TransformKind::noise: {
      const double s = get_param(params, "sigma", 0.0);
      if (s < 0.0 || s > 10.0) throw ConfigError("noise sigma outside [0, 10] (0-255 scale)");
      break;
    }
    case TransformKind::mask: {
      const double f = get_param(params, "fraction", 0.0);
      if (f < 0.0 || f > 0.01) throw ConfigError("mask fraction outside [0, 0.01]");
      break;
    }
    case TransformKind::rotate: {
      const double d = get_param(params, "degrees", 0.0);
      if (std::abs(d) > 5.0) throw ConfigError("rotate degrees outside [-5, 5]");
      break;
    }
    case TransformKind::shift: {
      const double dx = get_param(params, "dx_frac", 0.0);
      const double dy = get_param(params, "dy_frac", 0.0);
      if (std::abs(dx) > 0.05 || std::abs(dy) > 0.05) {
        throw ConfigError("shift fraction outside [-0.05, 0.05]");
      }
      break;
    }
    case TransformKind::contrast: {
      const double a = get_param(params, "alpha", 1.0);
      if (a <= 0.0) throw ConfigError("contrast alpha must be positive");
      break;
    }
    default:
      break;
  }
}

void TransformedInput::validate() const {
  media_transform.validate();
  text_transform.validate();
  const bool media_comp = is_complementary_kind(media_transform.kind);
  const bool text_comp = is_complementary_kind(text_transform.kind);
  if (family == SampleFamily::fes) {
    if (media_comp || text_comp) {
      throw ValidationError("FES sample for " + parent_id +
                            " carries a complementary transform");
    }
  } else if (family == SampleFamily::fcs) {
    if (media_comp == text_comp) {
      throw ValidationError("FCS sample for " + parent_id +
                            " must complement exactly one modality");
    }
  }
}

void AnswerDistribution::validate() const {
  if (probs.empty()) throw DomainError("empty answer distribution");
  double sum = 0.0;
  int nonzero = 0;
  for (const auto& [label, p] : probs) {
    if (p < 0.0) throw DomainError("negative probability for label " + label);
    if (p > 0.0) ++nonzero;
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DomainError("answer distribution sums to " + std::to_string(sum));
  }
  if (support_size != nonzero) {
    throw DomainError("support_size " + std::to_string(support_size) +
                      " does not match nonzero count " + std::to_string(nonzero));
  }
}

std::string complement_label(const std::string& predicted) { return predicted + "^c"; }

std::string argmax_label(const AnswerDistribution& dist) {
  dist.validate();
  std::string best;
  double best_p = -1.0;
  bool tie = false;
  for (const auto& [label, p] : dist.probs) {  // map order = lexicographic
    if (p > best_p) {
      best = label;
      best_p = p;
      tie = false;
    } else if (p == best_p) {
      tie = true;
    }
  }
  if (tie) {
    log_warn("argmax tie at p=" + std::to_string(best_p) +
             "; choosing lexicographically smallest label " + best);
  }
  return best;
}

void log_warn(const std::string& msg) { std::cerr << "[festa] warning: " << msg << "\n"; }

}  // namespace festa
