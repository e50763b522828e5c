#include "festa/estimator.hpp"

#include <algorithm>
#include <cctype>

#include "festa/rng.hpp"
#include "festa/sha256.hpp"

namespace festa::estimator {

using client::ModelResponse;
using client::QueryRequest;

AnswerDistribution estimate_distribution(const std::vector<ModelResponse>& responses,
                                         const std::vector<std::string>& option_labels,
                                         Pooling pooling, const std::string& predicted) {
  std::map<std::string, int> counts;
  int n = 0;
  for (const auto& r : responses) {
    if (!r.usable()) continue;  // failed samples reduce N, never count as a label
    if (std::find(option_labels.begin(), option_labels.end(), *r.parsed_label) ==
        option_labels.end()) {
      continue;
    }
    ++counts[*r.parsed_label];
    ++n;
  }
  if (n == 0) throw InstanceUnusable("no parseable responses to aggregate");

  AnswerDistribution dist;
  dist.sample_count = n;
  if (pooling == Pooling::full) {
    for (const auto& label : option_labels) {
      dist.probs[label] = double(counts[label]) / double(n);
    }
  } else {
    if (predicted.empty()) {
      throw DomainError("binary pooling requires the predicted label");
    }
    const int stay = counts[predicted];
    dist.probs[predicted] = double(stay) / double(n);
    dist.probs[complement_label(predicted)] = double(n - stay) / double(n);
  }
  for (const auto& [_, p] : dist.probs) {
    if (p > 0.0) ++dist.support_size;
  }
  return dist;
}

namespace {

int usable_count(const std::vector<ModelResponse>& responses) {
  int n = 0;
  for (const auto& r : responses) {
    if (r.usable()) ++n;
  }
  return n;
}

}  // namespace

FestaScores score_festa(const McqInstance& instance,
                        const std::vector<ModelResponse>& fes_responses,
                        const std::vector<ModelResponse>& fcs_responses,
                        const std::string& predicted, double prob_floor) {
  FestaScores s;
  s.fes_total = static_cast<int>(fes_responses.size());
  s.fcs_total = static_cast<int>(fcs_responses.size());
  s.fes_parsed = usable_count(fes_responses);
  s.fcs_parsed = usable_count(fcs_responses);
  if (2 * s.fes_parsed < s.fes_total) {
    throw InstanceUnusable("instance " + instance.id +
                           ": more than half of the FES samples failed to parse");
  }
  if (2 * s.fcs_parsed < s.fcs_total) {
    throw InstanceUnusable("instance " + instance.id +
                           ": more than half of the FCS samples failed to parse");
  }
  const auto labels = instance.option_labels();
  const auto q_fes = estimate_distribution(fes_responses, labels, Pooling::full);
  const auto q_fcs =
      estimate_distribution(fcs_responses, labels, Pooling::binary, predicted);
  s.u_fes = u_fes(q_fes, predicted, prob_floor);
  s.u_fcs = u_fcs(q_fcs, predicted, prob_floor);
  s.u_festa = festa_score(s.u_fes, s.u_fcs);
  return s;
}

EntropyAblation score_entropy_ablation(const std::vector<ModelResponse>& fes_responses,
                                       const std::vector<ModelResponse>& fcs_responses,
                                       const std::vector<std::string>& option_labels,
                                       const std::string& predicted) {
  EntropyAblation a;
  a.h_fes = shannon_entropy(
      estimate_distribution(fes_responses, option_labels, Pooling::full));
  a.h_fcs = shannon_entropy(
      estimate_distribution(fcs_responses, option_labels, Pooling::binary, predicted));
  a.h_sum = a.h_fes + a.h_fcs;
  return a;
}

double prediction_entropy(const std::vector<ModelResponse>& responses,
                          const std::vector<std::string>& option_labels) {
  return shannon_entropy(
      estimate_distribution(responses, option_labels, Pooling::full));
}

// ---------------------------------------------------------------------------

std::string topk_prompt(int top_k) {
  return "List your top " + std::to_string(top_k) +
         " candidate answers with confidences between 0 and 1, one per line, "
         "in the form 'LABEL: confidence'.";
}

std::optional<double> parse_verbalized_confidence(const std::string& raw_text) {
  // first number, integer or decimal
  size_t i = 0;
  while (i < raw_text.size()) {
    if (std::isdigit(static_cast<unsigned char>(raw_text[i]))) break;
    ++i;
  }
  if (i == raw_text.size()) return std::nullopt;
  size_t end = i;
  bool seen_dot = false;
  while (end < raw_text.size()) {
    const char c = raw_text[end];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ++end;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
      ++end;
    } else {
      break;
    }
  }
  const double c = std::stod(raw_text.substr(i, end - i));
  if (c < 0.0 || c > 100.0) return std::nullopt;
  return 1.0 - c / 100.0;
}

std::vector<std::pair<std::string, double>> parse_candidate_list(
    const std::string& raw_text, const std::vector<std::string>& option_labels) {
  std::vector<std::pair<std::string, double>> pairs;
  size_t start = 0;
  bool any_above_one = false;
  while (start <= raw_text.size()) {
    const size_t nl = raw_text.find('\n', start);
    const std::string line = raw_text.substr(
        start, nl == std::string::npos ? std::string::npos : nl - start);
    start = nl == std::string::npos ? raw_text.size() + 1 : nl + 1;

    const size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string token;
    for (char c : line.substr(0, colon)) {
      if (std::isalnum(static_cast<unsigned char>(c))) token.push_back(c);
    }
    if (token.empty()) continue;
    std::string canonical;
    for (const auto& l : option_labels) {
      if (l.size() == token.size() &&
          std::equal(l.begin(), l.end(), token.begin(), [](char a, char b) {
            return std::toupper(static_cast<unsigned char>(a)) ==
                   std::toupper(static_cast<unsigned char>(b));
          })) {
        canonical = l;
        break;
      }
    }
    if (canonical.empty()) continue;
    try {
      const double v = std::stod(line.substr(colon + 1));
      if (v < 0.0) continue;
      if (v > 1.0) any_above_one = true;
      pairs.emplace_back(canonical, v);
    } catch (const std::exception&) {
      continue;
    }
  }
  if (any_above_one) {
    for (auto& [_, v] : pairs) v /= 100.0;
  }
  return pairs;
}

std::optional<double> baseline_bu_from_replies(const std::vector<std::string>& replies,
                                               const std::vector<std::string>& option_labels,
                                               const std::string& predicted) {
  int parsed_samples = 0;
  double mass_sum = 0.0;
  for (const auto& reply : replies) {
    const auto pairs = parse_candidate_list(reply, option_labels);
    if (pairs.empty()) continue;  // malformed list contributes zero confidence
    ++parsed_samples;
    for (const auto& [label, v] : pairs) {
      if (label == predicted) {
        mass_sum += std::min(v, 1.0);
        break;
      }
    }
  }
  if (parsed_samples == 0) return std::nullopt;
  // Malformed samples count in the denominator with zero mass.
  const double mean = mass_sum / double(replies.size());
  return 1.0 - mean;
}

// ---------------------------------------------------------------------------

namespace {

QueryRequest base_request(const McqInstance& instance,
                          const client::ModelEndpoint& endpoint,
                          const std::vector<uint8_t>& media_bytes,
                          const std::string& media_sha256) {
  QueryRequest r;
  r.instance_id = instance.id;
  r.media = media_bytes;
  r.media_kind = media_bytes.empty() ? MediaKind::none : instance.media.kind;
  r.media_sha256 = media_bytes.empty() ? "" : media_sha256;
  r.max_tokens = endpoint.max_tokens;
  return r;
}

// The instance id is echoed on a trailer line. Mock servers identify
// instances by it, and it keeps cache keys distinct for datasets whose
// rendered prompts would otherwise be byte-identical.
std::string tagged_answer_prompt(const McqInstance& instance,
                                 const std::string& question) {
  return client::render_answer_prompt(question, instance.options) + "\n[instance: " +
         instance.id + "]";
}

}  // namespace

QueryRequest original_request(const McqInstance& instance,
                              const client::ModelEndpoint& endpoint,
                              const std::vector<uint8_t>& media_bytes,
                              const std::string& media_sha256) {
  QueryRequest r = base_request(instance, endpoint, media_bytes, media_sha256);
  r.family = SampleFamily::original;
  r.replicate_index = 0;
  r.temperature = endpoint.greedy_temperature;
  r.turns = {{"user", tagged_answer_prompt(instance, instance.question)}};
  return r;
}

QueryRequest sample_request(const McqInstance& instance, const TransformedInput& sample,
                            const client::ModelEndpoint& endpoint,
                            const std::vector<uint8_t>& media_bytes, int flat_replicate) {
  QueryRequest r = base_request(instance, endpoint, media_bytes, sample.media_sha256);
  r.family = sample.family;
  r.replicate_index = flat_replicate;
  r.temperature = endpoint.temperature;
  r.turns = {{"user", tagged_answer_prompt(instance, sample.rendered_question)}};
  return r;
}

std::vector<QueryRequest> oe_requests(const McqInstance& instance,
                                      const client::ModelEndpoint& endpoint,
                                      const std::vector<uint8_t>& media_bytes,
                                      const std::string& media_sha256, int n_decodes) {
  std::vector<QueryRequest> out;
  out.reserve(n_decodes);
  for (int i = 0; i < n_decodes; ++i) {
    QueryRequest r = base_request(instance, endpoint, media_bytes, media_sha256);
    r.family = SampleFamily::original;
    r.replicate_index = i;
    r.temperature = endpoint.temperature;  // stochastic decoding
    r.turns = {{"user", tagged_answer_prompt(instance, instance.question)}};
    out.push_back(std::move(r));
  }
  return out;
}

QueryRequest vc_request(const McqInstance& instance,
                        const client::ModelEndpoint& endpoint,
                        const std::vector<uint8_t>& media_bytes,
                        const std::string& media_sha256,
                        const std::string& original_answer_text) {
  QueryRequest r = base_request(instance, endpoint, media_bytes, media_sha256);
  r.family = SampleFamily::original;
  r.replicate_index = 0;
  r.temperature = endpoint.greedy_temperature;
  r.turns = {
      {"user", tagged_answer_prompt(instance, instance.question)},
      {"assistant", original_answer_text},
      {"user", kConfidencePrompt},
  };
  return r;
}

std::vector<QueryRequest> bu_requests(const McqInstance& instance,
                                      const client::ModelEndpoint& endpoint,
                                      const std::vector<uint8_t>& media_bytes,
                                      const std::string& media_sha256, int top_k,
                                      int n_samples) {
  std::vector<QueryRequest> out;
  out.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    QueryRequest r = base_request(instance, endpoint, media_bytes, media_sha256);
    r.family = SampleFamily::original;
    r.replicate_index = i;
    r.temperature = endpoint.temperature;
    r.turns = {{"user", client::render_answer_prompt(instance.question, instance.options) +
                            "\n" + topk_prompt(top_k) + "\n[instance: " +
                            instance.id + "]"}};
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_string(IaMode m) {
  switch (m) {
    case IaMode::media: return "media";
    case IaMode::text: return "text";
    case IaMode::both: return "both";
  }
  return "both";
}

double baseline_oe(client::QueryBackend& backend, const client::ModelEndpoint& endpoint,
                   const McqInstance& instance, const std::vector<uint8_t>& media,
                   const std::string& media_sha256, int n_decodes, int max_in_flight) {
  const auto requests = oe_requests(instance, endpoint, media, media_sha256, n_decodes);
  const auto responses =
      client::run_all(backend, requests, instance.option_labels(), max_in_flight);
  return prediction_entropy(responses, instance.option_labels());
}

std::optional<double> baseline_vc(client::QueryBackend& backend,
                                  const client::ModelEndpoint& endpoint,
                                  const McqInstance& instance,
                                  const std::vector<uint8_t>& media,
                                  const std::string& media_sha256,
                                  const std::string& original_answer_text) {
  const auto resp = backend.run(
      vc_request(instance, endpoint, media, media_sha256, original_answer_text), {});
  if (resp.status != client::QueryStatus::ok) return std::nullopt;
  return parse_verbalized_confidence(resp.raw_text);
}

double baseline_ia(client::QueryBackend& backend, const client::ModelEndpoint& endpoint,
                   const transforms::TransformConfig& tconfig,
                   const McqInstance& instance, IaMode mode, int k, uint64_t seed,
                   const std::vector<uint8_t>& original_media, int max_in_flight) {
  const auto requests =
      ia_requests(instance, endpoint, tconfig, mode, k, seed, original_media, "ia");
  const auto responses =
      client::run_all(backend, requests, instance.option_labels(), max_in_flight);
  return prediction_entropy(responses, instance.option_labels());
}

double baseline_ru(client::QueryBackend& backend, const client::ModelEndpoint& endpoint,
                   const transforms::TransformConfig& tconfig,
                   const McqInstance& instance, int k, uint64_t seed,
                   const std::vector<uint8_t>& original_media, int max_in_flight) {
  const auto requests = ia_requests(instance, endpoint, tconfig, IaMode::text, k, seed,
                                    original_media, "ru");
  const auto responses =
      client::run_all(backend, requests, instance.option_labels(), max_in_flight);
  return prediction_entropy(responses, instance.option_labels());
}

std::optional<double> baseline_bu(client::QueryBackend& backend,
                                  const client::ModelEndpoint& endpoint,
                                  const McqInstance& instance,
                                  const std::vector<uint8_t>& media,
                                  const std::string& media_sha256,
                                  const std::string& predicted, int top_k,
                                  int n_samples, int max_in_flight) {
  const auto requests =
      bu_requests(instance, endpoint, media, media_sha256, top_k, n_samples);
  const auto responses = client::run_all(backend, requests, {}, max_in_flight);
  std::vector<std::string> replies;
  for (const auto& r : responses) {
    if (r.status == client::QueryStatus::ok) replies.push_back(r.raw_text);
  }
  return baseline_bu_from_replies(replies, instance.option_labels(), predicted);
}

transforms::ParaphraseProvider model_backed_paraphraser(
    client::QueryBackend& backend, const client::ModelEndpoint& endpoint,
    const std::string& instance_id) {
  return transforms::ParaphraseProvider::model_backed(
      [&backend, endpoint, instance_id](const std::string& prompt, int index) {
        QueryRequest r;
        r.instance_id = instance_id;
        r.family = SampleFamily::original;
        r.replicate_index = index;
        r.temperature = endpoint.temperature;
        r.max_tokens = std::max(endpoint.max_tokens, 64);
        r.turns = {{"user", prompt}};
        const auto resp = backend.run(r, {});
        if (resp.status != client::QueryStatus::ok) {
          throw TransportError("model-backed paraphrase failed: " + resp.error);
        }
        return resp.raw_text;
      });
}

std::vector<QueryRequest> ia_requests(const McqInstance& instance,
                                      const client::ModelEndpoint& endpoint,
                                      const transforms::TransformConfig& tconfig,
                                      IaMode mode, int k, uint64_t seed,
                                      const std::vector<uint8_t>& original_media,
                                      const std::string& method_tag) {
  if (mode == IaMode::both) {
    throw DomainError("IA both-mode reuses the FES grid; build sample requests instead");
  }
  std::vector<QueryRequest> out;
  out.reserve(k);
  const uint64_t root = rng::derive(seed, instance.id, method_tag, to_string(mode));
  if (mode == IaMode::media) {
    for (int i = 0; i < k; ++i) {
      std::vector<uint8_t> bytes;
      std::string sha;
      TransformSpec spec = transforms::media_equivalence_spec(instance, i, tconfig, root);
      if (instance.media.kind == MediaKind::image) {
        bytes = transforms::apply_image_transform(original_media, spec);
      } else if (instance.media.kind == MediaKind::audio) {
        bytes = transforms::apply_audio_transform_bytes(original_media,
                                                        instance.media.events, spec)
                    .first;
      }
      if (!bytes.empty()) sha = sha256_hex(bytes);
      QueryRequest r = base_request(instance, endpoint, bytes, sha);
      r.family = SampleFamily::fes;
      r.replicate_index = i;
      r.temperature = endpoint.temperature;
      r.turns = {{"user", tagged_answer_prompt(instance, instance.question)}};
      out.push_back(std::move(r));
    }
    return out;
  }
  // text mode: untouched media, paraphrased questions
  const std::string original_sha =
      original_media.empty() ? "" : sha256_hex(original_media);
  const auto texts = transforms::paraphrase_question(instance.question, {}, k,
                                                     rng::derive(root, "texts"));
  for (int i = 0; i < k; ++i) {
    QueryRequest r = base_request(instance, endpoint, original_media, original_sha);
    r.family = SampleFamily::fes;
    r.replicate_index = i;
    r.temperature = endpoint.temperature;
    r.turns = {{"user", tagged_answer_prompt(instance, texts[static_cast<size_t>(i)])}};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace festa::estimator
