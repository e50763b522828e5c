#pragma once

#include <optional>
#include <string>
#include <vector>

#include "festa/client.hpp"
#include "festa/scoring.hpp"
#include "festa/transforms.hpp"
#include "festa/types.hpp"

// Aggregates model responses into distributions and produces the FESTA
// score plus every baseline uncertainty measure.
namespace festa::estimator {

enum class Pooling { full, binary };

// Empirical frequencies over parseable responses. Binary pooling maps every
// label != predicted onto the pooled complement outcome. Throws
// InstanceUnusable when nothing parsed.
AnswerDistribution estimate_distribution(const std::vector<client::ModelResponse>& responses,
                                         const std::vector<std::string>& option_labels,
                                         Pooling pooling,
                                         const std::string& predicted = "");

// Consistency + sensitivity scoring over gathered FES/FCS responses.
// Throws InstanceUnusable when more than half of either sample set failed
// to parse, or when a set has no parseable response at all.
FestaScores score_festa(const McqInstance& instance,
                        const std::vector<client::ModelResponse>& fes_responses,
                        const std::vector<client::ModelResponse>& fcs_responses,
                        const std::string& predicted,
                        double prob_floor = kDefaultProbFloor);

struct EntropyAblation {
  double h_fes = 0.0;  // entropy of q_FES over the full support
  double h_fcs = 0.0;  // entropy of the binary-pooled q_FCS
  double h_sum = 0.0;
};

// The entropy comparator for the KL-vs-entropy ablation.
EntropyAblation score_entropy_ablation(const std::vector<client::ModelResponse>& fes_responses,
                                       const std::vector<client::ModelResponse>& fcs_responses,
                                       const std::vector<std::string>& option_labels,
                                       const std::string& predicted);

// Entropy of the empirical prediction distribution over any response set;
// the shared core of the OE / IA / RU baselines.
double prediction_entropy(const std::vector<client::ModelResponse>& responses,
                          const std::vector<std::string>& option_labels);

// ---------------------------------------------------------------------------
// Elicitation prompts (documented verbatim; the mock server recognizes them)

inline constexpr const char* kConfidencePrompt = "State your confidence 0-100.";

std::string topk_prompt(int top_k);

// First number in the reply, mapped to uncertainty 1 - c/100 when within
// [0, 100]; absent otherwise.
std::optional<double> parse_verbalized_confidence(const std::string& raw_text);

// "LABEL: number" pairs, one per line; values above 1 are treated as
// percentages. Empty result means the list was malformed.
std::vector<std::pair<std::string, double>> parse_candidate_list(
    const std::string& raw_text, const std::vector<std::string>& option_labels);

// Mean elicited confidence mass on `predicted` across samples, as
// uncertainty (1 - mean). Missing when every sample was malformed.
std::optional<double> baseline_bu_from_replies(const std::vector<std::string>& replies,
                                               const std::vector<std::string>& option_labels,
                                               const std::string& predicted);

// ---------------------------------------------------------------------------
// Request builders. Both the query stage and the score stage construct
// byte-identical requests from (instance, config, seed), so a filled cache
// replays with zero network calls.

client::QueryRequest original_request(const McqInstance& instance,
                                      const client::ModelEndpoint& endpoint,
                                      const std::vector<uint8_t>& media_bytes,
                                      const std::string& media_sha256);

client::QueryRequest sample_request(const McqInstance& instance,
                                    const TransformedInput& sample,
                                    const client::ModelEndpoint& endpoint,
                                    const std::vector<uint8_t>& media_bytes,
                                    int flat_replicate);

std::vector<client::QueryRequest> oe_requests(const McqInstance& instance,
                                              const client::ModelEndpoint& endpoint,
                                              const std::vector<uint8_t>& media_bytes,
                                              const std::string& media_sha256,
                                              int n_decodes);

client::QueryRequest vc_request(const McqInstance& instance,
                                const client::ModelEndpoint& endpoint,
                                const std::vector<uint8_t>& media_bytes,
                                const std::string& media_sha256,
                                const std::string& original_answer_text);

std::vector<client::QueryRequest> bu_requests(const McqInstance& instance,
                                              const client::ModelEndpoint& endpoint,
                                              const std::vector<uint8_t>& media_bytes,
                                              const std::string& media_sha256,
                                              int top_k, int n_samples);

enum class IaMode { media, text, both };

std::string to_string(IaMode m);

// Paraphrase provider backed by a model endpoint: each rewrite is one
// completion through the client transport (one stochastic decode per
// variant index).
transforms::ParaphraseProvider model_backed_paraphraser(
    client::QueryBackend& backend, const client::ModelEndpoint& endpoint,
    const std::string& instance_id);

// ---------------------------------------------------------------------------
// Baseline scorers. Each issues its own queries through the backend (cache
// hits when the query stage already ran) and aggregates per its method.

// Entropy over n stochastic decodes of the original input. Throws
// InstanceUnusable when nothing parsed.
double baseline_oe(client::QueryBackend& backend, const client::ModelEndpoint& endpoint,
                   const McqInstance& instance, const std::vector<uint8_t>& media,
                   const std::string& media_sha256, int n_decodes, int max_in_flight);

// Confidence-elicitation turn appended to the original exchange; missing
// when no number in [0, 100] can be parsed from the reply.
std::optional<double> baseline_vc(client::QueryBackend& backend,
                                  const client::ModelEndpoint& endpoint,
                                  const McqInstance& instance,
                                  const std::vector<uint8_t>& media,
                                  const std::string& media_sha256,
                                  const std::string& original_answer_text);

// Entropy over k equivalence-augmented inputs restricted to one modality.
// IA-IT (both modalities) reuses the FES grid; feed those responses to
// prediction_entropy instead of calling this.
double baseline_ia(client::QueryBackend& backend, const client::ModelEndpoint& endpoint,
                   const transforms::TransformConfig& tconfig,
                   const McqInstance& instance, IaMode mode, int k, uint64_t seed,
                   const std::vector<uint8_t>& original_media, int max_in_flight);

// Text rephrasing consistency: same mechanics as IA-T under its own seed
// stream (a distinct baseline in reporting).
double baseline_ru(client::QueryBackend& backend, const client::ModelEndpoint& endpoint,
                   const transforms::TransformConfig& tconfig,
                   const McqInstance& instance, int k, uint64_t seed,
                   const std::vector<uint8_t>& original_media, int max_in_flight);

// Top-k prompting with stochastic output sampling; missing when every
// sample's candidate list is malformed.
std::optional<double> baseline_bu(client::QueryBackend& backend,
                                  const client::ModelEndpoint& endpoint,
                                  const McqInstance& instance,
                                  const std::vector<uint8_t>& media,
                                  const std::string& media_sha256,
                                  const std::string& predicted, int top_k,
                                  int n_samples, int max_in_flight);

// Equivalence-augmented inputs restricted to one modality. Media mode
// regenerates the seeded media-equivalence variants; text mode paraphrases
// over the untouched original media. `method_tag` separates the seed streams
// of IA-T and RU, which share mechanics but are distinct baselines.
std::vector<client::QueryRequest> ia_requests(const McqInstance& instance,
                                              const client::ModelEndpoint& endpoint,
                                              const transforms::TransformConfig& tconfig,
                                              IaMode mode, int k, uint64_t seed,
                                              const std::vector<uint8_t>& original_media,
                                              const std::string& method_tag = "ia");

}  // namespace festa::estimator
