#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "festa/types.hpp"

namespace festa::client {

struct RetryPolicy {
  int max_attempts = 3;
  int backoff_ms = 100;  // doubles per attempt
};

// Black-box chat-completion endpoint. Auth token is read from the named
// environment variable, never stored in config files.
struct ModelEndpoint {
  std::string base_url;   // e.g. http://127.0.0.1:8080
  std::string model_id = "default";
  std::string token_env = "FESTA_API_TOKEN";
  double temperature = 0.7;        // stochastic decodes of transformed samples
  double greedy_temperature = 0.0; // the original prediction
  int max_tokens = 16;
  int timeout_ms = 30000;
  RetryPolicy retry;
  int max_in_flight = 8;

  void validate() const;
};

struct ChatTurn {
  std::string role;  // "user" | "assistant"
  std::string text;
};

// One model call: rendered prompt turns plus sideband identity used for
// caching and for the behavioral mock server.
struct QueryRequest {
  std::string instance_id;
  SampleFamily family = SampleFamily::original;
  int replicate_index = 0;
  std::vector<ChatTurn> turns;
  std::vector<uint8_t> media;  // raw payload, base64-encoded on the wire
  MediaKind media_kind = MediaKind::none;
  std::string media_sha256;    // empty when media is empty
  double temperature = 0.0;
  int max_tokens = 16;
};

enum class QueryStatus { ok, parse_failure, transport_error, upstream_error };

struct ModelResponse {
  std::string raw_text;
  std::optional<std::string> parsed_label;
  QueryStatus status = QueryStatus::ok;
  double latency_ms = 0.0;
  bool cache_hit = false;
  int http_status = 0;
  std::string error;

  bool usable() const { return status == QueryStatus::ok && parsed_label.has_value(); }
};

// Extraction precedence: (1) the whole reply is exactly one label;
// (2) a leading "X)", "X." or "(X)" pattern; (3) a unique label token
// anywhere in the first line. Case-insensitive. Two labels matching at the
// same precedence is a parse failure.
std::optional<std::string> parse_answer(const std::string& raw_text,
                                        const std::vector<std::string>& option_labels);

// Renders question + enumerated options + the answer instruction.
std::string render_answer_prompt(const std::string& question,
                                 const std::vector<McqOption>& options);

// 256-bit digest of the canonical request serialization; any field change
// changes the key.
std::string cache_key(const std::string& model_id, const QueryRequest& request);

// Disk cache: one file per key under cache_dir, filename = hex digest,
// content = canonical JSON {request, response, timestamp}. Concurrent reads;
// serialized writes; a completed write is immediately visible.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::string dir);

  bool enabled() const { return !dir_.empty(); }
  std::optional<std::pair<std::string, int>> lookup(const std::string& key) const;
  void store(const std::string& key, const QueryRequest& request,
             const std::string& raw_text, int http_status) const;

 private:
  std::string dir_;
  mutable std::shared_mutex mutex_;
};

// Transport abstraction so scoring can run against a live HTTP endpoint or
// an in-process simulator interchangeably.
class QueryBackend {
 public:
  virtual ~QueryBackend() = default;
  // Performs (or replays) one query. When option_labels is non-empty the
  // reply is parsed into a label; parse failures are recorded, never thrown.
  virtual ModelResponse run(const QueryRequest& request,
                            const std::vector<std::string>& option_labels) = 0;
  virtual int network_calls() const { return 0; }
};

// HTTP/1.1 POST {base_url}/chat/completions with a chat-style JSON body;
// media travels as a base64 data-URI content part. Thread-safe up to the
// endpoint's max_in_flight.
class HttpBackend : public QueryBackend {
 public:
  HttpBackend(ModelEndpoint endpoint, std::string cache_dir = "");
  ~HttpBackend() override;

  ModelResponse run(const QueryRequest& request,
                    const std::vector<std::string>& option_labels) override;
  int network_calls() const override;

  const ModelEndpoint& endpoint() const { return endpoint_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ModelEndpoint endpoint_;
  ResponseCache cache_;
};

// Runs all requests through the backend with at most max_in_flight worker
// threads; the result order matches the request order.
std::vector<ModelResponse> run_all(QueryBackend& backend,
                                   const std::vector<QueryRequest>& requests,
                                   const std::vector<std::string>& option_labels,
                                   int max_in_flight);

std::string base64_encode(const uint8_t* data, size_t len);

}  // namespace festa::client
