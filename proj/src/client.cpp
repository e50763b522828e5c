#include "festa/client.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "festa/sha256.hpp"

namespace festa::client {

namespace fs = std::filesystem;
using nlohmann::json;

void ModelEndpoint::validate() const {
  if (base_url.empty()) throw ConfigError("endpoint base_url must be set");
  if (temperature < 0.0 || greedy_temperature < 0.0) {
    throw ConfigError("temperature must be >= 0");
  }
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string upper(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string first_line(const std::string& s) {
  const size_t nl = s.find('\n');
  return nl == std::string::npos ? s : s.substr(0, nl);
}

std::vector<std::string> alnum_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

std::optional<std::string> parse_answer(const std::string& raw_text,
                                        const std::vector<std::string>& option_labels) {
  if (option_labels.empty()) return std::nullopt;
  std::vector<std::string> upper_labels;
  upper_labels.reserve(option_labels.size());
  for (const auto& l : option_labels) upper_labels.push_back(upper(l));

  auto canonical = [&](const std::string& token) -> std::optional<std::string> {
    const std::string t = upper(token);
    for (size_t i = 0; i < upper_labels.size(); ++i) {
      if (upper_labels[i] == t) return option_labels[i];
    }
    return std::nullopt;
  };

  // (1) the entire reply is exactly one label
  if (auto hit = canonical(trim(raw_text))) return hit;

  // (2) leading "X)", "X." or "(X)"
  const std::string line = trim(first_line(raw_text));
  if (!line.empty()) {
    if (line.front() == '(') {
      const size_t close = line.find(')');
      if (close != std::string::npos) {
        if (auto hit = canonical(line.substr(1, close - 1))) return hit;
      }
    } else {
      size_t end = 0;
      while (end < line.size() && std::isalnum(static_cast<unsigned char>(line[end]))) {
        ++end;
      }
      if (end > 0 && end < line.size() && (line[end] == ')' || line[end] == '.')) {
        if (auto hit = canonical(line.substr(0, end))) return hit;
      }
    }
  }

  // (3) a unique label token anywhere in the first line
  std::optional<std::string> found;
  for (const auto& token : alnum_tokens(line)) {
    if (auto hit = canonical(token)) {
      if (found && *found != *hit) return std::nullopt;  // ambiguous
      found = hit;
    }
  }
  return found;
}

std::string render_answer_prompt(const std::string& question,
                                 const std::vector<McqOption>& options) {
  std::string out = question;
  out.push_back('\n');
  for (const auto& o : options) {
    out += o.label + ") " + o.text + "\n";
  }
  out += "Answer with the option letter only.";
  return out;
}

std::string base64_encode(const uint8_t* data, size_t len) {
  static const char* table =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (size_t i = 0; i < len; i += 3) {
    uint32_t v = uint32_t(data[i]) << 16;
    if (i + 1 < len) v |= uint32_t(data[i + 1]) << 8;
    if (i + 2 < len) v |= uint32_t(data[i + 2]);
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(i + 1 < len ? table[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < len ? table[v & 63] : '=');
  }
  return out;
}

namespace {

json canonical_request_json(const std::string& model_id, const QueryRequest& r) {
  json turns = json::array();
  for (const auto& t : r.turns) turns.push_back({{"role", t.role}, {"text", t.text}});
  return json{
      {"model", model_id},
      {"turns", turns},
      {"media", {{"kind", to_string(r.media_kind)}, {"sha256", r.media_sha256}}},
      {"temperature", r.temperature},
      {"max_tokens", r.max_tokens},
      {"replicate_index", r.replicate_index},
  };
}

}  // namespace

std::string cache_key(const std::string& model_id, const QueryRequest& request) {
  return sha256_hex(canonical_request_json(model_id, request).dump());
}

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) fs::create_directories(dir_);
}

std::optional<std::pair<std::string, int>> ResponseCache::lookup(
    const std::string& key) const {
  if (!enabled()) return std::nullopt;
  std::shared_lock lock(mutex_);
  const fs::path path = fs::path(dir_) / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const json doc = json::parse(in);
    return std::make_pair(doc.at("response").at("raw_text").get<std::string>(),
                          doc.at("response").at("http_status").get<int>());
  } catch (const json::exception&) {
    log_warn("discarding corrupt cache entry " + key);
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const QueryRequest& request,
                          const std::string& raw_text, int http_status) const {
  if (!enabled()) return;
  std::unique_lock lock(mutex_);
  json doc{
      {"request", canonical_request_json("", request)},
      {"response", {{"raw_text", raw_text}, {"http_status", http_status}}},
      {"timestamp",
       std::chrono::duration_cast<std::chrono::seconds>(
           std::chrono::system_clock::now().time_since_epoch())
           .count()},
  };
  const fs::path final_path = fs::path(dir_) / (key + ".json");
  const fs::path tmp_path = fs::path(dir_) / (key + ".tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << doc.dump(2) << "\n";
  }
  fs::rename(tmp_path, final_path);  // atomic publish
}

struct HttpBackend::Impl {
  std::atomic<int> network_calls{0};
};

HttpBackend::HttpBackend(ModelEndpoint endpoint, std::string cache_dir)
    : impl_(std::make_unique<Impl>()),
      endpoint_(std::move(endpoint)),
      cache_(std::move(cache_dir)) {
  endpoint_.validate();
}

HttpBackend::~HttpBackend() = default;

int HttpBackend::network_calls() const { return impl_->network_calls.load(); }

ModelResponse HttpBackend::run(const QueryRequest& request,
                               const std::vector<std::string>& option_labels) {
  const std::string key = cache_key(endpoint_.model_id, request);
  ModelResponse resp;

  if (auto cached = cache_.lookup(key)) {
    resp.raw_text = cached->first;
    resp.http_status = cached->second;
    resp.cache_hit = true;
    resp.parsed_label = parse_answer(resp.raw_text, option_labels);
    if (!option_labels.empty() && !resp.parsed_label) {
      resp.status = QueryStatus::parse_failure;
    }
    return resp;
  }

  // Build the wire body: chat-completion JSON with media as a data URI part.
  json body{
      {"model", endpoint_.model_id},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  json messages = json::array();
  for (size_t i = 0; i < request.turns.size(); ++i) {
    const auto& turn = request.turns[i];
    if (i == 0 && request.media_kind != MediaKind::none && !request.media.empty()) {
      const std::string b64 = base64_encode(request.media.data(), request.media.size());
      json parts = json::array();
      parts.push_back({{"type", "text"}, {"text", turn.text}});
      if (request.media_kind == MediaKind::image) {
        parts.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + b64}}}});
      } else {
        parts.push_back({{"type", "input_audio"},
                         {"input_audio", {{"data", b64}, {"format", "wav"}}}});
      }
      messages.push_back({{"role", turn.role}, {"content", parts}});
    } else {
      messages.push_back({{"role", turn.role}, {"content", turn.text}});
    }
  }
  body["messages"] = messages;
  const std::string payload = body.dump();

  httplib::Headers headers = {
      {"X-Festa-Instance", request.instance_id},
      {"X-Festa-Family", to_string(request.family)},
      {"X-Festa-Replicate", std::to_string(request.replicate_index)},
  };
  if (const char* token = std::getenv(endpoint_.token_env.c_str());
      token != nullptr && token[0] != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  const auto t0 = std::chrono::steady_clock::now();
  int backoff = endpoint_.retry.backoff_ms;
  for (int attempt = 1; attempt <= endpoint_.retry.max_attempts; ++attempt) {
    httplib::Client http(endpoint_.base_url);
    http.set_connection_timeout(std::chrono::milliseconds(endpoint_.timeout_ms));
    http.set_read_timeout(std::chrono::milliseconds(endpoint_.timeout_ms));
    impl_->network_calls.fetch_add(1);
    auto result = http.Post("/chat/completions", headers, payload, "application/json");

    const bool transport_fail = !result;
    const int status = transport_fail ? 0 : result->status;
    const bool retryable = transport_fail || status == 429 || status >= 500;
    if (retryable && attempt < endpoint_.retry.max_attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
      continue;
    }
    resp.latency_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    if (transport_fail) {
      resp.status = QueryStatus::transport_error;
      resp.error = "transport failure after " + std::to_string(attempt) + " attempts: " +
                   httplib::to_string(result.error());
      return resp;
    }
    resp.http_status = status;
    if (status < 200 || status >= 300) {
      resp.status = QueryStatus::upstream_error;
      resp.error = "upstream HTTP " + std::to_string(status);
      return resp;
    }
    try {
      const json doc = json::parse(result->body);
      resp.raw_text =
          doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      resp.status = QueryStatus::upstream_error;
      resp.error = std::string("malformed completion body: ") + e.what();
      return resp;
    }
    break;
  }
  resp.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();

  cache_.store(key, request, resp.raw_text, resp.http_status);
  resp.parsed_label = parse_answer(resp.raw_text, option_labels);
  if (!option_labels.empty() && !resp.parsed_label) {
    resp.status = QueryStatus::parse_failure;
  }
  return resp;
}

std::vector<ModelResponse> run_all(QueryBackend& backend,
                                   const std::vector<QueryRequest>& requests,
                                   const std::vector<std::string>& option_labels,
                                   int max_in_flight) {
  std::vector<ModelResponse> out(requests.size());
  if (requests.empty()) return out;
  const int workers =
      std::max(1, std::min<int>(max_in_flight, static_cast<int>(requests.size())));
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= requests.size()) return;
        out[i] = backend.run(requests[i], option_labels);
      }
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace festa::client
