#include "festa/mocks.hpp"

#include <atomic>
#include <bit>
#include <cstdio>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "festa/rng.hpp"

namespace festa::mocks {

using nlohmann::json;

std::string to_string(MockKind k) {
  switch (k) {
    case MockKind::consistent: return "consistent";
    case MockKind::sensitive: return "sensitive";
    case MockKind::ideal: return "ideal";
    case MockKind::mode_collapse: return "mode_collapse";
    case MockKind::noisy: return "noisy";
  }
  return "ideal";
}

MockKind mock_kind_from_string(const std::string& s) {
  if (s == "consistent") return MockKind::consistent;
  if (s == "sensitive") return MockKind::sensitive;
  if (s == "ideal") return MockKind::ideal;
  if (s == "mode_collapse") return MockKind::mode_collapse;
  if (s == "noisy") return MockKind::noisy;
  throw ValidationError("unknown mock profile kind: " + s);
}

PromptKind detect_prompt_kind(const std::string& text) {
  if (text.find("confidence 0-100") != std::string::npos) return PromptKind::confidence;
  if (text.find("candidate answers with confidences") != std::string::npos) {
    return PromptKind::topk;
  }
  if (text.find("Rewrite the question") != std::string::npos) {
    return PromptKind::paraphrase;
  }
  return PromptKind::answer;
}

namespace {

rng::Stream call_stream(const MockProfile& profile, const McqInstance& instance,
                        SampleFamily family, int replicate, double temperature,
                        std::string_view purpose) {
  return rng::Stream(rng::derive(profile.seed, instance.id, to_string(family),
                                 static_cast<uint64_t>(replicate),
                                 std::bit_cast<uint64_t>(temperature), purpose));
}

std::string pick_label(const McqInstance& instance, rng::Stream& stream) {
  const auto labels = instance.option_labels();
  return labels[static_cast<size_t>(
      stream.uniform_int(0, static_cast<int64_t>(labels.size()) - 1))];
}

std::string pick_label_excluding(const McqInstance& instance, rng::Stream& stream,
                                 const std::string& excluded) {
  std::vector<std::string> pool;
  for (const auto& l : instance.option_labels()) {
    if (l != excluded) pool.push_back(l);
  }
  return pool[static_cast<size_t>(
      stream.uniform_int(0, static_cast<int64_t>(pool.size()) - 1))];
}

// The label the profile would answer on the untransformed input; also the
// reference point for "flips" under FCS.
std::string original_answer(const MockProfile& profile, const McqInstance& instance,
                            double temperature) {
  switch (profile.kind) {
    case MockKind::consistent: {
      rng::Stream s(rng::derive(profile.seed, instance.id, "consistent-pick"));
      return pick_label(instance, s);
    }
    case MockKind::sensitive:
    case MockKind::ideal:
      return instance.target_label;
    case MockKind::mode_collapse:
      return profile.collapse_label;
    case MockKind::noisy: {
      auto s = call_stream(profile, instance, SampleFamily::original, 0, temperature,
                           "noisy");
      if (s.next_double() < profile.accuracy) return instance.target_label;
      return pick_label_excluding(instance, s, instance.target_label);
    }
  }
  return instance.target_label;
}

std::string format_confidence_list(const McqInstance& instance,
                                   const std::string& top_label) {
  // 0.7 on the would-be answer, remainder spread over up to three others.
  std::string out;
  char buf[32];
  std::vector<std::string> rest;
  for (const auto& l : instance.option_labels()) {
    if (l != top_label) rest.push_back(l);
  }
  const size_t others = std::min<size_t>(3, rest.size());
  std::snprintf(buf, sizeof(buf), "%.4f", 0.7);
  out += top_label + ": " + buf;
  for (size_t i = 0; i < others; ++i) {
    std::snprintf(buf, sizeof(buf), "%.4f", 0.3 / double(others));
    out += "\n" + rest[i] + ": " + buf;
  }
  return out;
}

std::string extract_question_for_paraphrase(const std::string& prompt) {
  const std::string marker = "Question: ";
  const size_t at = prompt.find(marker);
  if (at == std::string::npos) return prompt;
  std::string q = prompt.substr(at + marker.size());
  const size_t nl = q.find('\n');
  if (nl != std::string::npos) q = q.substr(0, nl);
  return q;
}

}  // namespace

std::string mock_answer(const MockProfile& profile, const McqInstance& instance,
                        SampleFamily family, int replicate, double temperature) {
  const std::string original = original_answer(profile, instance, temperature);
  switch (profile.kind) {
    case MockKind::mode_collapse:
      return profile.collapse_label;
    case MockKind::consistent: {
      if (family != SampleFamily::fcs) return original;
      auto s = call_stream(profile, instance, family, replicate, temperature, "fcs");
      return pick_label(instance, s);  // unmoored under complements
    }
    case MockKind::sensitive:
    case MockKind::ideal: {
      if (family != SampleFamily::fcs) return original;
      auto s = call_stream(profile, instance, family, replicate, temperature, "fcs");
      return pick_label_excluding(instance, s, original);
    }
    case MockKind::noisy: {
      auto s = call_stream(profile, instance, family, replicate, temperature, "noisy");
      if (s.next_double() < profile.accuracy) return instance.target_label;
      return pick_label_excluding(instance, s, instance.target_label);
    }
  }
  return original;
}

std::string mock_reply(const MockProfile& profile, const McqInstance& instance,
                       SampleFamily family, int replicate, double temperature,
                       PromptKind prompt_kind, const std::string& prompt_text) {
  switch (prompt_kind) {
    case PromptKind::answer:
      return mock_answer(profile, instance, family, replicate, temperature);
    case PromptKind::confidence:
      switch (profile.kind) {
        case MockKind::mode_collapse:
          return "95";  // confidently insensitive
        case MockKind::consistent:
          return "90";
        case MockKind::sensitive:
        case MockKind::ideal:
          return "85";
        case MockKind::noisy: {
          auto s = call_stream(profile, instance, family, replicate, temperature,
                               "confidence");
          return std::to_string(50 + s.uniform_int(0, 50));
        }
      }
      return "50";
    case PromptKind::topk:
      return format_confidence_list(
          instance, mock_answer(profile, instance, family, replicate, temperature));
    case PromptKind::paraphrase:
      return "Variant " + std::to_string(replicate) + ": " +
             extract_question_for_paraphrase(prompt_text);
  }
  return "";
}

// ---------------------------------------------------------------------------

namespace {

std::map<std::string, McqInstance> index_dataset(std::vector<McqInstance> dataset) {
  std::map<std::string, McqInstance> out;
  for (auto& inst : dataset) {
    inst.validate();
    const std::string id = inst.id;
    out.emplace(id, std::move(inst));
  }
  return out;
}

std::string instance_id_from_prompt(const std::string& prompt) {
  const std::string marker = "[instance: ";
  const size_t at = prompt.find(marker);
  if (at == std::string::npos) return "";
  const size_t end = prompt.find(']', at);
  if (end == std::string::npos) return "";
  return prompt.substr(at + marker.size(), end - at - marker.size());
}

// Pulls the text of the last user turn, whether content is a plain string
// or a multimodal parts array.
std::string last_user_text(const json& body) {
  if (!body.contains("messages") || !body["messages"].is_array()) return "";
  for (auto it = body["messages"].rbegin(); it != body["messages"].rend(); ++it) {
    if (!it->is_object() || (*it).value("role", "") != "user") continue;
    const auto& content = (*it)["content"];
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      for (const auto& part : content) {
        if (part.value("type", "") == "text") return part.value("text", "");
      }
    }
    return "";
  }
  return "";
}

}  // namespace

struct MockServer::Impl {
  httplib::Server server;
  std::thread thread;
  std::atomic<int> requests{0};
  std::atomic<bool> running{false};
};

MockServer::MockServer(MockProfile profile, std::vector<McqInstance> dataset)
    : impl_(std::make_unique<Impl>()),
      profile_(profile),
      instances_(index_dataset(std::move(dataset))) {}

MockServer::~MockServer() { stop(); }

int MockServer::start(int port) {
  auto& svr = impl_->server;

  svr.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"requests", impl_->requests.load()}}.dump(), "application/json");
  });

  svr.Post("/chat/completions", [this](const httplib::Request& req,
                                       httplib::Response& res) {
    const int call_index = impl_->requests.fetch_add(1);
    if (profile_.fault_rate > 0.0) {
      rng::Stream s(rng::derive(profile_.seed, "fault", static_cast<uint64_t>(call_index)));
      if (s.next_double() < profile_.fault_rate) {
        res.status = 503;
        res.set_content(json{{"error", "injected fault"}}.dump(), "application/json");
        return;
      }
    }

    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      res.status = 400;
      res.set_content(json{{"error", "bad request body"}}.dump(), "application/json");
      return;
    }
    const std::string text = last_user_text(body);

    std::string id = req.get_header_value("X-Festa-Instance");
    if (id.empty()) id = instance_id_from_prompt(text);
    const auto it = instances_.find(id);
    if (it == instances_.end()) {
      res.status = 404;
      res.set_content(json{{"error", "unknown instance id: " + id}}.dump(),
                      "application/json");
      return;
    }

    SampleFamily family = SampleFamily::original;
    const std::string family_header = req.get_header_value("X-Festa-Family");
    if (!family_header.empty()) family = family_from_string(family_header);
    int replicate = 0;
    const std::string replicate_header = req.get_header_value("X-Festa-Replicate");
    if (!replicate_header.empty()) replicate = std::stoi(replicate_header);
    const double temperature = body.value("temperature", 0.0);

    const std::string reply =
        mock_reply(profile_, it->second, family, replicate, temperature,
                   detect_prompt_kind(text), text);
    const json out{
        {"id", "mock-" + std::to_string(call_index)},
        {"object", "chat.completion"},
        {"model", body.value("model", "mock")},
        {"choices",
         json::array({json{{"index", 0},
                           {"message", {{"role", "assistant"}, {"content", reply}}},
                           {"finish_reason", "stop"}}})},
    };
    res.set_content(out.dump(), "application/json");
  });

  const int bound = port == 0 ? svr.bind_to_any_port("127.0.0.1")
                              : (svr.bind_to_port("127.0.0.1", port) ? port : -1);
  if (bound <= 0) throw TransportError("mock server failed to bind port");
  port_ = bound;
  impl_->running = true;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  svr.wait_until_ready();
  return port_;
}

void MockServer::stop() {
  if (!impl_ || !impl_->running.exchange(false)) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

int MockServer::request_count() const { return impl_->requests.load(); }

MockBackend::MockBackend(MockProfile profile, std::vector<McqInstance> dataset)
    : profile_(profile), instances_(index_dataset(std::move(dataset))) {}

client::ModelResponse MockBackend::run(const client::QueryRequest& request,
                                       const std::vector<std::string>& option_labels) {
  client::ModelResponse resp;
  const auto it = instances_.find(request.instance_id);
  if (it == instances_.end()) {
    resp.status = client::QueryStatus::upstream_error;
    resp.http_status = 404;
    resp.error = "unknown instance id: " + request.instance_id;
    return resp;
  }
  std::string text;
  for (auto turn = request.turns.rbegin(); turn != request.turns.rend(); ++turn) {
    if (turn->role == "user") {
      text = turn->text;
      break;
    }
  }
  resp.raw_text =
      mock_reply(profile_, it->second, request.family, request.replicate_index,
                 request.temperature, detect_prompt_kind(text), text);
  resp.parsed_label = client::parse_answer(resp.raw_text, option_labels);
  if (!option_labels.empty() && !resp.parsed_label) {
    resp.status = client::QueryStatus::parse_failure;
  }
  return resp;
}

}  // namespace festa::mocks
