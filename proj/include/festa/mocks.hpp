#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "festa/client.hpp"
#include "festa/types.hpp"

// Behavioral model simulators. Mocks read the sample family from sideband
// headers instead of perceiving media: they exist to exercise the estimator,
// not to solve tasks.
namespace festa::mocks {

enum class MockKind { consistent, sensitive, ideal, mode_collapse, noisy };

std::string to_string(MockKind k);
MockKind mock_kind_from_string(const std::string& s);

struct MockProfile {
  MockKind kind = MockKind::ideal;
  double accuracy = 0.5;             // noisy: P(answer = target) per call
  std::string collapse_label = "A";  // mode_collapse: the only answer ever given
  uint64_t seed = 0;
  double fault_rate = 0.0;           // server-side injected 503 fraction
};

// Elicitation prompts are recognized by their documented instruction text.
enum class PromptKind { answer, confidence, topk, paraphrase };

PromptKind detect_prompt_kind(const std::string& last_user_text);

// The option-label answer for one call. Deterministic in
// (profile.seed, instance id, family, replicate, temperature), so
// concurrency never changes results.
std::string mock_answer(const MockProfile& profile, const McqInstance& instance,
                        SampleFamily family, int replicate, double temperature);

// Full reply for any prompt kind (labels, verbalized confidence, top-k
// candidate lists, paraphrases).
std::string mock_reply(const MockProfile& profile, const McqInstance& instance,
                       SampleFamily family, int replicate, double temperature,
                       PromptKind prompt_kind, const std::string& prompt_text);

// Serves the client wire protocol over HTTP. Instances are identified by the
// X-Festa-Instance header (an "[instance: <id>]" tag in the prompt works as a
// fallback); unknown ids get a 404. GET /stats reports the request count.
class MockServer {
 public:
  MockServer(MockProfile profile, std::vector<McqInstance> dataset);
  ~MockServer();

  // Binds 127.0.0.1:port (port 0 picks a free one) and serves on a
  // background thread. Returns the bound port.
  int start(int port = 0);
  void stop();  // clean and idempotent
  std::string base_url() const;
  int port() const { return port_; }
  int request_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  MockProfile profile_;
  std::map<std::string, McqInstance> instances_;
  int port_ = 0;
};

// In-process backend with identical behavior to a served mock; lets scoring
// paths run without the wire when a test doesn't need it.
class MockBackend : public client::QueryBackend {
 public:
  MockBackend(MockProfile profile, std::vector<McqInstance> dataset);
  client::ModelResponse run(const client::QueryRequest& request,
                            const std::vector<std::string>& option_labels) override;

 private:
  MockProfile profile_;
  std::map<std::string, McqInstance> instances_;
};

}  // namespace festa::mocks
