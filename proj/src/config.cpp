#include "festa/config.hpp"

#include <fstream>

#include "json.hpp"

#include "festa/eval.hpp"
#include "festa/sha256.hpp"

namespace festa {

using nlohmann::json;

std::vector<int> RunConfig::effective_sweep_schedule() const {
  if (!sweep_schedule.empty()) return sweep_schedule;
  std::vector<int> out;
  const int full = std::min(k11 * k12, k21 * k22);
  for (int k = 4; k <= full; k += 4) out.push_back(k);
  if (out.empty() || out.back() != full) out.push_back(full);
  return out;
}

void RunConfig::validate() const {
  endpoint.validate();
  if (k11 < 1 || k12 < 1 || k21 < 1 || k22 < 1) {
    throw ConfigError("all K values must be >= 1");
  }
  if (prob_floor < 0.0 || prob_floor >= 1.0) {
    throw ConfigError("prob_floor must be in [0, 1)");
  }
  if (oe_decodes < 1) throw ConfigError("oe_decodes must be >= 1");
  if (bu_top_k < 1 || bu_n_samples < 1) throw ConfigError("bu parameters must be >= 1");
  if (ru_k < 1) throw ConfigError("ru_k must be >= 1");
  if (upstream_failure_threshold < 0.0 || upstream_failure_threshold > 1.0) {
    throw ConfigError("upstream_failure_threshold must be in [0, 1]");
  }
  eval::validate_methods(methods);
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  if (j.contains("endpoint")) {
    const json& e = j.at("endpoint");
    maybe(e, "base_url", c.endpoint.base_url);
    maybe(e, "model_id", c.endpoint.model_id);
    maybe(e, "token_env", c.endpoint.token_env);
    maybe(e, "temperature", c.endpoint.temperature);
    maybe(e, "greedy_temperature", c.endpoint.greedy_temperature);
    maybe(e, "max_tokens", c.endpoint.max_tokens);
    maybe(e, "timeout_ms", c.endpoint.timeout_ms);
    maybe(e, "max_in_flight", c.endpoint.max_in_flight);
    if (e.contains("retry")) {
      maybe(e.at("retry"), "max_attempts", c.endpoint.retry.max_attempts);
      maybe(e.at("retry"), "backoff_ms", c.endpoint.retry.backoff_ms);
    }
  }
  maybe(j, "k11", c.k11);
  maybe(j, "k12", c.k12);
  maybe(j, "k21", c.k21);
  maybe(j, "k22", c.k22);
  maybe(j, "prob_floor", c.prob_floor);
  maybe(j, "seed", c.seed);
  maybe(j, "methods", c.methods);
  if (j.contains("transforms")) {
    const json& t = j.at("transforms");
    auto& tc = c.transforms;
    maybe(t, "contrast_lo", tc.contrast_lo);
    maybe(t, "contrast_hi", tc.contrast_hi);
    maybe(t, "blur_radius_max", tc.blur_radius_max);
    maybe(t, "noise_sigma_max", tc.noise_sigma_max);
    maybe(t, "mask_fraction_max", tc.mask_fraction_max);
    maybe(t, "rotate_deg_max", tc.rotate_deg_max);
    maybe(t, "shift_fraction_max", tc.shift_fraction_max);
    maybe(t, "silence_max_s", tc.silence_max_s);
    maybe(t, "volume_gain_lo", tc.volume_gain_lo);
    maybe(t, "volume_gain_hi", tc.volume_gain_hi);
    maybe(t, "added_event_s", tc.added_event_s);
    if (t.contains("fcs_modality")) {
      tc.fcs_modality =
          transforms::fcs_modality_from_string(t.at("fcs_modality").get<std::string>());
    }
    maybe(t, "event_library_dir", tc.event_library_dir);
  }
  maybe(j, "oe_decodes", c.oe_decodes);
  maybe(j, "bu_top_k", c.bu_top_k);
  maybe(j, "bu_n_samples", c.bu_n_samples);
  maybe(j, "ru_k", c.ru_k);
  maybe(j, "ia_media_k", c.ia_media_k);
  maybe(j, "ia_text_k", c.ia_text_k);
  maybe(j, "upstream_failure_threshold", c.upstream_failure_threshold);
  maybe(j, "sweep_schedule", c.sweep_schedule);
  maybe(j, "cache_dir", c.cache_dir);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

std::string config_to_json_text(const RunConfig& c) {
  const json j{
      {"endpoint",
       {{"base_url", c.endpoint.base_url},
        {"model_id", c.endpoint.model_id},
        {"token_env", c.endpoint.token_env},
        {"temperature", c.endpoint.temperature},
        {"greedy_temperature", c.endpoint.greedy_temperature},
        {"max_tokens", c.endpoint.max_tokens},
        {"timeout_ms", c.endpoint.timeout_ms},
        {"max_in_flight", c.endpoint.max_in_flight},
        {"retry",
         {{"max_attempts", c.endpoint.retry.max_attempts},
          {"backoff_ms", c.endpoint.retry.backoff_ms}}}}},
      {"k11", c.k11},
      {"k12", c.k12},
      {"k21", c.k21},
      {"k22", c.k22},
      {"prob_floor", c.prob_floor},
      {"seed", c.seed},
      {"methods", c.methods},
      {"transforms",
       {{"contrast_lo", c.transforms.contrast_lo},
        {"contrast_hi", c.transforms.contrast_hi},
        {"blur_radius_max", c.transforms.blur_radius_max},
        {"noise_sigma_max", c.transforms.noise_sigma_max},
        {"mask_fraction_max", c.transforms.mask_fraction_max},
        {"rotate_deg_max", c.transforms.rotate_deg_max},
        {"shift_fraction_max", c.transforms.shift_fraction_max},
        {"silence_max_s", c.transforms.silence_max_s},
        {"volume_gain_lo", c.transforms.volume_gain_lo},
        {"volume_gain_hi", c.transforms.volume_gain_hi},
        {"added_event_s", c.transforms.added_event_s},
        {"fcs_modality", transforms::to_string(c.transforms.fcs_modality)},
        {"event_library_dir", c.transforms.event_library_dir}}},
      {"oe_decodes", c.oe_decodes},
      {"bu_top_k", c.bu_top_k},
      {"bu_n_samples", c.bu_n_samples},
      {"ru_k", c.ru_k},
      {"ia_media_k", c.ia_media_k},
      {"ia_text_k", c.ia_text_k},
      {"upstream_failure_threshold", c.upstream_failure_threshold},
      {"sweep_schedule", c.sweep_schedule},
      {"cache_dir", c.cache_dir},
  };
  return j.dump(2) + "\n";
}

std::string config_fingerprint(const RunConfig& c) {
  // Scoring-relevant fields only. Machine-local wiring (base_url, cache_dir,
  // timeouts, retry budgets) is excluded so identical experiments fingerprint
  // identically across hosts.
  const json j{
      {"model_id", c.endpoint.model_id},
      {"temperature", c.endpoint.temperature},
      {"greedy_temperature", c.endpoint.greedy_temperature},
      {"max_tokens", c.endpoint.max_tokens},
      {"k", {c.k11, c.k12, c.k21, c.k22}},
      {"prob_floor", c.prob_floor},
      {"seed", c.seed},
      {"methods", c.methods},
      {"transforms",
       {{"contrast", {c.transforms.contrast_lo, c.transforms.contrast_hi}},
        {"blur_radius_max", c.transforms.blur_radius_max},
        {"noise_sigma_max", c.transforms.noise_sigma_max},
        {"mask_fraction_max", c.transforms.mask_fraction_max},
        {"rotate_deg_max", c.transforms.rotate_deg_max},
        {"shift_fraction_max", c.transforms.shift_fraction_max},
        {"silence_max_s", c.transforms.silence_max_s},
        {"volume_gain", {c.transforms.volume_gain_lo, c.transforms.volume_gain_hi}},
        {"added_event_s", c.transforms.added_event_s},
        {"fcs_modality", transforms::to_string(c.transforms.fcs_modality)}}},
      {"oe_decodes", c.oe_decodes},
      {"bu", {c.bu_top_k, c.bu_n_samples}},
      {"ru_k", c.ru_k},
      {"ia_k", {c.effective_ia_media_k(), c.effective_ia_text_k()}},
      {"sweep_schedule", c.sweep_schedule},
  };
  return sha256_hex(j.dump());
}

}  // namespace festa
