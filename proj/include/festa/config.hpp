#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "festa/client.hpp"
#include "festa/transforms.hpp"

namespace festa {

// Single JSON document covering endpoint, K values, transform ranges, the
// probability floor, seeds and the method list.
struct RunConfig {
  client::ModelEndpoint endpoint;
  // Grid sizes: K1 = k11 x k12 equivalence samples, K2 = k21 x k22
  // complementary samples. Vision defaults; audio presets use 15/4/4/15.
  int k11 = 14;
  int k12 = 4;
  int k21 = 4;
  int k22 = 14;
  double prob_floor = 1e-6;
  uint64_t seed = 0;
  std::vector<std::string> methods = {"festa", "fes",   "fcs", "oe",
                                      "vc",    "ia-i",  "ia-t", "ia-it",
                                      "ru",    "bu",    "entropy-ablation"};
  transforms::TransformConfig transforms;
  int oe_decodes = 20;
  int bu_top_k = 4;
  int bu_n_samples = 5;
  int ru_k = 8;
  int ia_media_k = 0;  // 0 -> k11
  int ia_text_k = 0;   // 0 -> k12
  // Fraction of failed queries above which the run aborts (exit code 3).
  double upstream_failure_threshold = 0.5;
  std::vector<int> sweep_schedule;  // per-family K values; empty -> 4,8,..,k11*k12
  std::string cache_dir;

  int effective_ia_media_k() const { return ia_media_k > 0 ? ia_media_k : k11; }
  int effective_ia_text_k() const { return ia_text_k > 0 ? ia_text_k : k12; }
  std::vector<int> effective_sweep_schedule() const;
  void validate() const;
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& config);
// SHA-256 of the canonical serialization; stamped into every report.
std::string config_fingerprint(const RunConfig& config);

}  // namespace festa
