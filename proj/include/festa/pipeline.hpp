#pragma once

#include <string>
#include <vector>

#include "festa/client.hpp"
#include "festa/config.hpp"
#include "festa/eval.hpp"
#include "festa/manifest.hpp"
#include "festa/types.hpp"

// Pipeline stages. Each stage consumes only the previous stage's declared
// artifacts (dataset + config + out_dir contents), so stages can run on
// different machines sharing the directory.
namespace festa::pipeline {

// Artifact layout under one output directory.
struct OutPaths {
  explicit OutPaths(std::string out_dir) : dir(std::move(out_dir)) {}
  std::string dir;
  std::string fes_manifest() const { return dir + "/fes_samples.jsonl"; }
  std::string fcs_manifest() const { return dir + "/fcs_samples.jsonl"; }
  std::string media_dir() const { return dir + "/media"; }
  std::string skip_log() const { return dir + "/skips.jsonl"; }
  std::string records() const { return dir + "/records.jsonl"; }
  std::string report_json() const { return dir + "/report.json"; }
  std::string report_csv() const { return dir + "/report.csv"; }
  std::string scatter_csv() const { return dir + "/scatter.csv"; }
  std::string risk_coverage_csv() const { return dir + "/risk_coverage.csv"; }
  std::string risk_coverage_svg() const { return dir + "/risk_coverage.svg"; }
  std::string sweep_json() const { return dir + "/sweep.json"; }
  std::string sweep_csv() const { return dir + "/sweep.csv"; }
  std::string sweep_svg() const { return dir + "/sweep.svg"; }
};

struct GenerateStats {
  int instances = 0;
  int fes_samples = 0;
  int fcs_samples = 0;
  int fcs_skipped = 0;
};

// Writes FES/FCS sample manifests plus content-addressed staged media.
// Idempotent for a fixed seed.
GenerateStats run_generate(const std::vector<McqInstance>& instances,
                           const RunConfig& config, const std::string& out_dir);

struct QueryStats {
  int total = 0;
  int network_calls = 0;
  int cache_hits = 0;
  int transport_errors = 0;
  int upstream_errors = 0;
  int parse_failures = 0;
};

// Fills the response cache for every request the score stage will replay.
// Resumable; throws UpstreamError when the failure fraction exceeds the
// configured threshold.
QueryStats run_query(const std::vector<McqInstance>& instances, const RunConfig& config,
                     const std::string& out_dir, client::QueryBackend& backend);

struct ScoreResult {
  std::vector<UncertaintyRecord> records;
  int skipped = 0;
};

// One record per usable instance; writes records.jsonl.
ScoreResult run_score(const std::vector<McqInstance>& instances, const RunConfig& config,
                      const std::string& out_dir, client::QueryBackend& backend);

// Emits report.json/report.csv plus scatter and risk-coverage exports.
eval::EvalReport run_evaluate(const std::vector<UncertaintyRecord>& records,
                              const RunConfig& config, const std::string& out_dir,
                              bool svg = false);

// AUROC per (method, K) over truncated grids; K values are per family.
// Writes sweep.json/sweep.csv. Only grid-dependent methods participate.
eval::SweepTable run_sweep(const std::vector<McqInstance>& instances,
                           const RunConfig& config, const std::string& out_dir,
                           client::QueryBackend& backend,
                           const std::vector<int>& schedule, bool svg = false);

}  // namespace festa::pipeline
