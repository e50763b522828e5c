#include "festa/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "json.hpp"

#include "festa/estimator.hpp"
#include "festa/rng.hpp"
#include "festa/sha256.hpp"
#include "festa/transforms.hpp"

namespace festa::pipeline {

namespace fs = std::filesystem;
using client::ModelResponse;
using client::QueryRequest;
using nlohmann::json;

namespace {

bool wants(const RunConfig& config, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (std::find(config.methods.begin(), config.methods.end(), n) !=
        config.methods.end()) {
      return true;
    }
  }
  return false;
}

bool need_fes_grid(const RunConfig& c) {
  return wants(c, {"festa", "fes", "ia-it", "entropy-ablation"});
}

bool need_fcs_grid(const RunConfig& c) {
  return wants(c, {"festa", "fcs", "entropy-ablation"});
}

void write_bytes_if_absent(const fs::path& path, const std::vector<uint8_t>& bytes) {
  if (fs::exists(path)) return;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  fs::rename(tmp, path);
}

std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

// Memoizing media loader shared across one stage invocation.
class MediaStore {
 public:
  explicit MediaStore(std::string out_dir) : out_dir_(std::move(out_dir)) {}

  const std::vector<uint8_t>& original(const McqInstance& instance) {
    if (instance.media.kind == MediaKind::none || instance.media.path.empty()) {
      return empty_;
    }
    return get(instance.media.path);
  }

  const std::string& original_sha(const McqInstance& instance) {
    if (instance.media.kind == MediaKind::none || instance.media.path.empty()) {
      static const std::string none;
      return none;
    }
    auto it = shas_.find(instance.media.path);
    if (it == shas_.end()) {
      it = shas_.emplace(instance.media.path, sha256_hex(original(instance))).first;
    }
    return it->second;
  }

  const std::vector<uint8_t>& staged(const std::string& relative_path) {
    return get(out_dir_ + "/" + relative_path);
  }

 private:
  const std::vector<uint8_t>& get(const std::string& path) {
    auto it = files_.find(path);
    if (it == files_.end()) it = files_.emplace(path, read_bytes(path)).first;
    return it->second;
  }
  std::string out_dir_;
  std::map<std::string, std::vector<uint8_t>> files_;
  std::map<std::string, std::string> shas_;
  const std::vector<uint8_t> empty_;
};

struct Job {
  QueryRequest request;
  std::vector<std::string> labels;
};

std::vector<ModelResponse> run_jobs(client::QueryBackend& backend,
                                    const std::vector<Job>& jobs, int max_in_flight) {
  std::vector<ModelResponse> out(jobs.size());
  if (jobs.empty()) return out;
  const int workers =
      std::max(1, std::min<int>(max_in_flight, static_cast<int>(jobs.size())));
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        out[i] = backend.run(jobs[i].request, jobs[i].labels);
      }
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

// Samples grouped per instance, preserving manifest (generation) order.
std::map<std::string, std::vector<TransformedInput>> group_samples(
    const std::vector<TransformedInput>& samples) {
  std::map<std::string, std::vector<TransformedInput>> out;
  for (const auto& s : samples) out[s.parent_id].push_back(s);
  return out;
}

QueryRequest make_sample_request(const McqInstance& instance,
                                 const TransformedInput& sample,
                                 const RunConfig& config, MediaStore& media,
                                 int axis2_len) {
  const std::vector<uint8_t> empty;
  const std::vector<uint8_t>& bytes =
      sample.media_path.empty() ? empty : media.staged(sample.media_path);
  return estimator::sample_request(instance, sample, config.endpoint, bytes,
                                   sample.flat_index(axis2_len));
}

struct InstancePlan {
  const McqInstance* instance = nullptr;
  std::vector<TransformedInput> fes;
  std::vector<TransformedInput> fcs;
};

std::vector<InstancePlan> build_plans(const std::vector<McqInstance>& instances,
                                      const RunConfig& config, const OutPaths& paths) {
  std::map<std::string, std::vector<TransformedInput>> fes_by_id;
  std::map<std::string, std::vector<TransformedInput>> fcs_by_id;
  if (need_fes_grid(config) && fs::exists(paths.fes_manifest())) {
    fes_by_id = group_samples(manifest::load_samples(paths.fes_manifest()));
  }
  if (need_fcs_grid(config) && fs::exists(paths.fcs_manifest())) {
    fcs_by_id = group_samples(manifest::load_samples(paths.fcs_manifest()));
  }
  std::vector<InstancePlan> plans;
  plans.reserve(instances.size());
  for (const auto& inst : instances) {
    InstancePlan plan;
    plan.instance = &inst;
    if (auto it = fes_by_id.find(inst.id); it != fes_by_id.end()) {
      plan.fes = std::move(it->second);
    }
    if (auto it = fcs_by_id.find(inst.id); it != fcs_by_id.end()) {
      plan.fcs = std::move(it->second);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

}  // namespace

GenerateStats run_generate(const std::vector<McqInstance>& instances,
                           const RunConfig& config, const std::string& out_dir) {
  config.validate();
  const OutPaths paths(out_dir);
  fs::create_directories(paths.media_dir());
  fs::remove(paths.skip_log());

  GenerateStats stats;
  std::vector<TransformedInput> all_fes;
  std::vector<TransformedInput> all_fcs;
  for (const auto& inst : instances) {
    inst.validate();
    ++stats.instances;
    // content-addressed staging: filename = SHA-256 of the payload
    auto stage = [&](std::vector<TransformedInput>& samples) {
      for (auto& s : samples) {
        if (s.media_bytes.empty()) continue;
        write_bytes_if_absent(fs::path(paths.media_dir()) / s.media_sha256,
                              s.media_bytes);
        s.media_path = "media/" + s.media_sha256;
        s.media_bytes.clear();  // manifests reference the staged payload
      }
    };

    auto fes = transforms::generate_fes_set(inst, config.k11, config.k12,
                                            config.transforms, config.seed);
    stage(fes);
    stats.fes_samples += static_cast<int>(fes.size());
    all_fes.insert(all_fes.end(), fes.begin(), fes.end());

    try {
      auto fcs = transforms::generate_fcs_set(inst, config.k21, config.k22,
                                              config.transforms, config.seed);
      stage(fcs);
      stats.fcs_samples += static_cast<int>(fcs.size());
      all_fcs.insert(all_fcs.end(), fcs.begin(), fcs.end());
    } catch (const NotComplementable& e) {
      manifest::append_skip({inst.id, "generate", e.what()}, paths.skip_log());
      ++stats.fcs_skipped;
    }
  }
  manifest::save_samples(all_fes, paths.fes_manifest());
  manifest::save_samples(all_fcs, paths.fcs_manifest());
  return stats;
}

QueryStats run_query(const std::vector<McqInstance>& instances, const RunConfig& config,
                     const std::string& out_dir, client::QueryBackend& backend) {
  config.validate();
  const OutPaths paths(out_dir);
  MediaStore media(out_dir);
  const auto plans = build_plans(instances, config, paths);
  const int before_network = backend.network_calls();

  // Phase 1: original predictions (always needed; VC chains off them).
  std::vector<Job> originals;
  originals.reserve(plans.size());
  for (const auto& plan : plans) {
    const auto& inst = *plan.instance;
    originals.push_back({estimator::original_request(inst, config.endpoint,
                                                     media.original(inst),
                                                     media.original_sha(inst)),
                         inst.option_labels()});
  }
  const auto original_responses =
      run_jobs(backend, originals, config.endpoint.max_in_flight);

  // Phase 2: everything else.
  std::vector<Job> jobs;
  for (size_t p = 0; p < plans.size(); ++p) {
    const auto& plan = plans[p];
    const auto& inst = *plan.instance;
    const auto labels = inst.option_labels();
    const auto& orig_bytes = media.original(inst);
    const std::string& orig_sha = media.original_sha(inst);

    for (const auto& s : plan.fes) {
      jobs.push_back({make_sample_request(inst, s, config, media, config.k12), labels});
    }
    for (const auto& s : plan.fcs) {
      jobs.push_back({make_sample_request(inst, s, config, media, config.k22), labels});
    }
    if (wants(config, {"oe"})) {
      for (auto& r : estimator::oe_requests(inst, config.endpoint, orig_bytes, orig_sha,
                                            config.oe_decodes)) {
        jobs.push_back({std::move(r), labels});
      }
    }
    if (wants(config, {"vc"}) && original_responses[p].status == client::QueryStatus::ok) {
      jobs.push_back({estimator::vc_request(inst, config.endpoint, orig_bytes, orig_sha,
                                            original_responses[p].raw_text),
                      {}});
    }
    if (wants(config, {"bu"})) {
      for (auto& r : estimator::bu_requests(inst, config.endpoint, orig_bytes, orig_sha,
                                            config.bu_top_k, config.bu_n_samples)) {
        jobs.push_back({std::move(r), {}});
      }
    }
    if (wants(config, {"ia-i"}) && inst.media.kind != MediaKind::none) {
      for (auto& r : estimator::ia_requests(inst, config.endpoint, config.transforms,
                                            estimator::IaMode::media,
                                            config.effective_ia_media_k(), config.seed,
                                            orig_bytes, "ia")) {
        jobs.push_back({std::move(r), labels});
      }
    }
    if (wants(config, {"ia-t"})) {
      for (auto& r : estimator::ia_requests(inst, config.endpoint, config.transforms,
                                            estimator::IaMode::text,
                                            config.effective_ia_text_k(), config.seed,
                                            orig_bytes, "ia")) {
        jobs.push_back({std::move(r), labels});
      }
    }
    if (wants(config, {"ru"})) {
      for (auto& r : estimator::ia_requests(inst, config.endpoint, config.transforms,
                                            estimator::IaMode::text, config.ru_k,
                                            config.seed, orig_bytes, "ru")) {
        jobs.push_back({std::move(r), labels});
      }
    }
  }
  const auto responses = run_jobs(backend, jobs, config.endpoint.max_in_flight);

  QueryStats stats;
  auto account = [&stats](const ModelResponse& r) {
    ++stats.total;
    if (r.cache_hit) ++stats.cache_hits;
    switch (r.status) {
      case client::QueryStatus::transport_error: ++stats.transport_errors; break;
      case client::QueryStatus::upstream_error: ++stats.upstream_errors; break;
      case client::QueryStatus::parse_failure: ++stats.parse_failures; break;
      case client::QueryStatus::ok: break;
    }
  };
  for (const auto& r : original_responses) account(r);
  for (const auto& r : responses) account(r);
  stats.network_calls = backend.network_calls() - before_network;

  const int failures = stats.transport_errors + stats.upstream_errors;
  if (stats.total > 0 &&
      double(failures) / double(stats.total) > config.upstream_failure_threshold) {
    throw UpstreamError(0, "failure fraction " +
                               std::to_string(double(failures) / double(stats.total)) +
                               " exceeds threshold");
  }
  return stats;
}

namespace {

std::optional<double> try_entropy(const std::vector<ModelResponse>& responses,
                                  const std::vector<std::string>& labels) {
  try {
    return estimator::prediction_entropy(responses, labels);
  } catch (const InstanceUnusable&) {
    return std::nullopt;
  }
}

}  // namespace

ScoreResult run_score(const std::vector<McqInstance>& instances, const RunConfig& config,
                      const std::string& out_dir, client::QueryBackend& backend) {
  config.validate();
  const OutPaths paths(out_dir);
  MediaStore media(out_dir);
  const auto plans = build_plans(instances, config, paths);

  ScoreResult result;
  for (const auto& plan : plans) {
    const auto& inst = *plan.instance;
    const auto labels = inst.option_labels();
    const auto& orig_bytes = media.original(inst);
    const std::string& orig_sha = media.original_sha(inst);

    const ModelResponse original = backend.run(
        estimator::original_request(inst, config.endpoint, orig_bytes, orig_sha), labels);
    if (!original.usable()) {
      manifest::append_skip({inst.id, "score",
                             "original prediction unusable: " +
                                 (original.error.empty() ? std::string("parse failure")
                                                         : original.error)},
                            paths.skip_log());
      ++result.skipped;
      continue;
    }
    const std::string predicted = *original.parsed_label;

    UncertaintyRecord rec;
    rec.instance_id = inst.id;
    rec.predicted_label = predicted;
    rec.correct = predicted == inst.target_label;
    rec.k_used = {config.k11, config.k12, config.k21, config.k22};

    std::vector<ModelResponse> fes_responses;
    std::vector<ModelResponse> fcs_responses;
    auto gather = [&](const std::vector<TransformedInput>& samples, int axis2) {
      std::vector<Job> jobs;
      jobs.reserve(samples.size());
      for (const auto& s : samples) {
        jobs.push_back({make_sample_request(inst, s, config, media, axis2), labels});
      }
      return run_jobs(backend, jobs, config.endpoint.max_in_flight);
    };

    try {
      if (need_fes_grid(config) && !plan.fes.empty()) {
        fes_responses = gather(plan.fes, config.k12);
        rec.fes_total = static_cast<int>(fes_responses.size());
        for (const auto& r : fes_responses) rec.fes_parsed += r.usable() ? 1 : 0;
        if (2 * rec.fes_parsed < rec.fes_total) {
          throw InstanceUnusable("more than half of the FES samples failed to parse");
        }
        const auto q_fes = estimator::estimate_distribution(
            fes_responses, labels, estimator::Pooling::full);
        rec.u_fes = u_fes(q_fes, predicted, config.prob_floor);
      }
      if (need_fcs_grid(config) && !plan.fcs.empty()) {
        fcs_responses = gather(plan.fcs, config.k22);
        rec.fcs_total = static_cast<int>(fcs_responses.size());
        for (const auto& r : fcs_responses) rec.fcs_parsed += r.usable() ? 1 : 0;
        if (2 * rec.fcs_parsed < rec.fcs_total) {
          throw InstanceUnusable("more than half of the FCS samples failed to parse");
        }
        const auto q_fcs = estimator::estimate_distribution(
            fcs_responses, labels, estimator::Pooling::binary, predicted);
        rec.u_fcs = u_fcs(q_fcs, predicted, config.prob_floor);
        if (rec.u_fes) rec.u_festa = festa_score(*rec.u_fes, *rec.u_fcs);
      }
    } catch (const InstanceUnusable& e) {
      manifest::append_skip({inst.id, "score", e.what()}, paths.skip_log());
      ++result.skipped;
      continue;
    }

    if (wants(config, {"entropy-ablation"})) {
      if (!fes_responses.empty()) {
        if (auto h = try_entropy(fes_responses, labels)) rec.baselines["h-fes"] = *h;
      }
      if (!fcs_responses.empty()) {
        try {
          const auto q_fcs = estimator::estimate_distribution(
              fcs_responses, labels, estimator::Pooling::binary, predicted);
          rec.baselines["h-fcs"] = shannon_entropy(q_fcs);
          if (rec.baselines.count("h-fes")) {
            rec.baselines["h-sum"] = rec.baselines["h-fes"] + rec.baselines["h-fcs"];
          }
        } catch (const InstanceUnusable&) {
        }
      }
    }
    if (wants(config, {"ia-it"}) && !fes_responses.empty()) {
      if (auto h = try_entropy(fes_responses, labels)) rec.baselines["ia-it"] = *h;
    }
    const int fan_out = config.endpoint.max_in_flight;
    if (wants(config, {"oe"})) {
      try {
        rec.baselines["oe"] = estimator::baseline_oe(
            backend, config.endpoint, inst, orig_bytes, orig_sha, config.oe_decodes,
            fan_out);
      } catch (const InstanceUnusable&) {
      }
    }
    if (wants(config, {"vc"})) {
      if (auto u = estimator::baseline_vc(backend, config.endpoint, inst, orig_bytes,
                                          orig_sha, original.raw_text)) {
        rec.baselines["vc"] = *u;
      }
    }
    if (wants(config, {"bu"})) {
      if (auto u = estimator::baseline_bu(backend, config.endpoint, inst, orig_bytes,
                                          orig_sha, predicted, config.bu_top_k,
                                          config.bu_n_samples, fan_out)) {
        rec.baselines["bu"] = *u;
      }
    }
    if (wants(config, {"ia-i"}) && inst.media.kind != MediaKind::none) {
      try {
        rec.baselines["ia-i"] = estimator::baseline_ia(
            backend, config.endpoint, config.transforms, inst, estimator::IaMode::media,
            config.effective_ia_media_k(), config.seed, orig_bytes, fan_out);
      } catch (const InstanceUnusable&) {
      }
    }
    if (wants(config, {"ia-t"})) {
      try {
        rec.baselines["ia-t"] = estimator::baseline_ia(
            backend, config.endpoint, config.transforms, inst, estimator::IaMode::text,
            config.effective_ia_text_k(), config.seed, orig_bytes, fan_out);
      } catch (const InstanceUnusable&) {
      }
    }
    if (wants(config, {"ru"})) {
      try {
        rec.baselines["ru"] = estimator::baseline_ru(backend, config.endpoint,
                                                     config.transforms, inst,
                                                     config.ru_k, config.seed,
                                                     orig_bytes, fan_out);
      } catch (const InstanceUnusable&) {
      }
    }

    result.records.push_back(std::move(rec));
  }

  manifest::save_records(result.records, paths.records());
  return result;
}

eval::EvalReport run_evaluate(const std::vector<UncertaintyRecord>& records,
                              const RunConfig& config, const std::string& out_dir,
                              bool svg) {
  const OutPaths paths(out_dir);
  fs::create_directories(out_dir);
  auto report = eval::evaluate(records, config.methods, config_fingerprint(config));
  eval::write_report_json(report, paths.report_json());
  eval::write_report_csv(report, paths.report_csv());
  eval::write_scatter_csv(records, config.methods, paths.scatter_csv());
  eval::write_risk_coverage_csv(report, paths.risk_coverage_csv());
  if (svg) eval::write_risk_coverage_svg(report, paths.risk_coverage_svg());
  return report;
}

eval::SweepTable run_sweep(const std::vector<McqInstance>& instances,
                           const RunConfig& config, const std::string& out_dir,
                           client::QueryBackend& backend,
                           const std::vector<int>& schedule, bool svg) {
  config.validate();
  const OutPaths paths(out_dir);
  MediaStore media(out_dir);
  const auto plans = build_plans(instances, config, paths);

  // Grid-dependent methods only; the others do not vary with K.
  std::vector<std::string> sweep_methods;
  for (const auto& m : config.methods) {
    if (m == "festa" || m == "fes" || m == "fcs" || m == "ia-it" ||
        m == "entropy-ablation") {
      sweep_methods.push_back(m);
    }
  }
  if (sweep_methods.empty()) {
    throw UsageError("sweep requires at least one grid-dependent method");
  }

  std::set<int> warned;
  std::map<int, std::vector<UncertaintyRecord>> records_by_k;
  for (const auto& plan : plans) {
    const auto& inst = *plan.instance;
    if (plan.fes.empty() || plan.fcs.empty()) continue;
    const auto labels = inst.option_labels();
    const auto& orig_bytes = media.original(inst);

    const ModelResponse original = backend.run(
        estimator::original_request(inst, config.endpoint, orig_bytes,
                                    media.original_sha(inst)),
        labels);
    if (!original.usable()) continue;
    const std::string predicted = *original.parsed_label;

    std::vector<Job> fes_jobs;
    for (const auto& s : plan.fes) {
      fes_jobs.push_back({make_sample_request(inst, s, config, media, config.k12), labels});
    }
    std::vector<Job> fcs_jobs;
    for (const auto& s : plan.fcs) {
      fcs_jobs.push_back({make_sample_request(inst, s, config, media, config.k22), labels});
    }
    const auto fes_responses = run_jobs(backend, fes_jobs, config.endpoint.max_in_flight);
    const auto fcs_responses = run_jobs(backend, fcs_jobs, config.endpoint.max_in_flight);

    for (const int k : schedule) {
      if (k > static_cast<int>(fes_responses.size()) ||
          k > static_cast<int>(fcs_responses.size())) {
        if (warned.insert(k).second) {
          log_warn("sweep K=" + std::to_string(k) +
                   " exceeds the available grid; entry omitted");
        }
        continue;
      }
      const std::vector<ModelResponse> fes_k(fes_responses.begin(),
                                             fes_responses.begin() + k);
      const std::vector<ModelResponse> fcs_k(fcs_responses.begin(),
                                             fcs_responses.begin() + k);
      UncertaintyRecord rec;
      rec.instance_id = inst.id;
      rec.predicted_label = predicted;
      rec.correct = predicted == inst.target_label;
      rec.k_used = {k, 1, k, 1};
      try {
        const auto scores =
            estimator::score_festa(inst, fes_k, fcs_k, predicted, config.prob_floor);
        rec.u_fes = scores.u_fes;
        rec.u_fcs = scores.u_fcs;
        rec.u_festa = scores.u_festa;
        rec.fes_parsed = scores.fes_parsed;
        rec.fes_total = scores.fes_total;
        rec.fcs_parsed = scores.fcs_parsed;
        rec.fcs_total = scores.fcs_total;
      } catch (const InstanceUnusable&) {
        continue;
      }
      if (std::find(sweep_methods.begin(), sweep_methods.end(), "entropy-ablation") !=
          sweep_methods.end()) {
        try {
          const auto h =
              estimator::score_entropy_ablation(fes_k, fcs_k, labels, predicted);
          rec.baselines["h-fes"] = h.h_fes;
          rec.baselines["h-fcs"] = h.h_fcs;
          rec.baselines["h-sum"] = h.h_sum;
        } catch (const InstanceUnusable&) {
        }
      }
      if (std::find(sweep_methods.begin(), sweep_methods.end(), "ia-it") !=
          sweep_methods.end()) {
        if (auto h = try_entropy(fes_k, labels)) rec.baselines["ia-it"] = *h;
      }
      records_by_k[k].push_back(std::move(rec));
    }
  }

  const auto table = eval::sweep_sample_size(records_by_k, sweep_methods);
  fs::create_directories(out_dir);
  {
    json j = json::object();
    for (const auto& [method, row] : table) {
      json cells = json::object();
      for (const auto& [k, v] : row) cells[std::to_string(k)] = v;
      j[method] = cells;
    }
    std::ofstream out(paths.sweep_json(), std::ios::binary | std::ios::trunc);
    out << j.dump(2) << "\n";
  }
  eval::write_sweep_csv(table, paths.sweep_csv());
  if (svg) eval::write_sweep_svg(table, paths.sweep_svg());
  return table;
}

}  // namespace festa::pipeline
