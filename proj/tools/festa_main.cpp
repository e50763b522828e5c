#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "festa/client.hpp"
#include "festa/config.hpp"
#include "festa/manifest.hpp"
#include "festa/mocks.hpp"
#include "festa/pipeline.hpp"

namespace {

volatile std::sig_atomic_t g_stop_requested = 0;

void handle_signal(int) { g_stop_requested = 1; }

struct CommonOpts {
  std::string config_path;
  std::string dataset_path;
  std::string endpoint_url;
  std::string cache_dir;
  std::string out_dir;
  std::string methods_csv;
  int64_t seed = -1;
  int k11 = 0, k12 = 0, k21 = 0, k22 = 0;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts, bool needs_dataset,
                      bool needs_out) {
  cmd->add_option("--config", opts.config_path, "run configuration (JSON)");
  auto* ds = cmd->add_option("--dataset", opts.dataset_path, "dataset manifest (JSONL)");
  if (needs_dataset) ds->required();
  cmd->add_option("--endpoint", opts.endpoint_url, "model endpoint base URL");
  cmd->add_option("--cache-dir", opts.cache_dir, "response cache directory");
  auto* out = cmd->add_option("--out", opts.out_dir, "pipeline output directory");
  if (needs_out) out->required();
  cmd->add_option("--seed", opts.seed, "root seed (overrides config)");
  cmd->add_option("--methods", opts.methods_csv, "comma-separated method list");
  cmd->add_option("--k11", opts.k11, "media-equivalence variants (FES)");
  cmd->add_option("--k12", opts.k12, "text-equivalence variants (FES)");
  cmd->add_option("--k21", opts.k21, "complementary variants (FCS)");
  cmd->add_option("--k22", opts.k22, "equivalence variants (FCS)");
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= csv.size()) {
    const size_t comma = csv.find(',', start);
    const std::string item =
        csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

festa::RunConfig resolve_config(const CommonOpts& opts) {
  festa::RunConfig config;
  if (!opts.config_path.empty()) config = festa::load_config(opts.config_path);
  if (!opts.endpoint_url.empty()) config.endpoint.base_url = opts.endpoint_url;
  if (!opts.cache_dir.empty()) config.cache_dir = opts.cache_dir;
  if (opts.seed >= 0) config.seed = static_cast<uint64_t>(opts.seed);
  if (!opts.methods_csv.empty()) config.methods = split_csv(opts.methods_csv);
  if (opts.k11 > 0) config.k11 = opts.k11;
  if (opts.k12 > 0) config.k12 = opts.k12;
  if (opts.k21 > 0) config.k21 = opts.k21;
  if (opts.k22 > 0) config.k22 = opts.k22;
  return config;
}

std::unique_ptr<festa::client::HttpBackend> make_backend(const festa::RunConfig& config) {
  return std::make_unique<festa::client::HttpBackend>(config.endpoint, config.cache_dir);
}

int run_app(int argc, char** argv) {
  CLI::App app{"FESTA: black-box uncertainty estimation for multimodal MCQA models"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* generate = app.add_subcommand("generate", "write FES/FCS sample manifests");
  add_common_flags(generate, opts, true, true);

  auto* query = app.add_subcommand("query", "fill the response cache");
  add_common_flags(query, opts, true, true);

  auto* score = app.add_subcommand("score", "compute uncertainty records");
  add_common_flags(score, opts, true, true);

  auto* evaluate = app.add_subcommand("evaluate", "AUROC + risk-coverage report");
  add_common_flags(evaluate, opts, false, true);
  std::string records_path;
  bool svg = false;
  evaluate->add_option("--records", records_path,
                       "records JSONL (default: <out>/records.jsonl)");
  evaluate->add_flag("--svg", svg, "also emit SVG plots");

  auto* sweep = app.add_subcommand("sweep", "AUROC across sample sizes");
  add_common_flags(sweep, opts, true, true);
  std::vector<int> schedule;
  sweep->add_option("--schedule", schedule, "per-family K values");
  sweep->add_flag("--svg", svg, "also emit SVG plots");

  auto* serve = app.add_subcommand("mock-serve", "serve a behavioral mock model");
  std::string profile_name = "ideal";
  std::string collapse_label = "A";
  std::string ready_file;
  double accuracy = 0.5;
  double fault_rate = 0.0;
  int port = 0;
  int64_t serve_seed = 0;
  std::string serve_dataset;
  serve->add_option("--profile", profile_name,
                    "consistent|sensitive|ideal|mode_collapse|noisy")
      ->required();
  serve->add_option("--dataset", serve_dataset, "dataset manifest (JSONL)")->required();
  serve->add_option("--port", port, "listen port (0 = pick a free one)");
  serve->add_option("--seed", serve_seed, "behavior seed");
  serve->add_option("--accuracy", accuracy, "noisy profile accuracy p");
  serve->add_option("--collapse-label", collapse_label, "mode_collapse answer");
  serve->add_option("--fault-rate", fault_rate, "injected 503 fraction");
  serve->add_option("--ready-file", ready_file, "write the base URL here once serving");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message / help text
    return code == 0 ? 0 : 1;      // usage problems exit 1
  }

  if (generate->parsed()) {
    const auto config = resolve_config(opts);
    const auto instances = festa::manifest::load_dataset(opts.dataset_path);
    const auto stats = festa::pipeline::run_generate(instances, config, opts.out_dir);
    std::printf("generated %d FES + %d FCS samples for %d instances (%d FCS-skipped)\n",
                stats.fes_samples, stats.fcs_samples, stats.instances,
                stats.fcs_skipped);
    return 0;
  }
  if (query->parsed()) {
    const auto config = resolve_config(opts);
    const auto instances = festa::manifest::load_dataset(opts.dataset_path);
    auto backend = make_backend(config);
    const auto stats =
        festa::pipeline::run_query(instances, config, opts.out_dir, *backend);
    std::printf(
        "queries: %d total, %d network, %d cache hits, %d transport errors, "
        "%d upstream errors, %d parse failures\n",
        stats.total, stats.network_calls, stats.cache_hits, stats.transport_errors,
        stats.upstream_errors, stats.parse_failures);
    return 0;
  }
  if (score->parsed()) {
    const auto config = resolve_config(opts);
    const auto instances = festa::manifest::load_dataset(opts.dataset_path);
    auto backend = make_backend(config);
    const auto result =
        festa::pipeline::run_score(instances, config, opts.out_dir, *backend);
    std::printf("scored %zu instances (%d skipped) -> %s\n", result.records.size(),
                result.skipped,
                festa::pipeline::OutPaths(opts.out_dir).records().c_str());
    return 0;
  }
  if (evaluate->parsed()) {
    const auto config = resolve_config(opts);
    const std::string records_file = records_path.empty()
                                         ? festa::pipeline::OutPaths(opts.out_dir).records()
                                         : records_path;
    const auto records = festa::manifest::load_records(records_file);
    const auto report =
        festa::pipeline::run_evaluate(records, config, opts.out_dir, svg);
    std::printf("accuracy %.4f over %d instances\n", report.accuracy,
                report.n_instances);
    for (const auto& [method, me] : report.methods) {
      if (me.auroc) {
        std::printf("  %-8s AUROC %.4f (n=%d)\n", method.c_str(), *me.auroc, me.n_used);
      } else {
        std::printf("  %-8s AUROC null (single-class or no scores; n=%d)\n",
                    method.c_str(), me.n_used);
      }
    }
    if (report.relative_improvement) {
      std::printf("festa vs best baseline (%s %.4f): %s\n",
                  report.best_baseline->c_str(), *report.best_baseline_auroc,
                  report.relative_improvement_printed.c_str());
    }
    return 0;
  }
  if (sweep->parsed()) {
    const auto config = resolve_config(opts);
    const auto instances = festa::manifest::load_dataset(opts.dataset_path);
    auto backend = make_backend(config);
    const auto effective = schedule.empty() ? config.effective_sweep_schedule() : schedule;
    const auto table = festa::pipeline::run_sweep(instances, config, opts.out_dir,
                                                  *backend, effective, svg);
    std::printf("sweep table written for %zu methods -> %s\n", table.size(),
                festa::pipeline::OutPaths(opts.out_dir).sweep_csv().c_str());
    return 0;
  }
  if (serve->parsed()) {
    festa::mocks::MockProfile profile;
    profile.kind = festa::mocks::mock_kind_from_string(profile_name);
    profile.accuracy = accuracy;
    profile.collapse_label = collapse_label;
    profile.seed = static_cast<uint64_t>(serve_seed);
    profile.fault_rate = fault_rate;
    const auto instances = festa::manifest::load_dataset(serve_dataset);
    festa::mocks::MockServer server(profile, instances);
    const int bound = server.start(port);
    std::printf("mock %s serving %zu instances at %s\n", profile_name.c_str(),
                instances.size(), server.base_url().c_str());
    std::fflush(stdout);
    if (!ready_file.empty()) {
      std::ofstream ready(ready_file, std::ios::trunc);
      ready << server.base_url() << "\n";
    }
    (void)bound;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (g_stop_requested == 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_app(argc, argv);
  } catch (const festa::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const festa::TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return 3;
  } catch (const festa::UpstreamError& e) {
    std::cerr << "upstream error: " << e.what() << "\n";
    return 3;
  } catch (const festa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
