// Acceptance suite: one criterion per section, one pass/fail line each.
// Exit code 0 only when every criterion holds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "festa/client.hpp"
#include "festa/estimator.hpp"
#include "festa/eval.hpp"
#include "festa/manifest.hpp"
#include "festa/mocks.hpp"
#include "festa/pipeline.hpp"
#include "festa/rng.hpp"
#include "festa/scoring.hpp"
#include "festa/transforms.hpp"
#include "test_support.hpp"

using namespace festa;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

client::ModelResponse ok_response(const std::string& label) {
  client::ModelResponse r;
  r.raw_text = label;
  r.parsed_label = label;
  return r;
}

std::vector<client::ModelResponse> label_responses(const std::vector<std::string>& labels) {
  std::vector<client::ModelResponse> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(ok_response(l));
  return out;
}

// ---------------------------------------------------------------------------
// 1. Closed-form scoring vs direct evaluation of the simplified KL forms.

Outcome criterion_1() {
  const auto t0 = Clock::now();
  rng::Stream stream(1001);
  double max_err = 0.0;
  const double floor_value = 1e-6;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_options = 2 + static_cast<int>(stream.uniform_int(0, 4));
    std::vector<std::string> labels;
    for (int o = 0; o < n_options; ++o) labels.push_back(std::string(1, char('A' + o)));
    const int n = 1 + static_cast<int>(stream.uniform_int(0, 59));
    std::vector<std::string> answers;
    std::vector<int> counts(n_options, 0);
    for (int i = 0; i < n; ++i) {
      const int pick = static_cast<int>(stream.uniform_int(0, n_options - 1));
      ++counts[pick];
      answers.push_back(labels[pick]);
    }
    const std::string predicted =
        labels[static_cast<size_t>(stream.uniform_int(0, n_options - 1))];
    const int predicted_idx = predicted[0] - 'A';

    const auto responses = label_responses(answers);
    const auto q_full = estimator::estimate_distribution(
        responses, labels, estimator::Pooling::full);
    const auto q_bin = estimator::estimate_distribution(
        responses, labels, estimator::Pooling::binary, predicted);
    const double got_fes = u_fes(q_full, predicted, floor_value);
    const double got_fcs = u_fcs(q_bin, predicted, floor_value);

    // direct evaluation from the raw counts, long-double path
    const long double q_hat = (long double)counts[predicted_idx] / n;
    const long double q_flip = (long double)(n - counts[predicted_idx]) / n;
    const long double want_fes =
        -std::log(std::max(q_hat, (long double)floor_value));
    const long double want_fcs =
        -std::log(std::max(q_flip, (long double)floor_value));
    max_err = std::max(max_err, std::abs(got_fes - (double)want_fes));
    max_err = std::max(max_err, std::abs(got_fcs - (double)want_fcs));
  }
  const double elapsed = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "1000 response sets, max |err| %.2e, %.3f s",
                max_err, elapsed);
  return {max_err <= 1e-12 && elapsed < 1.0, buf};
}

// ---------------------------------------------------------------------------
// 2. AUROC vs brute-force pair counting and trapezoidal ROC integration.

double auroc_pairs(const std::vector<double>& conf, const std::vector<bool>& correct) {
  double wins = 0.0;
  double ties = 0.0;
  size_t n_pos = 0;
  for (size_t i = 0; i < conf.size(); ++i) {
    if (!correct[i]) continue;
    ++n_pos;
    for (size_t j = 0; j < conf.size(); ++j) {
      if (correct[j]) continue;
      if (conf[i] > conf[j]) wins += 1.0;
      else if (conf[i] == conf[j]) ties += 1.0;
    }
  }
  const size_t n_neg = conf.size() - n_pos;
  return (wins + 0.5 * ties) / (double(n_pos) * double(n_neg));
}

double auroc_trapezoid(const std::vector<double>& conf, const std::vector<bool>& correct) {
  std::vector<double> thresholds = conf;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double n_pos = 0.0;
  double n_neg = 0.0;
  for (bool c : correct) (c ? n_pos : n_neg) += 1.0;
  double auc = 0.0;
  double prev_fpr = 0.0;
  double prev_tpr = 0.0;
  for (double t : thresholds) {
    double tp = 0.0;
    double fp = 0.0;
    for (size_t i = 0; i < conf.size(); ++i) {
      if (conf[i] >= t) (correct[i] ? tp : fp) += 1.0;
    }
    const double tpr = tp / n_pos;
    const double fpr = fp / n_neg;
    auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  return auc;
}

Outcome criterion_2() {
  rng::Stream stream(2002);
  double max_trap_err = 0.0;
  double max_inv_err = 0.0;
  int exact_mismatches = 0;
  int tested = 0;
  while (tested < 500) {
    const int n = 2 + static_cast<int>(stream.uniform_int(0, 48));
    std::vector<double> conf;
    std::vector<bool> correct;
    bool has_pos = false;
    bool has_neg = false;
    for (int i = 0; i < n; ++i) {
      // coarse grid forces tied confidences
      conf.push_back(double(stream.uniform_int(0, 12)) / 6.0);
      const bool c = stream.next_double() < 0.5;
      correct.push_back(c);
      (c ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    ++tested;
    const double got = *eval::auroc(conf, correct);
    if (got != auroc_pairs(conf, correct)) ++exact_mismatches;
    max_trap_err = std::max(max_trap_err, std::abs(got - auroc_trapezoid(conf, correct)));

    // confidence transforms of an all-positive uncertainty vector
    std::vector<double> neg_u;
    std::vector<double> inv_u;
    for (int i = 0; i < n; ++i) {
      const double u = 0.01 + 10.0 * stream.next_double();
      neg_u.push_back(-u);
      inv_u.push_back(1.0 / u);
    }
    const auto a = eval::auroc(neg_u, correct);
    const auto b = eval::auroc(inv_u, correct);
    max_inv_err = std::max(max_inv_err, std::abs(*a - *b));
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "500 instances: %d exact mismatches, trapezoid |err| %.2e, "
                "-U vs 1/U |err| %.2e",
                exact_mismatches, max_trap_err, max_inv_err);
  return {exact_mismatches == 0 && max_trap_err <= 1e-9 && max_inv_err <= 1e-12, buf};
}

// ---------------------------------------------------------------------------
// 3. AUROC invariance under strictly increasing confidence transforms.

Outcome criterion_3() {
  rng::Stream stream(3003);
  double max_err = 0.0;
  int tested = 0;
  while (tested < 200) {
    const int n = 5 + static_cast<int>(stream.uniform_int(0, 35));
    std::vector<double> conf;
    std::vector<bool> correct;
    bool has_pos = false;
    bool has_neg = false;
    for (int i = 0; i < n; ++i) {
      double v = stream.uniform(-5.0, 5.0);
      if (stream.next_double() < 0.3) v = std::round(v);  // deliberate ties
      conf.push_back(v);
      const bool c = stream.next_double() < 0.5;
      correct.push_back(c);
      (c ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    ++tested;
    const double base = *eval::auroc(conf, correct);
    const double a = stream.uniform(0.5, 4.0);
    const double b = stream.uniform(-3.0, 3.0);
    std::vector<double> exp_t;
    std::vector<double> affine_t;
    std::vector<double> cube_t;
    for (double v : conf) {
      exp_t.push_back(std::exp(v));
      affine_t.push_back(a * v + b);
      cube_t.push_back(v * v * v);
    }
    max_err = std::max(max_err, std::abs(base - *eval::auroc(exp_t, correct)));
    max_err = std::max(max_err, std::abs(base - *eval::auroc(affine_t, correct)));
    max_err = std::max(max_err, std::abs(base - *eval::auroc(cube_t, correct)));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "200 fuzz cases x 3 transforms, max |err| %.2e",
                max_err);
  return {max_err <= 1e-12, buf};
}

// ---------------------------------------------------------------------------
// Shared pipeline fixtures.

std::vector<McqInstance> binary_dataset(const testing::TempDir& dir,
                                        const std::string& prefix, int n,
                                        const std::string& target, int images_every) {
  std::vector<McqInstance> out;
  for (int i = 0; i < n; ++i) {
    auto inst = testing::spatial_instance(prefix + std::to_string(i), target);
    if (images_every > 0 && i % images_every == 0) {
      const std::string path = dir.file(prefix + "_img" + std::to_string(i % 3) + ".png");
      if (!fs::exists(path)) testing::write_file(path, testing::tiny_png(16, 12, i % 3));
      inst.media.kind = MediaKind::image;
      inst.media.path = path;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

RunConfig pipeline_config(const std::string& base_url, const std::string& cache_dir,
                          std::vector<std::string> methods) {
  RunConfig config;
  config.endpoint.base_url = base_url;
  config.endpoint.retry.backoff_ms = 1;
  config.cache_dir = cache_dir;
  config.methods = std::move(methods);
  return config;
}

std::vector<UncertaintyRecord> run_pipeline(const std::vector<McqInstance>& dataset,
                                            RunConfig config, const std::string& out) {
  client::HttpBackend backend(config.endpoint, config.cache_dir);
  pipeline::run_generate(dataset, config, out);
  pipeline::run_query(dataset, config, out, backend);
  return pipeline::run_score(dataset, config, out, backend).records;
}

// ---------------------------------------------------------------------------
// 4. Ideal-behavior zeroes through the full pipeline (exact mode).

Outcome criterion_4() {
  testing::TempDir dir("acc4");
  const auto dataset = binary_dataset(dir, "id", 12, "A", 3);

  mocks::MockServer ideal_server({mocks::MockKind::ideal, 0.5, "A", 0, 0.0}, dataset);
  ideal_server.start();
  auto config = pipeline_config(ideal_server.base_url(), dir.file("cache_ideal"),
                                {"festa", "fes", "fcs"});
  config.k11 = 4;
  config.k12 = 3;
  config.k21 = 3;
  config.k22 = 4;
  config.prob_floor = 0.0;  // unclamped mode
  const auto records = run_pipeline(dataset, config, dir.file("out_ideal"));
  ideal_server.stop();

  int festa_zero = 0;
  int correct = 0;
  for (const auto& r : records) {
    if (r.u_festa && *r.u_festa == 0.0) ++festa_zero;
    if (r.correct) ++correct;
  }

  mocks::MockServer cons_server({mocks::MockKind::consistent, 0.5, "A", 7, 0.0},
                                dataset);
  cons_server.start();
  auto cons_config = pipeline_config(cons_server.base_url(), dir.file("cache_cons"),
                                     {"fes"});
  cons_config.k11 = 4;
  cons_config.k12 = 3;
  cons_config.prob_floor = 0.0;
  const auto cons_records = run_pipeline(dataset, cons_config, dir.file("out_cons"));
  cons_server.stop();

  int fes_zero = 0;
  for (const auto& r : cons_records) {
    if (r.u_fes && *r.u_fes == 0.0) ++fes_zero;
  }

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "ideal: %d/%zu u_festa==0, accuracy %d/%zu; consistent: %d/%zu u_fes==0",
                festa_zero, records.size(), correct, records.size(), fes_zero,
                cons_records.size());
  const bool pass = records.size() == dataset.size() &&
                    festa_zero == (int)records.size() &&
                    correct == (int)records.size() &&
                    cons_records.size() == dataset.size() &&
                    fes_zero == (int)cons_records.size();
  return {pass, buf};
}

// ---------------------------------------------------------------------------
// 5. Low-uncertainty hallucination detection on a mixed mock population.

Outcome criterion_5() {
  const auto t0 = Clock::now();
  testing::TempDir dir("acc5");
  // 50 ideal-behaved correct instances + 50 mode-collapse incorrect ones
  // (collapse answer "A", targets "B"), served by two local mock servers.
  const auto ideal_half = binary_dataset(dir, "good", 50, "A", 10);
  const auto collapse_half = binary_dataset(dir, "bad", 50, "B", 10);

  const std::vector<std::string> methods = {"festa", "oe"};
  RunConfig config;  // paper-scale grids
  config.methods = methods;
  config.endpoint.retry.backoff_ms = 1;

  std::vector<UncertaintyRecord> records;
  {
    mocks::MockServer server({mocks::MockKind::ideal, 0.5, "A", 0, 0.0}, ideal_half);
    server.start();
    auto c = config;
    c.endpoint.base_url = server.base_url();
    c.cache_dir = dir.file("cache_good");
    const auto r = run_pipeline(ideal_half, c, dir.file("out_good"));
    records.insert(records.end(), r.begin(), r.end());
    server.stop();
  }
  {
    mocks::MockServer server({mocks::MockKind::mode_collapse, 0.5, "A", 0, 0.0},
                             collapse_half);
    server.start();
    auto c = config;
    c.endpoint.base_url = server.base_url();
    c.cache_dir = dir.file("cache_bad");
    const auto r = run_pipeline(collapse_half, c, dir.file("out_bad"));
    records.insert(records.end(), r.begin(), r.end());
    server.stop();
  }

  const auto report = eval::evaluate(records, methods);
  const double elapsed = seconds_since(t0);
  const auto festa_auc = report.methods.at("festa").auroc;
  const auto oe_auc = report.methods.at("oe").auroc;
  const bool oe_blind = !oe_auc.has_value() || *oe_auc <= 0.55;

  // the hallucination signature itself: collapsed instances look perfectly
  // consistent (u_fes = 0, OE = 0) yet maximally insensitive
  // (u_fcs = -ln(floor))
  const double max_ufcs = -std::log(1e-6);
  bool signature = true;
  for (const auto& r : records) {
    if (r.instance_id.rfind("bad", 0) != 0) continue;
    signature = signature && r.u_fes && *r.u_fes == 0.0 && r.u_fcs &&
                std::abs(*r.u_fcs - max_ufcs) < 1e-9 &&
                r.baselines.at("oe") == 0.0;
  }

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "n=%zu, AUROC festa %.4f, AUROC oe %s, collapse signature "
                "(u_fes=0, u_fcs=13.8155, oe=0): %s, %.1f s",
                records.size(), festa_auc ? *festa_auc : -1.0,
                oe_auc ? std::to_string(*oe_auc).c_str() : "null",
                signature ? "yes" : "NO", elapsed);
  const bool pass = records.size() == 100 && festa_auc && *festa_auc == 1.0 &&
                    oe_blind && signature && elapsed < 120.0;
  return {pass, buf};
}

// ---------------------------------------------------------------------------
// 6. KL-vs-entropy ablation mechanism.

Outcome criterion_6() {
  const std::vector<std::string> labels = {"A", "B"};
  // q_FCS(flip) = 0.9
  std::vector<std::string> mostly_flip(9, "B");
  mostly_flip.push_back("A");
  const auto q_flip = estimator::estimate_distribution(
      label_responses(mostly_flip), labels, estimator::Pooling::binary, "A");
  const double kl_at_09 = u_fcs(q_flip, "A");
  const double h_at_09 = shannon_entropy(q_flip);

  // population where only the direction of the FCS mass differs
  std::vector<UncertaintyRecord> records;
  const auto agree_fes = label_responses({"A", "A", "A", "A"});
  for (int i = 0; i < 20; ++i) {
    const bool correct = i < 10;
    std::vector<std::string> fcs(correct ? 9 : 1, "B");
    fcs.insert(fcs.end(), correct ? 1 : 9, "A");
    const auto inst = testing::spatial_instance("abl" + std::to_string(i), "A");
    const auto scores = estimator::score_festa(inst, agree_fes,
                                               label_responses(fcs), "A", 1e-6);
    const auto ablation = estimator::score_entropy_ablation(
        agree_fes, label_responses(fcs), labels, "A");
    UncertaintyRecord rec;
    rec.instance_id = inst.id;
    rec.predicted_label = "A";
    rec.correct = correct;
    rec.u_fes = scores.u_fes;
    rec.u_fcs = scores.u_fcs;
    rec.u_festa = scores.u_festa;
    rec.baselines["h-sum"] = ablation.h_sum;
    records.push_back(std::move(rec));
  }
  const auto report = eval::evaluate(records, {"festa", "entropy-ablation"});
  const double kl_auc = *report.methods.at("festa").auroc;
  const double h_auc = *report.methods.at("h-sum").auroc;

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "u_fcs(0.9)=%.6f (want 0.1054), H=%.6f (want 0.3251); "
                "AUROC KL %.3f vs entropy %.3f",
                kl_at_09, h_at_09, kl_auc, h_auc);
  const bool pass = std::abs(kl_at_09 - 0.1054) <= 1e-4 &&
                    std::abs(h_at_09 - 0.3251) <= 1e-4 && kl_auc > h_auc;
  return {pass, buf};
}

// ---------------------------------------------------------------------------
// 7. Combinatoric sample counts at the published grid sizes.

Outcome criterion_7() {
  testing::TempDir dir("acc7");
  const auto dataset = binary_dataset(dir, "comb", 1, "A", 1);  // one image instance
  RunConfig config;
  config.endpoint.base_url = "http://127.0.0.1:9";  // generate stage needs no endpoint
  config.k11 = 14;
  config.k12 = 4;
  config.k21 = 4;
  config.k22 = 14;
  const auto stats = pipeline::run_generate(dataset, config, dir.file("out"));
  const auto fes =
      manifest::load_samples(pipeline::OutPaths(dir.file("out")).fes_manifest());
  const auto fcs =
      manifest::load_samples(pipeline::OutPaths(dir.file("out")).fcs_manifest());
  char buf[120];
  std::snprintf(buf, sizeof(buf), "FES %d (manifest %zu), FCS %d (manifest %zu)",
                stats.fes_samples, fes.size(), stats.fcs_samples, fcs.size());
  const bool pass = stats.fes_samples == 56 && fes.size() == 56 &&
                    stats.fcs_samples == 56 && fcs.size() == 56;
  return {pass, buf};
}

// ---------------------------------------------------------------------------
// 8. Sweep stability: K=2x16 vs K=2x56 within 0.05 against the noisy mock.

Outcome criterion_8() {
  testing::TempDir dir("acc8");
  std::vector<McqInstance> dataset;
  for (int i = 0; i < 100; ++i) {
    auto inst = testing::four_option_instance("sw" + std::to_string(i),
                                              std::string(1, char('A' + i % 4)));
    dataset.push_back(std::move(inst));
  }
  RunConfig config;
  config.endpoint.base_url = "http://unused";
  config.k11 = 14;
  config.k12 = 4;
  config.k21 = 4;
  config.k22 = 14;
  config.methods = {"festa"};
  const std::string out = dir.file("out");
  pipeline::run_generate(dataset, config, out);

  double sum16 = 0.0;
  double sum56 = 0.0;
  double max_seed_diff = 0.0;
  const int n_seeds = 10;
  for (int seed = 0; seed < n_seeds; ++seed) {
    mocks::MockProfile profile;
    profile.kind = mocks::MockKind::noisy;
    profile.accuracy = 0.6;
    profile.seed = 100 + seed;
    mocks::MockBackend backend(profile, dataset);
    const auto table = pipeline::run_sweep(dataset, config, out, backend, {16, 56});
    const double a16 = table.at("festa").at(16);
    const double a56 = table.at("festa").at(56);
    sum16 += a16;
    sum56 += a56;
    max_seed_diff = std::max(max_seed_diff, std::abs(a16 - a56));
  }
  const double mean16 = sum16 / n_seeds;
  const double mean56 = sum56 / n_seeds;
  char buf[180];
  std::snprintf(buf, sizeof(buf),
                "mean AUROC over 10 seeds: K=2x16 %.4f, K=2x56 %.4f, |diff| %.4f "
                "(max per-seed %.4f)",
                mean16, mean56, std::abs(mean16 - mean56), max_seed_diff);
  return {std::abs(mean16 - mean56) <= 0.05, buf};
}

// ---------------------------------------------------------------------------
// 9. Relative-improvement arithmetic as printed.

Outcome criterion_9() {
  const std::string printed = eval::format_percent(eval::relative_improvement(0.86, 0.69));
  char buf[100];
  std::snprintf(buf, sizeof(buf), "0.86 vs 0.69 -> \"%s\" (want \"24.6%%\")",
                printed.c_str());
  return {printed == "24.6%", buf};
}

// ---------------------------------------------------------------------------
// 10. Determinism and resume.

Outcome criterion_10() {
  testing::TempDir dir("acc10");
  const auto dataset = binary_dataset(dir, "det", 8, "A", 2);
  mocks::MockServer server({mocks::MockKind::noisy, 0.7, "A", 31, 0.0}, dataset);
  server.start();

  auto run_once = [&](const std::string& tag) {
    auto config = pipeline_config(server.base_url(), dir.file("cache_" + tag),
                                  {"festa", "oe", "entropy-ablation"});
    config.k11 = 3;
    config.k12 = 2;
    config.k21 = 2;
    config.k22 = 3;
    config.oe_decodes = 5;
    config.seed = 9;
    const std::string out = dir.file("out_" + tag);
    const auto records = run_pipeline(dataset, config, out);
    pipeline::run_evaluate(records, config, out);
    return out;
  };
  const std::string out1 = run_once("a");
  const std::string out2 = run_once("b");
  const auto records1 = testing::read_file(pipeline::OutPaths(out1).records());
  const auto report1 = testing::read_file(pipeline::OutPaths(out1).report_json());
  const bool identical =
      records1 == testing::read_file(pipeline::OutPaths(out2).records()) &&
      report1 == testing::read_file(pipeline::OutPaths(out2).report_json());

  // resume: delete half the cache, re-run the query stage
  auto config = pipeline_config(server.base_url(), dir.file("cache_a"),
                                {"festa", "oe", "entropy-ablation"});
  config.k11 = 3;
  config.k12 = 2;
  config.k21 = 2;
  config.k22 = 3;
  config.oe_decodes = 5;
  config.seed = 9;
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir.file("cache_a"))) {
    if (e.path().extension() == ".json") entries.push_back(e.path());
  }
  std::sort(entries.begin(), entries.end());
  const int deleted = static_cast<int>(entries.size() / 2);
  for (int i = 0; i < deleted; ++i) fs::remove(entries[i]);

  client::HttpBackend backend(config.endpoint, config.cache_dir);
  const auto stats = pipeline::run_query(dataset, config, out1, backend);
  const bool resume_exact = backend.network_calls() == deleted &&
                            stats.cache_hits == stats.total - deleted;

  // and the resumed cache still reproduces the original report
  const auto records_resumed =
      pipeline::run_score(dataset, config, out1, backend).records;
  pipeline::run_evaluate(records_resumed, config, out1);
  const bool report_stable =
      report1 == testing::read_file(pipeline::OutPaths(out1).report_json());
  server.stop();

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "byte-identical runs: %s; resume re-issued %d of %d deleted; "
                "post-resume report stable: %s",
                identical ? "yes" : "NO", backend.network_calls(), deleted,
                report_stable ? "yes" : "NO");
  return {identical && resume_exact && report_stable, buf};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*fn)();
  };
  const std::vector<Criterion> criteria = {
      {"closed-form scoring oracle (1e-12, <1s)", criterion_1},
      {"AUROC oracle equivalence (pairs exact, trapezoid 1e-9, -U vs 1/U 1e-12)",
       criterion_2},
      {"AUROC monotone-transform invariance (1e-12)", criterion_3},
      {"ideal-behavior zeroes through the full pipeline", criterion_4},
      {"low-uncertainty hallucination detection (OE<=0.55, FESTA=1.0, <2min)",
       criterion_5},
      {"KL-vs-entropy ablation mechanism", criterion_6},
      {"combinatorics: 14x4 -> 56 FES, 4x14 -> 56 FCS", criterion_7},
      {"sweep stability: K=2x16 within 0.05 of K=2x56 over 10 seeds", criterion_8},
      {"relative-improvement arithmetic (24.6%)", criterion_9},
      {"determinism and cache resume", criterion_10},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("[%2zu] %s  %s — %s\n", i + 1, outcome.pass ? "PASS" : "FAIL",
                criteria[i].name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d of %zu acceptance criteria FAILED\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
