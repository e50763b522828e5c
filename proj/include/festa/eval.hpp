#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "festa/types.hpp"

// Misprediction-detection evaluation: AUROC, risk-coverage analysis,
// sample-size sweeps and score scatter exports.
namespace festa::eval {

// Mann-Whitney AUROC: the fraction of (correct, incorrect) pairs where the
// correct instance has strictly greater confidence, plus half the tied
// pairs. Undefined (nullopt) when only one class is present.
std::optional<double> auroc(const std::vector<double>& confidence,
                            const std::vector<bool>& correct);

// Confidence = -U: identical ranking to 1/U for positive U, and defined at
// U = 0.
inline double confidence_from_uncertainty(double u) { return -u; }

struct RiskCoveragePoint {
  double coverage = 0.0;            // fraction of instances answered
  double selective_accuracy = 0.0;  // accuracy within that prefix
};

// Instances sorted by confidence descending; one point per prefix.
std::vector<RiskCoveragePoint> risk_coverage(const std::vector<double>& confidence,
                                             const std::vector<bool>& correct);

// Uncertainty value a method contributes for one record, when present.
std::optional<double> method_uncertainty(const UncertaintyRecord& record,
                                         const std::string& method);

// Methods accepted by --methods. "entropy-ablation" expands to the
// h-fes/h-fcs/h-sum comparator columns.
const std::vector<std::string>& known_methods();
// The methods eligible as "best baseline" for the relative-improvement row.
const std::vector<std::string>& baseline_methods();
// Score columns produced by a method selection (expands entropy-ablation).
std::vector<std::string> expand_methods(const std::vector<std::string>& methods);
void validate_methods(const std::vector<std::string>& methods);

struct MethodEval {
  std::optional<double> auroc;
  int n_used = 0;
  std::vector<RiskCoveragePoint> risk_coverage;
};

using SweepTable = std::map<std::string, std::map<int, double>>;

struct EvalReport {
  double accuracy = 0.0;
  int n_instances = 0;
  std::map<std::string, MethodEval> methods;
  std::optional<std::string> best_baseline;
  std::optional<double> best_baseline_auroc;
  std::optional<double> relative_improvement;  // fraction, festa vs best baseline
  std::string relative_improvement_printed;    // e.g. "24.6%"
  SweepTable sweep;                            // filled by the sweep command
  std::string config_fingerprint;
};

EvalReport evaluate(const std::vector<UncertaintyRecord>& records,
                    const std::vector<std::string>& methods,
                    const std::string& config_fingerprint = "");

double relative_improvement(double festa_auroc, double best_baseline_auroc);
// "%.1f%%" of the fraction, matching the reporting convention.
std::string format_percent(double fraction);

// AUROC per (method, K) from per-K record sets (the sample-size sweep).
SweepTable sweep_sample_size(const std::map<int, std::vector<UncertaintyRecord>>& records_by_k,
                             const std::vector<std::string>& methods);

// ---------------------------------------------------------------------------
// Report emission

void write_report_json(const EvalReport& report, const std::string& path);
void write_report_csv(const EvalReport& report, const std::string& path);
// Per-instance confidence vs correctness, one row per (instance, method).
void write_scatter_csv(const std::vector<UncertaintyRecord>& records,
                       const std::vector<std::string>& methods,
                       const std::string& path);
void write_risk_coverage_csv(const EvalReport& report, const std::string& path);
void write_risk_coverage_svg(const EvalReport& report, const std::string& path);
void write_sweep_csv(const SweepTable& table, const std::string& path);
void write_sweep_svg(const SweepTable& table, const std::string& path);

}  // namespace festa::eval
