#include "festa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"

namespace festa::eval {

using nlohmann::json;

std::optional<double> auroc(const std::vector<double>& confidence,
                            const std::vector<bool>& correct) {
  if (confidence.size() != correct.size()) {
    throw DomainError("auroc: confidence and correctness lengths differ");
  }
  const size_t n = confidence.size();
  size_t n_pos = 0;
  for (bool c : correct) n_pos += c ? 1 : 0;
  const size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  // Rank-sum with average ranks on ties; exact halves keep the result
  // identical to explicit pair counting.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return confidence[a] < confidence[b];
  });
  double positive_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && confidence[order[j + 1]] == confidence[order[i]]) ++j;
    const double avg_rank = (double(i + 1) + double(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) {
      if (correct[order[k]]) positive_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double u = positive_rank_sum - double(n_pos) * double(n_pos + 1) / 2.0;
  return u / (double(n_pos) * double(n_neg));
}

std::vector<RiskCoveragePoint> risk_coverage(const std::vector<double>& confidence,
                                             const std::vector<bool>& correct) {
  if (confidence.size() != correct.size()) {
    throw DomainError("risk_coverage: confidence and correctness lengths differ");
  }
  const size_t n = confidence.size();
  std::vector<RiskCoveragePoint> out;
  if (n == 0) return out;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return confidence[a] > confidence[b];
  });
  out.reserve(n);
  size_t hits = 0;
  for (size_t k = 0; k < n; ++k) {
    hits += correct[order[k]] ? 1 : 0;
    out.push_back({double(k + 1) / double(n), double(hits) / double(k + 1)});
  }
  return out;
}

std::optional<double> method_uncertainty(const UncertaintyRecord& record,
                                         const std::string& method) {
  if (method == "festa") return record.u_festa;
  if (method == "fes") return record.u_fes;
  if (method == "fcs") return record.u_fcs;
  const auto it = record.baselines.find(method);
  if (it == record.baselines.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m = {
      "festa", "fes",  "fcs", "oe", "vc",  "ia-i",
      "ia-t",  "ia-it", "ru",  "bu", "entropy-ablation",
  };
  return m;
}

const std::vector<std::string>& baseline_methods() {
  static const std::vector<std::string> m = {"oe", "vc", "ia-i", "ia-t",
                                             "ia-it", "ru", "bu"};
  return m;
}

std::vector<std::string> expand_methods(const std::vector<std::string>& methods) {
  std::vector<std::string> out;
  for (const auto& m : methods) {
    if (m == "entropy-ablation") {
      out.insert(out.end(), {"h-fes", "h-fcs", "h-sum"});
    } else {
      out.push_back(m);
    }
  }
  return out;
}

void validate_methods(const std::vector<std::string>& methods) {
  if (methods.empty()) throw UsageError("method list is empty");
  const auto& known = known_methods();
  for (const auto& m : methods) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw UsageError("unknown method: " + m);
    }
  }
}

double relative_improvement(double festa_auroc, double best_baseline_auroc) {
  return (festa_auroc - best_baseline_auroc) / best_baseline_auroc;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
  return buf;
}

EvalReport evaluate(const std::vector<UncertaintyRecord>& records,
                    const std::vector<std::string>& methods,
                    const std::string& config_fingerprint) {
  if (records.empty()) throw UsageError("no records to evaluate");
  EvalReport report;
  report.n_instances = static_cast<int>(records.size());
  report.config_fingerprint = config_fingerprint;
  int correct_count = 0;
  for (const auto& r : records) correct_count += r.correct ? 1 : 0;
  report.accuracy = double(correct_count) / double(records.size());

  for (const auto& method : expand_methods(methods)) {
    std::vector<double> conf;
    std::vector<bool> correct;
    for (const auto& r : records) {
      if (const auto u = method_uncertainty(r, method)) {
        conf.push_back(confidence_from_uncertainty(*u));
        correct.push_back(r.correct);
      }
    }
    MethodEval me;
    me.n_used = static_cast<int>(conf.size());
    if (!conf.empty()) {
      me.auroc = auroc(conf, correct);
      me.risk_coverage = risk_coverage(conf, correct);
    }
    report.methods[method] = std::move(me);
  }

  // Relative improvement of festa over the best baseline present.
  const auto festa_it = report.methods.find("festa");
  if (festa_it != report.methods.end() && festa_it->second.auroc) {
    for (const auto& b : baseline_methods()) {
      const auto it = report.methods.find(b);
      if (it == report.methods.end() || !it->second.auroc) continue;
      if (!report.best_baseline_auroc || *it->second.auroc > *report.best_baseline_auroc) {
        report.best_baseline = b;
        report.best_baseline_auroc = it->second.auroc;
      }
    }
    if (report.best_baseline_auroc) {
      report.relative_improvement =
          relative_improvement(*festa_it->second.auroc, *report.best_baseline_auroc);
      report.relative_improvement_printed = format_percent(*report.relative_improvement);
    }
  }
  return report;
}

SweepTable sweep_sample_size(const std::map<int, std::vector<UncertaintyRecord>>& records_by_k,
                             const std::vector<std::string>& methods) {
  SweepTable table;
  for (const auto& [k, records] : records_by_k) {
    if (records.empty()) continue;
    for (const auto& method : expand_methods(methods)) {
      std::vector<double> conf;
      std::vector<bool> correct;
      for (const auto& r : records) {
        if (const auto u = method_uncertainty(r, method)) {
          conf.push_back(confidence_from_uncertainty(*u));
          correct.push_back(r.correct);
        }
      }
      if (conf.empty()) continue;
      if (const auto a = auroc(conf, correct)) table[method][k] = *a;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

namespace {

json report_to_json(const EvalReport& report) {
  json methods = json::object();
  for (const auto& [name, me] : report.methods) {
    json rc = json::array();
    for (const auto& p : me.risk_coverage) {
      rc.push_back(json::array({p.coverage, p.selective_accuracy}));
    }
    methods[name] = {
        {"auroc", me.auroc ? json(*me.auroc) : json(nullptr)},
        {"n_used", me.n_used},
        {"risk_coverage", rc},
    };
  }
  json sweep = json::object();
  for (const auto& [method, row] : report.sweep) {
    json cells = json::object();
    for (const auto& [k, v] : row) cells[std::to_string(k)] = v;
    sweep[method] = cells;
  }
  return json{
      {"accuracy", report.accuracy},
      {"n_instances", report.n_instances},
      {"methods", methods},
      {"best_baseline", report.best_baseline ? json(*report.best_baseline) : json(nullptr)},
      {"best_baseline_auroc",
       report.best_baseline_auroc ? json(*report.best_baseline_auroc) : json(nullptr)},
      {"relative_improvement",
       report.relative_improvement ? json(*report.relative_improvement) : json(nullptr)},
      {"relative_improvement_printed", report.relative_improvement_printed},
      {"sweep", sweep},
      {"config_fingerprint", report.config_fingerprint},
  };
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Minimal polyline chart; enough to eyeball curves without a plotting stack.
std::string svg_chart(const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
                      const std::string& x_label, const std::string& y_label,
                      double x_min, double x_max) {
  const int w = 640;
  const int h = 440;
  const int margin = 50;
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf", "#393b79"};
  std::string out;
  out += "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(w) +
         "' height='" + std::to_string(h) + "'>\n";
  out += "<rect width='100%' height='100%' fill='white'/>\n";
  auto px = [&](double x) {
    return margin + (x - x_min) / (x_max - x_min) * (w - 2 * margin);
  };
  auto py = [&](double y) { return h - margin - y * (h - 2 * margin); };
  out += "<line x1='" + std::to_string(margin) + "' y1='" + std::to_string(h - margin) +
         "' x2='" + std::to_string(w - margin) + "' y2='" + std::to_string(h - margin) +
         "' stroke='black'/>\n";
  out += "<line x1='" + std::to_string(margin) + "' y1='" + std::to_string(margin) +
         "' x2='" + std::to_string(margin) + "' y2='" + std::to_string(h - margin) +
         "' stroke='black'/>\n";
  out += "<text x='" + std::to_string(w / 2) + "' y='" + std::to_string(h - 10) +
         "' font-size='13'>" + x_label + "</text>\n";
  out += "<text x='12' y='" + std::to_string(h / 2) +
         "' font-size='13' transform='rotate(-90 12 " + std::to_string(h / 2) + ")'>" +
         y_label + "</text>\n";
  size_t color = 0;
  int legend_y = margin;
  for (const auto& [name, points] : series) {
    const char* stroke = palette[color % (sizeof(palette) / sizeof(palette[0]))];
    ++color;
    std::string poly = "<polyline fill='none' stroke='";
    poly += stroke;
    poly += "' stroke-width='1.5' points='";
    for (const auto& [x, y] : points) {
      poly += format_double(px(x)) + "," + format_double(py(y)) + " ";
    }
    poly += "'/>\n";
    out += poly;
    out += "<text x='" + std::to_string(w - margin - 110) + "' y='" +
           std::to_string(legend_y) + "' font-size='12' fill='" + stroke + "'>" + name +
           "</text>\n";
    legend_y += 16;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

void write_report_json(const EvalReport& report, const std::string& path) {
  write_text_file(path, report_to_json(report).dump(2) + "\n");
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::string out = "method,auroc,n_used\n";
  for (const auto& [name, me] : report.methods) {
    out += name + "," + (me.auroc ? format_double(*me.auroc) : "") + "," +
           std::to_string(me.n_used) + "\n";
  }
  write_text_file(path, out);
}

void write_scatter_csv(const std::vector<UncertaintyRecord>& records,
                       const std::vector<std::string>& methods,
                       const std::string& path) {
  std::string out = "instance_id,method,uncertainty,confidence,correct\n";
  for (const auto& r : records) {
    for (const auto& method : expand_methods(methods)) {
      if (const auto u = method_uncertainty(r, method)) {
        out += r.instance_id + "," + method + "," + format_double(*u) + "," +
               format_double(confidence_from_uncertainty(*u)) + "," +
               (r.correct ? "1" : "0") + "\n";
      }
    }
  }
  write_text_file(path, out);
}

void write_risk_coverage_csv(const EvalReport& report, const std::string& path) {
  std::string out = "method,coverage,selective_accuracy\n";
  for (const auto& [name, me] : report.methods) {
    for (const auto& p : me.risk_coverage) {
      out += name + "," + format_double(p.coverage) + "," +
             format_double(p.selective_accuracy) + "\n";
    }
  }
  write_text_file(path, out);
}

void write_risk_coverage_svg(const EvalReport& report, const std::string& path) {
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
  for (const auto& [name, me] : report.methods) {
    std::vector<std::pair<double, double>> points;
    for (const auto& p : me.risk_coverage) {
      points.emplace_back(p.coverage, p.selective_accuracy);
    }
    if (!points.empty()) series.emplace_back(name, std::move(points));
  }
  write_text_file(path, svg_chart(series, "coverage", "selective accuracy", 0.0, 1.0));
}

void write_sweep_csv(const SweepTable& table, const std::string& path) {
  std::set<int> ks;
  for (const auto& [_, row] : table) {
    for (const auto& [k, __] : row) ks.insert(k);
  }
  std::string out = "method";
  for (int k : ks) out += ",K=" + std::to_string(2 * k);
  out += "\n";
  for (const auto& [method, row] : table) {
    out += method;
    for (int k : ks) {
      const auto it = row.find(k);
      out += ",";
      if (it != row.end()) out += format_double(it->second);
    }
    out += "\n";
  }
  write_text_file(path, out);
}

void write_sweep_svg(const SweepTable& table, const std::string& path) {
  double x_min = 1e300;
  double x_max = -1e300;
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
  for (const auto& [method, row] : table) {
    std::vector<std::pair<double, double>> points;
    for (const auto& [k, v] : row) {
      points.emplace_back(double(k), v);
      x_min = std::min(x_min, double(k));
      x_max = std::max(x_max, double(k));
    }
    if (!points.empty()) series.emplace_back(method, std::move(points));
  }
  if (series.empty() || x_min >= x_max) {
    x_min = 0.0;
    x_max = 1.0;
  }
  write_text_file(path, svg_chart(series, "K per family", "AUROC", x_min, x_max));
}

}  // namespace festa::eval
