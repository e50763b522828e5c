#include "festa/scoring.hpp"

#include <cmath>
#include <limits>

namespace festa {

namespace {

double neg_log_clamped(double p, double prob_floor) {
  const double q = std::max(p, prob_floor);
  if (q <= 0.0) return std::numeric_limits<double>::infinity();
  const double v = -std::log(q);
  return v == 0.0 ? 0.0 : v;  // avoid -0.0 leaking into reports
}

}  // namespace

double u_fes(const AnswerDistribution& dist, const std::string& predicted,
             double prob_floor) {
  dist.validate();
  const auto it = dist.probs.find(predicted);
  if (it == dist.probs.end()) {
    throw DomainError("u_fes: predicted label '" + predicted + "' not in support");
  }
  return neg_log_clamped(it->second, prob_floor);
}

double u_fcs(const AnswerDistribution& dist, const std::string& predicted,
             double prob_floor) {
  dist.validate();
  const std::string pooled = complement_label(predicted);
  if (dist.probs.size() != 2 || dist.probs.count(predicted) == 0 ||
      dist.probs.count(pooled) == 0) {
    throw DomainError("u_fcs: distribution is not over the binary support {" +
                      predicted + ", " + pooled + "}");
  }
  return neg_log_clamped(dist.probs.at(pooled), prob_floor);
}

double festa_score(double u_fes, double u_fcs) { return u_fes + u_fcs; }

double shannon_entropy(const AnswerDistribution& dist) {
  dist.validate();
  double h = 0.0;
  for (const auto& [label, p] : dist.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h <= 0.0 ? 0.0 : h;
}

}  // namespace festa
