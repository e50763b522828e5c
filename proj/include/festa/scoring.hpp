#pragma once

#include <string>

#include "festa/types.hpp"

// Pure scoring mathematics. Consistency and sensitivity uncertainties are
// KL divergences from ideally consistent / ideally sensitive reference
// predictive distributions; both reduce to a negative log of one aggregated
// probability. All logarithms are natural (scores in nats).
namespace festa {

// Empirical probabilities of zero would make the logs infinite; they are
// clamped at this floor by default. A floor of 0 selects exact mode, where
// a zero probability scores +infinity.
constexpr double kDefaultProbFloor = 1e-6;

// -log q_FES(predicted). Zero iff every aggregated equivalent-sample
// response equals the prediction (in exact mode).
double u_fes(const AnswerDistribution& dist, const std::string& predicted,
             double prob_floor = kDefaultProbFloor);

// -log q_FCS(predicted^c) over the binary support {predicted, predicted^c}.
// Zero iff every aggregated complementary-sample response flips away from
// the prediction (in exact mode).
double u_fcs(const AnswerDistribution& dist, const std::string& predicted,
             double prob_floor = kDefaultProbFloor);

// Exact sum of the two components.
double festa_score(double u_fes, double u_fcs);

// -sum p log p with 0 log 0 = 0.
double shannon_entropy(const AnswerDistribution& dist);

}  // namespace festa
