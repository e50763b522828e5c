#include "doctest.h"

#include <cmath>
#include <limits>

#include "festa/rng.hpp"
#include "festa/scoring.hpp"

using namespace festa;

namespace {

AnswerDistribution dist(std::map<std::string, double> probs, int sample_count = 0) {
  AnswerDistribution d;
  d.probs = std::move(probs);
  for (const auto& [_, p] : d.probs) {
    if (p > 0.0) ++d.support_size;
  }
  d.sample_count = sample_count;
  return d;
}

// Independent oracle for the closed forms: long-double arithmetic straight
// from the definitions, no shared code with the implementation.
long double oracle_neg_log(long double q, long double floor_value) {
  const long double clamped = q > floor_value ? q : floor_value;
  return -std::log(clamped);
}

}  // namespace

TEST_SUITE("scoring") {

TEST_CASE("u_fes example values") {
  CHECK(u_fes(dist({{"A", 1.0}, {"B", 0.0}}), "A") == 0.0);
  CHECK(u_fes(dist({{"A", 0.5}, {"B", 0.5}}), "A") ==
        doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(u_fes(dist({{"A", 0.5}, {"B", 0.5}}), "A") ==
        doctest::Approx((double)oracle_neg_log(0.5L, 1e-6L)).epsilon(1e-12));
  // zero probability hits the floor
  CHECK(u_fes(dist({{"A", 0.0}, {"B", 1.0}}), "A") ==
        doctest::Approx(13.815511).epsilon(1e-6));
}

TEST_CASE("u_fes domain errors and modes") {
  CHECK_THROWS_AS(u_fes(dist({{"A", 1.0}}), "Z"), DomainError);
  // exact mode: zero probability scores +infinity
  CHECK(std::isinf(u_fes(dist({{"A", 0.0}, {"B", 1.0}}), "A", 0.0)));
  // monotone decreasing in q(predicted)
  double prev = std::numeric_limits<double>::infinity();
  for (double q : {0.1, 0.3, 0.5, 0.9, 1.0}) {
    const double u = u_fes(dist({{"A", q}, {"B", 1.0 - q}}), "A");
    CHECK(u < prev);
    CHECK(u >= 0.0);
    prev = u;
  }
}

TEST_CASE("u_fcs example values over the binary support") {
  const std::string comp = complement_label("A");
  CHECK(u_fcs(dist({{"A", 0.0}, {comp, 1.0}}), "A") == 0.0);
  CHECK(u_fcs(dist({{"A", 0.5}, {comp, 0.5}}), "A") ==
        doctest::Approx(0.693147).epsilon(1e-6));
  // the mode-collapse hallucinator case: no response ever flips
  CHECK(u_fcs(dist({{"A", 1.0}, {comp, 0.0}}), "A") ==
        doctest::Approx(13.815511).epsilon(1e-6));
}

TEST_CASE("u_fcs rejects malformed supports") {
  CHECK_THROWS_AS(u_fcs(dist({{"A", 0.5}, {"B", 0.5}}), "A"), DomainError);
  CHECK_THROWS_AS(
      u_fcs(dist({{"A", 0.4}, {"B", 0.3}, {complement_label("A"), 0.3}}), "A"),
      DomainError);
}

TEST_CASE("festa_score is exact addition") {
  CHECK(festa_score(0.0, 0.0) == 0.0);
  CHECK(festa_score(0.693147, 0.0) == 0.693147);
  CHECK(festa_score(0.693147, 1.386294) == doctest::Approx(2.079441).epsilon(1e-12));
  rng::Stream s(11);
  for (int i = 0; i < 100; ++i) {
    const double a = s.uniform(0.0, 20.0);
    const double b = s.uniform(0.0, 20.0);
    CHECK(festa_score(a, b) == a + b);
    CHECK(festa_score(a, 0.0) == a);
  }
}

TEST_CASE("shannon_entropy examples") {
  CHECK(shannon_entropy(dist({{"A", 1.0}, {"B", 0.0}})) == 0.0);
  CHECK(shannon_entropy(dist({{"A", 0.5}, {"B", 0.5}})) ==
        doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(shannon_entropy(dist({{"A", 0.25}, {"B", 0.25}, {"C", 0.25}, {"D", 0.25}})) ==
        doctest::Approx(1.386294).epsilon(1e-6));
}

TEST_CASE("shannon_entropy properties: permutation invariance, uniform maximum") {
  rng::Stream s(21);
  for (int trial = 0; trial < 50; ++trial) {
    double a = s.uniform(0.01, 1.0);
    double b = s.uniform(0.01, 1.0);
    double c = s.uniform(0.01, 1.0);
    const double z = a + b + c;
    a /= z;
    b /= z;
    c = 1.0 - a - b;
    const double h1 = shannon_entropy(dist({{"A", a}, {"B", b}, {"C", c}}));
    const double h2 = shannon_entropy(dist({{"A", c}, {"B", a}, {"C", b}}));
    CHECK(h1 == doctest::Approx(h2).epsilon(1e-12));
    CHECK(h1 >= 0.0);
    CHECK(h1 <= std::log(3.0) + 1e-12);
  }
  const double uniform3 =
      shannon_entropy(dist({{"A", 1.0 / 3}, {"B", 1.0 / 3}, {"C", 1.0 / 3}}));
  CHECK(uniform3 == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("zero-iff properties in exact mode") {
  // u_fes == 0 iff every aggregated response equals the prediction
  CHECK(u_fes(dist({{"A", 1.0}, {"B", 0.0}}), "A", 0.0) == 0.0);
  CHECK(u_fes(dist({{"A", 0.99}, {"B", 0.01}}), "A", 0.0) > 0.0);
  // u_fcs == 0 iff no aggregated response equals the prediction
  const std::string comp = complement_label("A");
  CHECK(u_fcs(dist({{"A", 0.0}, {comp, 1.0}}), "A", 0.0) == 0.0);
  CHECK(u_fcs(dist({{"A", 0.01}, {comp, 0.99}}), "A", 0.0) > 0.0);
}

TEST_CASE("distribution validation") {
  AnswerDistribution bad;
  bad.probs = {{"A", 0.6}, {"B", 0.6}};
  bad.support_size = 2;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad.probs = {{"A", -0.1}, {"B", 1.1}};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad.probs = {{"A", 1.0}};
  bad.support_size = 2;  // stale support count
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("argmax tie-break picks the lexicographically smallest label") {
  CHECK(argmax_label(dist({{"B", 0.5}, {"A", 0.5}})) == "A");
  CHECK(argmax_label(dist({{"A", 0.2}, {"B", 0.8}})) == "B");
}

}  // TEST_SUITE
