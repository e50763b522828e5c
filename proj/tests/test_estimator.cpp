#include "doctest.h"

#include <cmath>

#include "festa/mocks.hpp"
#include "festa/estimator.hpp"
#include "test_support.hpp"

using namespace festa;
using namespace festa::estimator;
using client::ModelResponse;

namespace {

ModelResponse ok(const std::string& label) {
  ModelResponse r;
  r.raw_text = label;
  r.parsed_label = label;
  return r;
}

ModelResponse failure() {
  ModelResponse r;
  r.status = client::QueryStatus::parse_failure;
  return r;
}

std::vector<ModelResponse> responses(const std::vector<std::string>& labels) {
  std::vector<ModelResponse> out;
  for (const auto& l : labels) out.push_back(ok(l));
  return out;
}

const std::vector<std::string> kAB = {"A", "B"};
const std::vector<std::string> kABCD = {"A", "B", "C", "D"};

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("estimate_distribution counts frequencies") {
  const auto d = estimate_distribution(responses({"A", "A", "B", "A"}), kAB,
                                       Pooling::full);
  CHECK(d.probs.at("A") == doctest::Approx(0.75));
  CHECK(d.probs.at("B") == doctest::Approx(0.25));
  CHECK(d.sample_count == 4);
  CHECK(d.support_size == 2);
  d.validate();
}

TEST_CASE("binary pooling maps everything else onto the complement") {
  const auto d = estimate_distribution(responses({"A", "B", "C", "D"}), kABCD,
                                       Pooling::binary, "A");
  CHECK(d.probs.size() == 2);
  CHECK(d.probs.at("A") == doctest::Approx(0.25));
  CHECK(d.probs.at(complement_label("A")) == doctest::Approx(0.75));
}

TEST_CASE("parse failures reduce the aggregation count") {
  std::vector<ModelResponse> rs = {ok("A"), failure(), ok("A")};
  const auto d = estimate_distribution(rs, kAB, Pooling::full);
  CHECK(d.probs.at("A") == 1.0);
  CHECK(d.probs.at("B") == 0.0);
  CHECK(d.sample_count == 2);
  CHECK(d.support_size == 1);
}

TEST_CASE("zero parseable responses is unusable") {
  std::vector<ModelResponse> rs = {failure(), failure()};
  CHECK_THROWS_AS(estimate_distribution(rs, kAB, Pooling::full), InstanceUnusable);
}

TEST_CASE("aggregation order does not change scores") {
  const auto d1 = estimate_distribution(responses({"A", "B", "A", "B", "A"}), kAB,
                                        Pooling::full);
  const auto d2 = estimate_distribution(responses({"B", "A", "A", "A", "B"}), kAB,
                                        Pooling::full);
  CHECK(d1.probs == d2.probs);
  CHECK(u_fes(d1, "A") == u_fes(d2, "A"));
}

TEST_CASE("score_festa composes the closed forms") {
  const auto inst = testing::spatial_instance("e1");
  // ideal behavior: all FES = prediction, all FCS flip
  const auto s_ideal = score_festa(inst, responses({"A", "A", "A", "A"}),
                                   responses({"B", "B", "B", "B"}), "A", 0.0);
  CHECK(s_ideal.u_fes == 0.0);
  CHECK(s_ideal.u_fcs == 0.0);
  CHECK(s_ideal.u_festa == 0.0);

  // FES half right, FCS never flips: -ln(0.5) and -ln(1e-6)
  const auto s = score_festa(inst, responses({"A", "A", "B", "B"}),
                             responses({"A", "A", "A", "A"}), "A", 1e-6);
  CHECK(s.u_fes == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(s.u_fcs == doctest::Approx(13.815511).epsilon(1e-6));
  CHECK(s.u_festa == doctest::Approx(14.508658).epsilon(1e-6));
  CHECK(s.u_festa == s.u_fes + s.u_fcs);
  CHECK(s.fes_parsed == 4);
  CHECK(s.fcs_total == 4);
}

TEST_CASE("score_festa flags instances with mostly-unparseable sets") {
  const auto inst = testing::spatial_instance("e2");
  std::vector<ModelResponse> bad_fes = {ok("A"), failure(), failure(), failure()};
  CHECK_THROWS_AS(score_festa(inst, bad_fes, responses({"B"}), "A", 1e-6),
                  InstanceUnusable);
  // exactly half parsed is still usable
  std::vector<ModelResponse> half = {ok("A"), ok("A"), failure(), failure()};
  CHECK_NOTHROW(score_festa(inst, half, responses({"B", "B"}), "A", 1e-6));
}

TEST_CASE("entropy ablation: symmetric entropy vs asymmetric KL") {
  const auto inst = testing::spatial_instance("e3");
  // q_FCS(flip) = 0.9: entropy treats 0.9/0.1 and 0.1/0.9 identically
  std::vector<std::string> mostly_flip;
  for (int i = 0; i < 9; ++i) mostly_flip.push_back("B");
  mostly_flip.push_back("A");
  std::vector<std::string> mostly_stay;
  for (int i = 0; i < 9; ++i) mostly_stay.push_back("A");
  mostly_stay.push_back("B");

  const auto fes = responses({"A", "A"});
  const auto abl_flip = score_entropy_ablation(fes, responses(mostly_flip), kAB, "A");
  const auto abl_stay = score_entropy_ablation(fes, responses(mostly_stay), kAB, "A");
  CHECK(abl_flip.h_fcs == doctest::Approx(0.3251).epsilon(1e-3));
  CHECK(abl_flip.h_fcs == doctest::Approx(abl_stay.h_fcs).epsilon(1e-12));

  const auto s_flip = score_festa(inst, fes, responses(mostly_flip), "A", 1e-6);
  const auto s_stay = score_festa(inst, fes, responses(mostly_stay), "A", 1e-6);
  CHECK(s_flip.u_fcs == doctest::Approx(0.10536).epsilon(1e-3));
  CHECK(s_stay.u_fcs == doctest::Approx(2.302585).epsilon(1e-3));
  CHECK(s_flip.u_fcs < s_stay.u_fcs);  // KL sees the direction entropy cannot
}

TEST_CASE("h_fes matches entropy over the full support") {
  const auto abl = score_entropy_ablation(responses({"A", "B", "C", "D"}),
                                          responses({"B"}), kABCD, "A");
  CHECK(abl.h_fes == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(abl.h_sum == doctest::Approx(abl.h_fes + abl.h_fcs).epsilon(1e-12));
}

TEST_CASE("verbalized confidence parsing") {
  CHECK(parse_verbalized_confidence("90") == doctest::Approx(0.10));
  CHECK(parse_verbalized_confidence("confidence: 55%") == doctest::Approx(0.45));
  CHECK(parse_verbalized_confidence("I'd say 72.5 out of 100") ==
        doctest::Approx(0.275));
  CHECK(!parse_verbalized_confidence("high").has_value());
  CHECK(!parse_verbalized_confidence("confidence 200").has_value());
}

TEST_CASE("candidate-list parsing accepts fractions and percentages") {
  const auto pairs = parse_candidate_list("A: 0.8\nB: 0.15\nc: 0.05", kABCD);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0] == std::pair<std::string, double>{"A", 0.8});
  CHECK(pairs[2].first == "C");

  const auto pct = parse_candidate_list("A: 80\nB: 20", kABCD);
  REQUIRE(pct.size() == 2);
  CHECK(pct[0].second == doctest::Approx(0.8));

  CHECK(parse_candidate_list("no structure at all", kABCD).empty());
  CHECK(parse_candidate_list("Z: 0.9", kABCD).empty());  // unknown label
}

TEST_CASE("BU aggregation: mean elicited mass on the prediction") {
  // samples put 0.8, 0.6, 1.0, 0.6, 0.5 on A -> uncertainty 0.30
  std::vector<std::string> replies = {"A: 0.8\nB: 0.2", "A: 0.6\nB: 0.4", "A: 1.0",
                                      "A: 0.6\nC: 0.4", "A: 0.5\nD: 0.5"};
  CHECK(baseline_bu_from_replies(replies, kABCD, "A") == doctest::Approx(0.30));
  // no sample mentions the prediction -> 1.0
  std::vector<std::string> off = {"B: 0.9\nC: 0.1", "B: 1.0"};
  CHECK(baseline_bu_from_replies(off, kABCD, "A") == doctest::Approx(1.0));
  // all samples malformed -> missing
  std::vector<std::string> broken = {"???", ""};
  CHECK(!baseline_bu_from_replies(broken, kABCD, "A").has_value());
  // malformed samples contribute zero confidence but stay in the denominator
  std::vector<std::string> mixed = {"A: 1.0", "???"};
  CHECK(baseline_bu_from_replies(mixed, kABCD, "A") == doctest::Approx(0.5));
}

TEST_CASE("request builders separate decode streams by replicate and purpose") {
  const auto inst = testing::four_option_instance("e4");
  client::ModelEndpoint endpoint;
  endpoint.base_url = "http://example";
  const auto oe = oe_requests(inst, endpoint, {}, "", 5);
  CHECK(oe.size() == 5);
  CHECK(oe[0].temperature == endpoint.temperature);
  CHECK(client::cache_key("m", oe[0]) != client::cache_key("m", oe[1]));

  const auto orig = original_request(inst, endpoint, {}, "");
  CHECK(orig.temperature == endpoint.greedy_temperature);
  CHECK(client::cache_key("m", orig) != client::cache_key("m", oe[0]));

  const auto vc = vc_request(inst, endpoint, {}, "", "B");
  CHECK(vc.turns.size() == 3);
  CHECK(vc.turns[1].role == "assistant");
  CHECK(vc.turns[2].text == kConfidencePrompt);

  const auto ia_t = ia_requests(inst, endpoint, {}, IaMode::text, 4, 0, {}, "ia");
  const auto ru = ia_requests(inst, endpoint, {}, IaMode::text, 4, 0, {}, "ru");
  REQUIRE(ia_t.size() == 4);
  REQUIRE(ru.size() == 4);
  CHECK(ia_t[0].turns[0].text != ru[0].turns[0].text);  // distinct seed streams
}

TEST_CASE("baseline ops against in-process mocks") {
  const auto inst = testing::four_option_instance("bl1", "B");
  client::ModelEndpoint endpoint;
  endpoint.base_url = "http://in-process";

  // deterministic profiles: zero output entropy and zero augmentation entropy
  mocks::MockBackend ideal({mocks::MockKind::ideal, 0.5, "A", 0, 0.0}, {inst});
  CHECK(baseline_oe(ideal, endpoint, inst, {}, "", 8, 4) == 0.0);
  CHECK(baseline_ia(ideal, endpoint, {}, inst, IaMode::text, 4, 0, {}, 4) == 0.0);
  CHECK(baseline_ru(ideal, endpoint, {}, inst, 4, 0, {}, 4) == 0.0);
  const auto vc = baseline_vc(ideal, endpoint, inst, {}, "", "B");
  REQUIRE(vc.has_value());
  CHECK(*vc == doctest::Approx(0.15));  // the ideal profile verbalizes 85
  const auto bu = baseline_bu(ideal, endpoint, inst, {}, "", "B", 4, 5, 4);
  REQUIRE(bu.has_value());
  CHECK(*bu == doctest::Approx(0.3));  // mock puts 0.7 on its answer

  // a single decode always has zero entropy
  mocks::MockBackend noisy({mocks::MockKind::noisy, 0.5, "A", 13, 0.0}, {inst});
  CHECK(baseline_oe(noisy, endpoint, inst, {}, "", 1, 1) == 0.0);
  // the noisy profile produces positive entropy as the ensemble grows
  CHECK(baseline_oe(noisy, endpoint, inst, {}, "", 24, 4) > 0.0);
  CHECK(baseline_ia(noisy, endpoint, {}, inst, IaMode::text, 12, 0, {}, 4) > 0.0);
}

TEST_CASE("model-backed paraphrasing goes through the client transport") {
  const auto inst = testing::four_option_instance("mb1");
  mocks::MockBackend backend({mocks::MockKind::ideal, 0.5, "A", 0, 0.0}, {inst});
  client::ModelEndpoint endpoint;
  endpoint.base_url = "http://in-process";
  const auto provider = model_backed_paraphraser(backend, endpoint, inst.id);
  const auto out = transforms::paraphrase_question(inst.question, provider, 3, 0);
  REQUIRE(out.size() == 3);
  for (int i = 0; i < 3; ++i) {
    // the mock echoes the question under a per-replicate variant tag
    CHECK(out[i].find("Variant " + std::to_string(i)) == 0);
    CHECK(out[i].find(inst.question) != std::string::npos);
  }
}

TEST_CASE("ia media requests regenerate deterministic variants") {
  auto inst = testing::spatial_instance("e5");
  inst.media.kind = MediaKind::image;
  inst.media.path = "x.png";
  client::ModelEndpoint endpoint;
  endpoint.base_url = "http://example";
  const auto png = testing::tiny_png();
  const auto a = ia_requests(inst, endpoint, {}, IaMode::media, 3, 7, png, "ia");
  const auto b = ia_requests(inst, endpoint, {}, IaMode::media, 3, 7, png, "ia");
  REQUIRE(a.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(a[i].media == b[i].media);
    CHECK(a[i].media_sha256 == b[i].media_sha256);
    CHECK(a[i].turns[0].text == b[i].turns[0].text);
  }
}

}  // TEST_SUITE
