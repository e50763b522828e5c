#include "doctest.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "festa/transforms.hpp"

using namespace festa;
using transforms::complement_question;
using transforms::paraphrase_question;

namespace {

std::multiset<std::string> words_lower(const std::string& text) {
  std::multiset<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

bool contains_word(const std::string& text, const std::string& word) {
  const auto words = words_lower(text);
  return words.count(word) > 0;
}

}  // namespace

TEST_SUITE("transforms_text") {

TEST_CASE("paraphrases preserve content words") {
  const std::string q = "Is the cat left of the car?";
  const auto variants = paraphrase_question(q, {}, 6, 17);
  REQUIRE(variants.size() == 6);
  for (const auto& v : variants) {
    CHECK(contains_word(v, "cat"));
    CHECK(contains_word(v, "car"));
    CHECK(contains_word(v, "left"));
    CHECK(v != q);  // fresh samples, never the untouched original
  }
}

TEST_CASE("paraphrase determinism and distinctness") {
  const std::string q = "Which sound comes after the bell?";
  const auto a = paraphrase_question(q, {}, 8, 3);
  const auto b = paraphrase_question(q, {}, 8, 3);
  CHECK(a == b);
  const std::set<std::string> unique(a.begin(), a.end());
  CHECK(unique.size() == 8);
  const auto c = paraphrase_question(q, {}, 8, 4);
  CHECK(a != c);
}

TEST_CASE("paraphrase degrades to duplicates instead of failing") {
  const auto many = paraphrase_question("Is the dog above the table?", {}, 100, 9);
  CHECK(many.size() == 100);  // pool is smaller; duplicates pad the tail
  const std::set<std::string> unique(many.begin(), many.end());
  CHECK(unique.size() >= 12);
}

TEST_CASE("paraphrase rejects n < 1") {
  CHECK_THROWS_AS(paraphrase_question("Hmm?", {}, 0, 1), DomainError);
}

TEST_CASE("complement swaps the spatial relation without negation words") {
  const std::string q = "Is the cat to the left of the car?";
  const std::string c = complement_question(q, {}, 0);
  CHECK(c == "Is the cat to the right of the car?");
  CHECK(c.find("not") == std::string::npos);
}

TEST_CASE("complement is an involution on the relation word") {
  const std::vector<std::string> questions = {
      "Is the cat to the right of the car?",
      "Is the lamp above the desk?",
      "Is the bin below the sink?",
      "Did the horn sound before the crash?",
      "Did the bell ring after the announcement?",
      "Is the first tone longer than the second?",
      "Is the first tone shorter than the second?",
      "Are there more dogs than cats?",
      "Are there fewer dogs than cats?",
      "Is the bike in front of the bus?",
      "Is the bike behind the bus?",
  };
  for (const auto& q : questions) {
    const std::string once = complement_question(q, {}, 0);
    CHECK(once != q);
    CHECK(complement_question(once, {}, 0) == q);
  }
}

TEST_CASE("complement preserves capitalization") {
  CHECK(complement_question("Left of the car, is there a cat?", {}, 0) ==
        "Right of the car, is there a cat?");
}

TEST_CASE("unrecognized relations raise NotComplementable") {
  CHECK_THROWS_AS(complement_question("Describe the image.", {}, 0), NotComplementable);
  CHECK_THROWS_AS(complement_question("How many events are there?", {}, 0),
                  NotComplementable);
  CHECK(!transforms::has_invertible_relation("Describe the image."));
  CHECK(transforms::has_invertible_relation("Is A before B?"));
}

TEST_CASE("relation words are matched at word boundaries only") {
  // "leftovers" must not be treated as the relation "left"
  CHECK_THROWS_AS(complement_question("Are the leftovers on the table?", {}, 0),
                  NotComplementable);
}

TEST_CASE("model-backed provider routes through the completion hook") {
  int calls = 0;
  auto provider = transforms::ParaphraseProvider::model_backed(
      [&calls](const std::string& prompt, int index) {
        ++calls;
        CHECK(prompt.find("Question: base?") != std::string::npos);
        return "rewrite " + std::to_string(index);
      });
  const auto out = paraphrase_question("base?", provider, 3, 0);
  CHECK(out == std::vector<std::string>{"rewrite 0", "rewrite 1", "rewrite 2"});
  CHECK(calls == 3);
}

}  // TEST_SUITE
