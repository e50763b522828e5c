#include <algorithm>
#include <cctype>
#include <set>

#include "festa/rng.hpp"
#include "festa/transforms.hpp"

namespace festa::transforms {

namespace {

// Scaffold clauses composed around the question. Each template either
// prefixes or suffixes a politeness/instruction clause; none of them touch
// the content words of the question itself.
const std::vector<std::string>& wrapper_templates() {
  static const std::vector<std::string> t = {
      "Please answer: {q}",
      "{q} Please answer.",
      "Could you tell me: {q}",
      "{q} Respond with your best option.",
      "Here is a question. {q}",
      "Consider the input carefully. {q}",
      "{q} Take a careful look first.",
      "Answer the following. {q}",
      "I would like to know: {q}",
      "Quick question: {q}",
      "{q} Give the single best answer.",
      "Kindly answer this: {q}",
  };
  return t;
}

// Meaning-preserving word swaps. Deliberately tiny: only scaffolding nouns
// that never carry the relation being asked about.
const std::vector<std::pair<std::string, std::string>>& synonym_lexicon() {
  static const std::vector<std::pair<std::string, std::string>> lex = {
      {"image", "picture"}, {"picture", "image"},   {"photo", "picture"},
      {"photograph", "picture"}, {"audio", "sound"}, {"sound", "audio"},
      {"clip", "recording"},
  };
  return lex;
}

// Invertible relations, longest phrase first. Complementing never inserts a
// negation word; it swaps the relation for its antonym.
const std::vector<std::pair<std::string, std::string>>& antonym_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"in front of", "behind"}, {"behind", "in front of"},
      {"left", "right"},         {"right", "left"},
      {"above", "below"},        {"below", "above"},
      {"before", "after"},       {"after", "before"},
      {"longer", "shorter"},     {"shorter", "longer"},
      {"more", "fewer"},         {"fewer", "more"},
  };
  return pairs;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Finds `word` in `text` at word boundaries, case-insensitively.
// Returns npos when absent.
size_t find_word(const std::string& text, const std::string& word, size_t from = 0) {
  auto lower = [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  };
  for (size_t i = from; i + word.size() <= text.size(); ++i) {
    bool match = true;
    for (size_t j = 0; j < word.size(); ++j) {
      if (lower(text[i + j]) != lower(word[j])) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    const bool left_ok = i == 0 || !is_word_char(text[i - 1]);
    const size_t end = i + word.size();
    const bool right_ok = end == text.size() || !is_word_char(text[end]);
    if (left_ok && right_ok) return i;
  }
  return std::string::npos;
}

std::string substitute(const std::string& tmpl, const std::string& question) {
  const std::string marker = "{q}";
  const size_t at = tmpl.find(marker);
  if (at == std::string::npos) return tmpl;
  return tmpl.substr(0, at) + question + tmpl.substr(at + marker.size());
}

std::string swap_first_synonym(const std::string& question) {
  for (const auto& [from, to] : synonym_lexicon()) {
    const size_t at = find_word(question, from);
    if (at != std::string::npos) {
      return question.substr(0, at) + to + question.substr(at + from.size());
    }
  }
  return question;
}

std::vector<std::string> model_backed_batch(const std::string& question,
                                            const ParaphraseProvider& provider,
                                            const std::string& tmpl, int n) {
  std::vector<std::string> out;
  std::string prompt = tmpl;
  const size_t at = prompt.find("{question}");
  if (at != std::string::npos) prompt.replace(at, 10, question);
  for (int i = 0; i < n; ++i) out.push_back(provider.completion()(prompt, i));
  return out;
}

}  // namespace

ParaphraseProvider ParaphraseProvider::model_backed(CompletionFn fn) {
  ParaphraseProvider p;
  p.mode_ = Mode::model_backed;
  p.completion_ = std::move(fn);
  return p;
}

std::vector<std::string> paraphrase_question(const std::string& question,
                                             const ParaphraseProvider& provider,
                                             int n, uint64_t seed) {
  if (n < 1) throw DomainError("paraphrase_question requires n >= 1");
  if (provider.mode() == ParaphraseProvider::Mode::model_backed) {
    return model_backed_batch(question, provider,
                              provider.paraphrase_prompt_template, n);
  }

  std::vector<std::string> pool;
  std::set<std::string> seen;
  const std::string swapped = swap_first_synonym(question);
  for (const auto& tmpl : wrapper_templates()) {
    for (const std::string& base : {question, swapped}) {
      const std::string candidate = substitute(tmpl, base);
      if (seen.insert(candidate).second) pool.push_back(candidate);
    }
  }
  rng::Stream stream(rng::derive(seed, "paraphrase", question));
  stream.shuffle(pool);

  std::vector<std::string> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<size_t>(i) >= pool.size()) {
      out.push_back(pool[i % pool.size()]);
    } else {
      out.push_back(pool[i]);
    }
  }
  if (static_cast<size_t>(n) > pool.size()) {
    log_warn("paraphrase template pool exhausted at " + std::to_string(pool.size()) +
             " distinct variants; requested " + std::to_string(n) +
             ", padding with duplicates");
  }
  return out;
}

bool has_invertible_relation(const std::string& question) {
  for (const auto& [from, _] : antonym_pairs()) {
    if (find_word(question, from) != std::string::npos) return true;
  }
  return false;
}

std::string complement_question(const std::string& question,
                                const ParaphraseProvider& provider, uint64_t seed) {
  if (provider.mode() == ParaphraseProvider::Mode::model_backed) {
    return model_backed_batch(question, provider,
                              provider.complement_prompt_template, 1)[0];
  }
  (void)seed;  // template complementation is a pure rewrite

  // Earliest relation occurrence wins; longest phrase first at equal position.
  size_t best_at = std::string::npos;
  size_t best_idx = 0;
  for (size_t i = 0; i < antonym_pairs().size(); ++i) {
    const size_t at = find_word(question, antonym_pairs()[i].first);
    if (at < best_at) {
      best_at = at;
      best_idx = i;
    }
  }
  if (best_at == std::string::npos) {
    throw NotComplementable("no invertible relation in question: " + question);
  }
  const auto& [from, to] = antonym_pairs()[best_idx];
  std::string replacement = to;
  if (std::isupper(static_cast<unsigned char>(question[best_at])) &&
      !replacement.empty()) {
    replacement[0] =
        static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  return question.substr(0, best_at) + replacement +
         question.substr(best_at + from.size());
}

}  // namespace festa::transforms
