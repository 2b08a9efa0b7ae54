#pragma once

#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "s2sent/numerics/rng.hpp"

namespace s2sent::harness {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SentencePairRecord {
  std::string sentence_a;
  std::string sentence_b;
  double gold_score = 0.0;

  friend bool operator==(const SentencePairRecord&, const SentencePairRecord&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

/// Parses "sentence_a<TAB>sentence_b<TAB>score" rows. Blank lines are
/// skipped; anything else malformed fails with its 1-based line number.
inline std::vector<SentencePairRecord> parse_pairs_tsv(std::istream& in, const std::string& origin,
                                                       std::ostream* warnings = &std::cerr) {
  std::vector<SentencePairRecord> out;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw DataError(origin + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      cols.push_back(line.substr(start, tab - start));
    }
    cols.push_back(line.substr(start));
    if (cols.size() != 3) fail("expected 3 tab-separated columns, found " + std::to_string(cols.size()));
    SentencePairRecord rec{detail::trim(cols[0]), detail::trim(cols[1]), 0.0};
    if (rec.sentence_a.empty() || rec.sentence_b.empty()) fail("empty sentence");
    const std::string score = detail::trim(cols[2]);
    const char* first = score.data();
    const char* last = first + score.size();
    const auto [ptr, ec] = std::from_chars(first, last, rec.gold_score);
    if (score.empty() || ec != std::errc() || ptr != last || !std::isfinite(rec.gold_score)) {
      fail("score '" + score + "' is not a finite number");
    }
    out.push_back(std::move(rec));
  }
  if (out.empty() && warnings) *warnings << "warning: " << origin << " holds no sentence pairs\n";
  return out;
}

inline std::vector<SentencePairRecord> load_pairs_tsv(const std::filesystem::path& path,
                                                      std::ostream* warnings = &std::cerr) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_pairs_tsv(in, path.string(), warnings);
}

/// Scores are written with 17 significant digits so they read back exactly.
inline void write_pairs_tsv(std::ostream& os, const std::vector<SentencePairRecord>& pairs) {
  for (const auto& p : pairs) {
    std::ostringstream score;
    score.precision(17);
    score << p.gold_score;
    os << p.sentence_a << '\t' << p.sentence_b << '\t' << score.str() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic corpus. Sentences fill kSlots content slots of a template; each
// slot draws from its own word pool, so two sentences share a content word
// only in the same slot. Gold score = 5 * (matching slots / kSlots).

inline constexpr std::size_t kSlots = 6;
inline constexpr std::size_t kWordsPerSlot = 48;

namespace detail {

inline constexpr const char* kTemplates[] = {
    "the {0} {1} {2} the {3} {4} near the {5}",
    "a {0} {1} {2} a {3} {4} by the {5}",
    "every {0} {1} {2} some {3} {4} in the {5}",
    "that {0} {1} {2} this {3} {4} at the {5}",
};

inline std::string synth_word(std::size_t slot, std::size_t index) {
  static constexpr const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                                           "p", "r", "s", "t", "v", "z", "br", "st"};
  static constexpr const char* vowels[] = {"a", "e", "i", "o", "u", "ai"};
  static constexpr const char* codas[] = {"n", "r", "l", "sk", "m", "x"};
  // onset + vowel already separate the 48 words of one slot; the digit
  // suffix separates slots.
  std::size_t k = slot * kWordsPerSlot + index;
  std::string w;
  w += onsets[k % 16];
  k /= 16;
  w += vowels[k % 6];
  k /= 6;
  w += onsets[(k * 7 + slot) % 16];
  w += vowels[(k + slot) % 6];
  w += codas[k % 6];
  w += std::to_string(slot);
  return w;
}

inline std::string render(std::size_t tmpl, const std::array<std::size_t, kSlots>& words) {
  std::string out;
  const std::string_view t = kTemplates[tmpl];
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == '{') {
      const std::size_t slot = static_cast<std::size_t>(t[i + 1] - '0');
      out += synth_word(slot, words[slot]);
      i += 2;
    } else {
      out += t[i];
    }
  }
  return out;
}

inline std::array<std::size_t, kSlots> draw_words(SplitMix64& rng) {
  std::array<std::size_t, kSlots> w{};
  for (auto& x : w) x = rng.below(kWordsPerSlot);
  return w;
}

}  // namespace detail

inline double overlap_gold(std::size_t matching_slots) {
  return 5.0 * static_cast<double>(matching_slots) / static_cast<double>(kSlots);
}

/// Pairs with a uniformly drawn number of replaced slots (0..kSlots).
inline std::vector<SentencePairRecord> synth_corpus(std::size_t n_pairs, std::uint64_t seed) {
  require(n_pairs >= 1, "synth_corpus: n_pairs must be at least 1");
  SplitMix64 rng(derive_seed(seed, {0xc0}));
  constexpr std::size_t n_templates = std::size(detail::kTemplates);
  std::vector<SentencePairRecord> out;
  out.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const std::size_t tmpl = rng.below(n_templates);
    const auto a = detail::draw_words(rng);
    auto b = a;
    const std::size_t replaced = rng.below(kSlots + 1);
    std::array<std::size_t, kSlots> slots{};
    for (std::size_t s = 0; s < kSlots; ++s) slots[s] = s;
    shuffle(slots, rng);
    for (std::size_t j = 0; j < replaced; ++j) {
      const std::size_t s = slots[j];
      b[s] = (a[s] + 1 + rng.below(kWordsPerSlot - 1)) % kWordsPerSlot;
    }
    out.push_back({detail::render(tmpl, a), detail::render(tmpl, b), overlap_gold(kSlots - replaced)});
  }
  return out;
}

/// Unlabelled training sentences from the same generator.
inline std::vector<std::string> synth_sentences(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(derive_seed(seed, {0x5e}));
  constexpr std::size_t n_templates = std::size(detail::kTemplates);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t tmpl = rng.below(n_templates);
    out.push_back(detail::render(tmpl, detail::draw_words(rng)));
  }
  return out;
}

}  // namespace s2sent::harness
