#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "s2sent/numerics/tensor.hpp"

namespace s2sent::encoder {

inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kUnknownId = 1;
inline constexpr std::size_t kFirstTokenId = 2;  // prepended for first-token pooling
inline constexpr std::size_t kReservedIds = 3;

struct TokenSequence {
  std::vector<std::size_t> ids;

  std::size_t size() const { return ids.size(); }
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::size_t token_id(std::string_view word, std::size_t vocab_size) {
  return kReservedIds + static_cast<std::size_t>(fnv1a(word) % (vocab_size - kReservedIds));
}

/// Lowercased whitespace tokens hashed into [kReservedIds, vocab_size).
inline TokenSequence tokenize(std::string_view text, std::size_t vocab_size) {
  require(vocab_size > kReservedIds, "tokenize: vocab_size must exceed the reserved ids");
  TokenSequence seq;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) seq.ids.push_back(token_id(word, vocab_size));
    word.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else {
      word.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  if (seq.ids.empty()) throw ContractError("tokenize: empty text");
  return seq;
}

inline TokenSequence with_first_token(TokenSequence seq) {
  seq.ids.insert(seq.ids.begin(), kFirstTokenId);
  return seq;
}

}  // namespace s2sent::encoder
