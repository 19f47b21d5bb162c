#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "longdoc/corpus.hpp"

namespace longdoc {

// Frequency vocabulary with dense ids. Ids 0..3 are reserved; corpus tokens
// start at 4, assigned frequency-descending with lexicographic tie-break.
struct Vocab {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kReserved = 4;

  std::vector<std::string> tokens;  // tokens[i] has id i + kReserved
  std::unordered_map<std::string, int> ids;

  std::size_t size() const { return tokens.size() + kReserved; }
  int lookup(std::string_view token) const;

  void save(const std::string& path) const;
  static Vocab load(const std::string& path);
  std::uint64_t content_hash() const;
};

// Lowercased surface tokens: maximal alphanumeric runs, with each punctuation
// character standing alone. Whitespace only separates.
std::vector<std::string> split_tokens(std::string_view text);

Vocab build_vocab(const std::vector<Document>& docs, std::size_t target_size);

struct TokenSequence {
  std::string doc_id;
  std::vector<int> ids;
  std::size_t length() const { return ids.size(); }
};

TokenSequence tokenize(std::string_view text, const Vocab& vocab,
                       std::string doc_id = "");

}  // namespace longdoc
