#include "longdoc/tokenize.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "longdoc/common.hpp"

namespace longdoc {

namespace {

// Reserved-slot names written as the vocab file header (ids 0..3).
const char* kReservedNames[Vocab::kReserved] = {"<pad>", "<unk>", "<bos>",
                                                "<eos>"};

inline bool is_word_byte(unsigned char c) {
  // Non-ASCII bytes are treated as word characters so UTF-8 sequences stay
  // inside one token.
  return std::isalnum(c) || c >= 0x80;
}

inline bool is_space_byte(unsigned char c) { return std::isspace(c); }

}  // namespace

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current += static_cast<char>(std::tolower(c));
      continue;
    }
    if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
    if (!is_space_byte(c)) out.emplace_back(1, static_cast<char>(c));
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

int Vocab::lookup(std::string_view token) const {
  auto it = ids.find(std::string(token));
  return it == ids.end() ? kUnk : it->second;
}

Vocab build_vocab(const std::vector<Document>& docs, std::size_t target_size) {
  if (target_size < Vocab::kReserved + 1)
    throw std::runtime_error("vocab size must be at least " +
                             std::to_string(Vocab::kReserved + 1));
  if (docs.empty()) throw std::runtime_error("cannot build vocab from empty corpus");

  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : docs)
    for (auto& tok : split_tokens(doc.text)) ++freq[tok];

  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(),
                                                          freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::size_t keep = std::min(ranked.size(), target_size - Vocab::kReserved);

  Vocab vocab;
  vocab.tokens.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    vocab.ids.emplace(ranked[i].first, static_cast<int>(i) + Vocab::kReserved);
    vocab.tokens.push_back(std::move(ranked[i].first));
  }
  return vocab;
}

TokenSequence tokenize(std::string_view text, const Vocab& vocab,
                       std::string doc_id) {
  if (text.empty()) throw std::runtime_error("cannot tokenize empty text");
  auto surface = split_tokens(text);
  if (surface.empty())
    throw std::runtime_error("text contains no tokens" +
                             (doc_id.empty() ? "" : " (doc " + doc_id + ")"));
  TokenSequence seq;
  seq.doc_id = std::move(doc_id);
  seq.ids.reserve(surface.size());
  for (const auto& tok : surface) seq.ids.push_back(vocab.lookup(tok));
  return seq;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocab file: " + path);
  for (const char* name : kReservedNames) out << name << "\n";
  for (const auto& tok : tokens) out << tok << "\n";
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocab file: " + path);
  Vocab vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= kReserved) {
      if (line != kReservedNames[line_no - 1])
        throw std::runtime_error("vocab file header mismatch on line " +
                                 std::to_string(line_no));
      continue;
    }
    vocab.ids.emplace(line, static_cast<int>(vocab.tokens.size()) + kReserved);
    vocab.tokens.push_back(std::move(line));
  }
  if (line_no < kReserved)
    throw std::runtime_error("truncated vocab file: " + path);
  return vocab;
}

std::uint64_t Vocab::content_hash() const {
  std::uint64_t h = fnv1a64("vocab");
  for (const auto& tok : tokens) {
    h = fnv1a64(tok, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

}  // namespace longdoc
