#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "longdoc/encoder.hpp"
#include "longdoc/window.hpp"

namespace longdoc {

// One d-dimensional vector per document, tagged with the fingerprint of the
// encoder configuration that produced it.
struct DocEmbeddingStore {
  std::size_t dim = 0;
  std::uint64_t fingerprint = 0;
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> vectors;  // row-major, ids.size() x dim

  void add(const std::string& id, std::span<const double> vec);
  bool contains(const std::string& id) const { return index.count(id) > 0; }
  std::span<const double> vec(const std::string& id) const;
  std::size_t count() const { return ids.size(); }

  void save(const std::string& path) const;
  static DocEmbeddingStore load(const std::string& path);
};

// Unweighted mean over per-window pooled embeddings.
std::vector<double> embed_document(const TokenSequence& tokens,
                                   const WindowingConfig& windowing,
                                   const EncoderConfig& cfg,
                                   const EncoderWeights& weights);

// Zero-norm inputs score 0 (with a warning) so rankings stay total.
double cosine(std::span<const double> a, std::span<const double> b);

struct RankedEntry {
  std::string id;
  double score;
};

struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;  // scores non-increasing, ties by id
};

// Scores every pool member against the query (exhaustive, no truncation).
RankedList rank_candidates(const std::string& query_id,
                           const DocEmbeddingStore& store,
                           const std::vector<std::string>& pool);

}  // namespace longdoc
