#include "longdoc/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "longdoc/common.hpp"

namespace longdoc {

void DocEmbeddingStore::add(const std::string& id,
                            std::span<const double> vec) {
  if (dim == 0) dim = vec.size();
  if (vec.size() != dim)
    throw std::runtime_error("embedding dim mismatch for doc " + id);
  if (!index.emplace(id, ids.size()).second)
    throw std::runtime_error("duplicate embedding for doc " + id);
  ids.push_back(id);
  vectors.insert(vectors.end(), vec.begin(), vec.end());
}

std::span<const double> DocEmbeddingStore::vec(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end())
    throw std::runtime_error("no embedding for doc id: " + id);
  return {vectors.data() + it->second * dim, dim};
}

std::vector<double> embed_document(const TokenSequence& tokens,
                                   const WindowingConfig& windowing,
                                   const EncoderConfig& cfg,
                                   const EncoderWeights& weights) {
  WindowSet windows = make_windows(tokens, windowing);
  std::vector<double> mean(static_cast<std::size_t>(cfg.model_dim), 0.0);
  for (std::size_t w = 0; w < windows.count(); ++w) {
    auto result = encode(windows.padded_ids[w], windows.masks[w], cfg, weights);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += result.pooled[c];
  }
  const double inv = 1.0 / static_cast<double>(windows.count());
  for (auto& v : mean) v *= inv;
  return mean;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::runtime_error("cosine of vectors with different dims");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) {
    warn("cosine of zero-norm vector, scoring 0");
    return 0.0;
  }
  // Rounding can push identical vectors a hair past 1.
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

RankedList rank_candidates(const std::string& query_id,
                           const DocEmbeddingStore& store,
                           const std::vector<std::string>& pool) {
  auto query = store.vec(query_id);
  RankedList list;
  list.query_id = query_id;
  list.entries.reserve(pool.size());
  std::unordered_set<std::string> seen;
  for (const auto& id : pool) {
    if (id == query_id)
      throw std::runtime_error("candidate pool contains the query itself: " +
                               id);
    if (!seen.insert(id).second)
      throw std::runtime_error("candidate pool repeats id: " + id);
    list.entries.push_back({id, cosine(query, store.vec(id))});
  }
  std::sort(list.entries.begin(), list.entries.end(),
            [](const RankedEntry& a, const RankedEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.id < b.id;
            });
  return list;
}

namespace {

constexpr char kStoreMagic[8] = {'L', 'D', 'S', 'T', '0', '0', '0', '1'};

}  // namespace

void DocEmbeddingStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embedding store: " + path);
  out.write(kStoreMagic, sizeof kStoreMagic);
  auto write_u64 = [&](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  };
  write_u64(dim);
  write_u64(ids.size());
  write_u64(fingerprint);
  for (const auto& id : ids) {
    write_u64(id.size());
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  out.write(reinterpret_cast<const char*>(vectors.data()),
            static_cast<std::streamsize>(vectors.size() * sizeof(double)));
}

DocEmbeddingStore DocEmbeddingStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding store: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kStoreMagic, sizeof magic) != 0)
    throw std::runtime_error("not an embedding store: " + path);
  auto read_u64 = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("truncated embedding store: " + path);
    return v;
  };
  DocEmbeddingStore store;
  store.dim = read_u64();
  const std::uint64_t count = read_u64();
  store.fingerprint = read_u64();
  store.ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id(read_u64(), '\0');
    in.read(id.data(), static_cast<std::streamsize>(id.size()));
    if (!in) throw std::runtime_error("truncated embedding store: " + path);
    store.index.emplace(id, store.ids.size());
    store.ids.push_back(std::move(id));
  }
  store.vectors.resize(count * store.dim);
  in.read(reinterpret_cast<char*>(store.vectors.data()),
          static_cast<std::streamsize>(store.vectors.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated embedding store: " + path);
  return store;
}

}  // namespace longdoc
