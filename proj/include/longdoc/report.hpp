#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "longdoc/bench.hpp"
#include "longdoc/metrics.hpp"

namespace longdoc {

struct TableRow {
  std::string model;
  MetricReport metrics;
  std::optional<ThroughputReport> throughput;
  std::optional<std::size_t> context_cap;  // nullopt renders as "Flex"
};

struct RenderedTable {
  std::string csv;
  std::string text;  // aligned, human-readable
};

// Metric rendered as a percentage with one decimal, rounded half to even.
std::string format_percent_1dp(double value);

// Throughput rendered to the nearest 0.1k tokens/sec, e.g. "46.1k".
std::string format_tokens_per_sec(double value);

// Rows must share one task kind. Classification columns:
// Model, Micro-F1, Macro-F1, Acc., AUC, Len, Tok/s. Retrieval columns:
// Model, MAP, MRR, R@k, nDCG@k (per recorded k), Len, Tok/s.
RenderedTable emit_table(const std::vector<TableRow>& rows);

// FNV-1a over the raw file bytes.
std::uint64_t file_hash(const std::string& path);

// Flat ordered key=value manifest; enough to re-run a pipeline bit-for-bit
// (timing aside) and to detect when inputs changed underneath it.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, std::uint64_t value);
  void set(const std::string& key, double value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;

  std::string to_string() const;
  void write(const std::string& path) const;
  static RunManifest load(const std::string& path);

  // True when every configuration entry matches; the comparison is symmetric
  // and covers all keys of both manifests.
  bool same_run(const RunManifest& other) const;

  // Throws when the corpus file on disk no longer matches the recorded hash.
  void verify_corpus(const std::string& corpus_path) const;
};

}  // namespace longdoc
