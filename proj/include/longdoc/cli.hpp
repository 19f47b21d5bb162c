#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "longdoc/corpus.hpp"
#include "longdoc/report.hpp"

namespace longdoc {

// Everything a run needs, validated before any stage starts.
struct RunConfig {
  std::string command;

  // Corpus: either a file on disk or a generated synthetic one.
  std::string corpus_path;
  TaskKind task = TaskKind::multilabel;
  std::size_t synthetic_docs = 0;  // 0 = load --corpus from disk
  std::size_t synthetic_labels = 5;
  std::size_t synthetic_min_len = 50;
  std::size_t synthetic_max_len = 100;

  std::size_t vocab_size = 4096;

  std::size_t window_len = 512;  // 0 = whole document
  double overlap = 0.2;

  std::vector<std::string> encoders;  // classify/retrieve use the first
  std::string encoder_config_path;    // key-value file; overrides the flags
  int model_dim = 64;
  int n_layers = 2;
  int n_heads = 4;
  int state_dim = 16;
  int chunk_len = 64;
  std::size_t max_context = 512;

  double threshold = 0.5;
  double lr = 0.5;
  int epochs = 100;
  std::size_t batch = 32;
  double l2 = 0.0;

  std::vector<std::size_t> ks = {10};

  std::vector<std::size_t> lengths = {512, 1024, 2048, 4096};
  int reps = 3;
  int warmup = 1;
  std::size_t capacity_budget_mb = 0;  // 0 = skip the capacity probe

  std::vector<std::string> run_dirs;      // report inputs
  std::string verify_corpus_path;         // report: check manifests against it

  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out_dir;

  void validate() const;
};

void cmd_classify(const RunConfig& cfg);
void cmd_retrieve(const RunConfig& cfg);
void cmd_bench(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

// Rebuilds the RunConfig recorded in a classify/retrieve manifest, pointed
// at a fresh output directory.
RunConfig config_from_manifest(const RunManifest& manifest,
                               const std::string& out_dir);

// Parses argv and dispatches; returns the process exit code. Failures print
// the failing stage to stderr and leave no partial outputs behind.
int run_cli(int argc, const char* const* argv);

}  // namespace longdoc
