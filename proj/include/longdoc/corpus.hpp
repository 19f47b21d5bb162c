#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace longdoc {

enum class TaskKind { multilabel, singlelabel, retrieval };

const char* to_string(TaskKind kind);
TaskKind task_from_string(const std::string& name);

enum class Split { unassigned, train, validation, test };

const char* to_string(Split split);

// One corpus record: raw text plus labels and, for retrieval corpora, the
// gold set of relevant document ids.
struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> labels;
  std::vector<std::string> relevant_ids;
  Split split = Split::unassigned;
};

// Dense label indexing. Ordering is lexicographic over label strings, so the
// vocabulary is a function of the label set alone.
struct LabelVocab {
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;

  static LabelVocab build(const std::vector<Document>& docs);
  int id(const std::string& label) const;
  std::size_t size() const { return labels.size(); }
};

struct SplitSpec {
  double train_frac = 0.70;
  double val_frac = 0.15;
  double test_frac = 0.15;
  std::uint64_t seed = 0;
};

// Reads a line-delimited corpus: one JSON object per line with fields
// `id`, `text`, `labels` and optional `relevant_ids`. Validation errors name
// the offending line.
std::vector<Document> load_corpus(const std::string& path, TaskKind task);

void save_corpus(const std::vector<Document>& docs, const std::string& path);

// Assigns each document a split tag. The assignment is a function of
// (doc id, seed) only: documents are ordered by a salted id hash and cut at
// the largest-remainder counts, so list order never matters and the realized
// sizes match the fractions exactly.
void split_corpus(std::vector<Document>& docs, const SplitSpec& spec);

// Largest-remainder apportionment of n items over the three fractions.
// Remainder ties go to the earlier split (train, validation, test).
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitSpec& spec);

struct SyntheticSpec {
  std::size_t n_docs = 100;
  std::size_t min_len = 50;    // token count bounds, inclusive
  std::size_t max_len = 100;
  std::size_t n_labels = 5;
  TaskKind task = TaskKind::singlelabel;
  std::uint64_t seed = 0;
};

// Deterministic synthetic corpus with planted label signal: a document
// carrying label L contains L's marker token with probability 0.9 (at roughly
// a tenth of its positions), so a linear probe over any reasonable features
// can beat chance. Retrieval corpora instead pair each query with an
// exact-duplicate relevant document.
std::vector<Document> generate_synthetic_corpus(const SyntheticSpec& spec);

// Marker token for a given synthetic label index, e.g. "marker3".
std::string synthetic_marker(std::size_t label_idx);

// Synthetic label string for a given index, e.g. "L3".
std::string synthetic_label(std::size_t label_idx);

}  // namespace longdoc
