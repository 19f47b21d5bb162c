#include "longdoc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "longdoc/common.hpp"

namespace longdoc {

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::multilabel: return "multilabel";
    case TaskKind::singlelabel: return "singlelabel";
    case TaskKind::retrieval: return "retrieval";
  }
  return "?";
}

TaskKind task_from_string(const std::string& name) {
  if (name == "multilabel") return TaskKind::multilabel;
  if (name == "singlelabel") return TaskKind::singlelabel;
  if (name == "retrieval") return TaskKind::retrieval;
  throw std::runtime_error("unknown task kind: " + name);
}

const char* to_string(Split split) {
  switch (split) {
    case Split::unassigned: return "unassigned";
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

LabelVocab LabelVocab::build(const std::vector<Document>& docs) {
  LabelVocab vocab;
  for (const auto& doc : docs)
    for (const auto& label : doc.labels) {
      if (vocab.index.emplace(label, 0).second) vocab.labels.push_back(label);
    }
  std::sort(vocab.labels.begin(), vocab.labels.end());
  for (std::size_t i = 0; i < vocab.labels.size(); ++i)
    vocab.index[vocab.labels[i]] = static_cast<int>(i);
  return vocab;
}

int LabelVocab::id(const std::string& label) const {
  auto it = index.find(label);
  if (it == index.end())
    throw std::runtime_error("label not in vocabulary: " + label);
  return it->second;
}

namespace {

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("corpus line " + std::to_string(line_no) + ": " +
                           what);
}

std::vector<std::string> string_array(const nlohmann::json& value,
                                      const char* field, std::size_t line_no) {
  if (!value.is_array()) line_error(line_no, std::string(field) + " must be an array of strings");
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_string()) line_error(line_no, std::string(field) + " must contain only strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<Document> load_corpus(const std::string& path, TaskKind task) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      line_error(line_no, std::string("malformed record: ") + e.what());
    }
    if (!record.is_object()) line_error(line_no, "record is not an object");
    if (!record.contains("id") || !record["id"].is_string())
      line_error(line_no, "missing string field \"id\"");
    if (!record.contains("text") || !record["text"].is_string())
      line_error(line_no, "missing string field \"text\"");
    if (!record.contains("labels"))
      line_error(line_no, "missing field \"labels\"");

    Document doc;
    doc.id = record["id"].get<std::string>();
    doc.text = record["text"].get<std::string>();
    doc.labels = string_array(record["labels"], "labels", line_no);
    if (record.contains("relevant_ids"))
      doc.relevant_ids =
          string_array(record["relevant_ids"], "relevant_ids", line_no);

    if (doc.id.empty()) line_error(line_no, "empty id");
    if (doc.text.empty()) line_error(line_no, "empty text");
    if (!seen_ids.emplace(doc.id, line_no).second)
      line_error(line_no, "duplicate id \"" + doc.id + "\" (first seen on line " +
                              std::to_string(seen_ids[doc.id]) + ")");
    if (task == TaskKind::singlelabel && doc.labels.size() != 1)
      line_error(line_no, "single-label record must have exactly 1 label, got " +
                              std::to_string(doc.labels.size()));
    for (const auto& rid : doc.relevant_ids)
      if (rid == doc.id)
        line_error(line_no, "relevant_ids contains the document's own id");

    docs.push_back(std::move(doc));
  }
  return docs;
}

void save_corpus(const std::vector<Document>& docs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& doc : docs) {
    nlohmann::ordered_json record;
    record["id"] = doc.id;
    record["text"] = doc.text;
    record["labels"] = doc.labels;
    if (!doc.relevant_ids.empty()) record["relevant_ids"] = doc.relevant_ids;
    out << record.dump() << "\n";
  }
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitSpec& spec) {
  const double fracs[3] = {spec.train_frac, spec.val_frac, spec.test_frac};
  double sum = fracs[0] + fracs[1] + fracs[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::runtime_error("split fractions must sum to 1, got " +
                             std::to_string(sum));
  for (double f : fracs)
    if (f < 0.0 || f > 1.0)
      throw std::runtime_error("split fraction out of [0,1]");

  std::array<std::size_t, 3> counts{};
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = static_cast<double>(n) * fracs[i];
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  // Hand out the leftover seats by largest remainder, earlier split on ties.
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) counts[order[k % 3]]++;
  return counts;
}

void split_corpus(std::vector<Document>& docs, const SplitSpec& spec) {
  if (docs.size() < 3)
    throw std::runtime_error("need at least 3 documents to split, got " +
                             std::to_string(docs.size()));
  for (const auto& doc : docs)
    if (doc.split != Split::unassigned)
      throw std::runtime_error("document already split-assigned: " + doc.id);

  auto counts = split_counts(docs.size(), spec);

  struct Keyed {
    std::uint64_t hash;
    std::size_t pos;
  };
  std::vector<Keyed> order(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i)
    order[i] = {hash_combine(fnv1a64(docs[i].id), spec.seed), i};
  std::sort(order.begin(), order.end(), [&](const Keyed& a, const Keyed& b) {
    if (a.hash != b.hash) return a.hash < b.hash;
    return docs[a.pos].id < docs[b.pos].id;
  });

  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    Split s = rank < counts[0]                ? Split::train
              : rank < counts[0] + counts[1] ? Split::validation
                                             : Split::test;
    docs[order[rank].pos].split = s;
  }
}

std::string synthetic_marker(std::size_t label_idx) {
  return "marker" + std::to_string(label_idx);
}

std::string synthetic_label(std::size_t label_idx) {
  return "L" + std::to_string(label_idx);
}

namespace {

std::string filler_word(std::size_t idx) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "w%03zu", idx);
  return buf;
}

std::string doc_name(const char* prefix, std::size_t idx) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, idx);
  return buf;
}

std::string random_text(std::mt19937_64& rng, std::size_t min_len,
                        std::size_t max_len) {
  constexpr std::size_t kFillerVocab = 50;
  std::uniform_int_distribution<std::size_t> len_dist(min_len, max_len);
  std::uniform_int_distribution<std::size_t> word_dist(0, kFillerVocab - 1);
  std::size_t len = len_dist(rng);
  std::string text;
  for (std::size_t t = 0; t < len; ++t) {
    if (t) text += ' ';
    text += filler_word(word_dist(rng));
  }
  return text;
}

}  // namespace

std::vector<Document> generate_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.n_docs < 1) throw std::runtime_error("n_docs must be >= 1");
  if (spec.min_len < 1 || spec.max_len < spec.min_len)
    throw std::runtime_error("invalid synthetic length range");

  std::mt19937_64 rng(spec.seed);
  std::vector<Document> docs;
  docs.reserve(spec.n_docs);

  if (spec.task == TaskKind::retrieval) {
    // Query/duplicate pairs plus distractors: the gold relevant document for
    // each query is an exact copy of the query's text.
    std::size_t pairs = spec.n_docs / 2;
    for (std::size_t i = 0; i < pairs; ++i) {
      std::string text = random_text(rng, spec.min_len, spec.max_len);
      Document query;
      query.id = doc_name("q", i);
      query.text = text;
      query.relevant_ids = {doc_name("c", i)};
      Document candidate;
      candidate.id = doc_name("c", i);
      candidate.text = std::move(text);
      docs.push_back(std::move(query));
      docs.push_back(std::move(candidate));
    }
    for (std::size_t i = 2 * pairs; i < spec.n_docs; ++i) {
      Document extra;
      extra.id = doc_name("d", i);
      extra.text = random_text(rng, spec.min_len, spec.max_len);
      docs.push_back(std::move(extra));
    }
    return docs;
  }

  if (spec.n_labels < 2)
    throw std::runtime_error("classification corpus needs >= 2 labels");
  std::uniform_int_distribution<std::size_t> label_dist(0, spec.n_labels - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < spec.n_docs; ++i) {
    Document doc;
    doc.id = doc_name("doc", i);
    std::uniform_int_distribution<std::size_t> len_dist(spec.min_len,
                                                        spec.max_len);
    std::size_t len = len_dist(rng);

    std::vector<std::size_t> label_idxs = {label_dist(rng)};
    if (spec.task == TaskKind::multilabel) {
      for (std::size_t l = 0; l < spec.n_labels; ++l)
        if (l != label_idxs[0] && unit(rng) < 0.15) label_idxs.push_back(l);
      std::sort(label_idxs.begin(), label_idxs.end());
    }

    // Token stream: filler words, some positions replaced by label markers.
    std::vector<std::string> tokens(len);
    std::uniform_int_distribution<std::size_t> word_dist(0, 49);
    for (auto& tok : tokens) tok = filler_word(word_dist(rng));
    for (std::size_t label_idx : label_idxs) {
      bool planted = unit(rng) < 0.9;
      std::size_t n_markers = planted ? std::max<std::size_t>(1, len / 10) : 0;
      std::uniform_int_distribution<std::size_t> pos_dist(0, len - 1);
      for (std::size_t m = 0; m < n_markers; ++m)
        tokens[pos_dist(rng)] = synthetic_marker(label_idx);
    }

    std::string text;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (t) text += ' ';
      text += tokens[t];
    }
    doc.text = std::move(text);
    for (std::size_t label_idx : label_idxs)
      doc.labels.push_back(synthetic_label(label_idx));
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace longdoc
