#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "longdoc/corpus.hpp"
#include "longdoc/tokenize.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace longdoc;

namespace {

std::string three_line_corpus() {
  return R"({"id": "a", "text": "alpha beta", "labels": ["x"]})"
         "\n"
         R"({"id": "b", "text": "gamma", "labels": ["y"]})"
         "\n"
         R"({"id": "c", "text": "delta", "labels": ["x", "y"]})"
         "\n";
}

std::vector<Document> unassigned_docs(std::size_t n) {
  std::vector<Document> docs(n);
  for (std::size_t i = 0; i < n; ++i) {
    docs[i].id = "doc" + std::to_string(i);
    docs[i].text = "text";
  }
  return docs;
}

}  // namespace

TEST_CASE("load_corpus ingests records in file order") {
  testutil::TempDir tmp("corpus");
  testutil::write_file(tmp.file("c.jsonl"), three_line_corpus());
  auto docs = load_corpus(tmp.file("c.jsonl"), TaskKind::multilabel);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].id == "a");
  CHECK(docs[1].id == "b");
  CHECK(docs[2].id == "c");
  CHECK(docs[2].labels == std::vector<std::string>{"x", "y"});
  CHECK(docs[0].split == Split::unassigned);
}

TEST_CASE("load_corpus errors name the offending line") {
  testutil::TempDir tmp("corpus");

  SUBCASE("missing text field") {
    testutil::write_file(tmp.file("c.jsonl"),
                         R"({"id": "a", "text": "ok", "labels": []})"
                         "\n"
                         R"({"id": "b", "labels": []})"
                         "\n");
    CHECK_THROWS_WITH_AS(load_corpus(tmp.file("c.jsonl"), TaskKind::multilabel),
                         doctest::Contains("line 2"), std::runtime_error);
  }
  SUBCASE("malformed json") {
    testutil::write_file(tmp.file("c.jsonl"), "{not json\n");
    CHECK_THROWS_WITH_AS(load_corpus(tmp.file("c.jsonl"), TaskKind::multilabel),
                         doctest::Contains("line 1"), std::runtime_error);
  }
  SUBCASE("duplicate id") {
    testutil::write_file(tmp.file("c.jsonl"),
                         R"({"id": "a", "text": "x", "labels": []})"
                         "\n"
                         R"({"id": "a", "text": "y", "labels": []})"
                         "\n");
    CHECK_THROWS_WITH_AS(load_corpus(tmp.file("c.jsonl"), TaskKind::multilabel),
                         doctest::Contains("duplicate id"), std::runtime_error);
  }
  SUBCASE("single-label task rejects two labels") {
    testutil::write_file(tmp.file("c.jsonl"),
                         R"({"id": "a", "text": "x", "labels": ["p", "q"]})"
                         "\n");
    CHECK_THROWS_WITH_AS(
        load_corpus(tmp.file("c.jsonl"), TaskKind::singlelabel),
        doctest::Contains("exactly 1 label"), std::runtime_error);
  }
  SUBCASE("relevant_ids may not reference the document itself") {
    testutil::write_file(
        tmp.file("c.jsonl"),
        R"({"id": "a", "text": "x", "labels": [], "relevant_ids": ["a"]})"
        "\n");
    CHECK_THROWS_WITH_AS(load_corpus(tmp.file("c.jsonl"), TaskKind::retrieval),
                         doctest::Contains("own id"), std::runtime_error);
  }
}

TEST_CASE("corpus round-trips through save and load") {
  testutil::TempDir tmp("corpus");
  testutil::write_file(tmp.file("c.jsonl"), three_line_corpus());
  auto docs = load_corpus(tmp.file("c.jsonl"), TaskKind::multilabel);
  save_corpus(docs, tmp.file("copy.jsonl"));
  auto again = load_corpus(tmp.file("copy.jsonl"), TaskKind::multilabel);
  REQUIRE(again.size() == docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(again[i].id == docs[i].id);
    CHECK(again[i].text == docs[i].text);
    CHECK(again[i].labels == docs[i].labels);
  }
}

TEST_CASE("label vocabulary is lexicographic and dense") {
  std::vector<Document> docs(2);
  docs[0].labels = {"zebra", "apple"};
  docs[1].labels = {"mango", "apple"};
  auto vocab = LabelVocab::build(docs);
  REQUIRE(vocab.size() == 3);
  CHECK(vocab.labels == std::vector<std::string>{"apple", "mango", "zebra"});
  CHECK(vocab.id("apple") == 0);
  CHECK(vocab.id("zebra") == 2);
  CHECK_THROWS(vocab.id("missing"));
}

TEST_CASE("split sizes follow the fractions exactly") {
  auto docs = unassigned_docs(100);
  split_corpus(docs, {0.70, 0.15, 0.15, 7});
  std::map<Split, int> counts;
  for (const auto& d : docs) counts[d.split]++;
  CHECK(counts[Split::train] == 70);
  CHECK(counts[Split::validation] == 15);
  CHECK(counts[Split::test] == 15);
}

TEST_CASE("largest-remainder rounding; ties favor the earlier split") {
  auto counts = split_counts(10, {0.75, 0.10, 0.15, 3});
  CHECK(counts[0] == 8);  // 7.5 / 1.0 / 1.5 -> 8 / 1 / 1
  CHECK(counts[1] == 1);
  CHECK(counts[2] == 1);
}

TEST_CASE("split assignment is deterministic and order-independent") {
  auto docs = unassigned_docs(10);
  split_corpus(docs, {0.8, 0.1, 0.1, 1});

  auto again = unassigned_docs(10);
  split_corpus(again, {0.8, 0.1, 0.1, 1});
  for (std::size_t i = 0; i < docs.size(); ++i)
    CHECK(docs[i].split == again[i].split);

  auto shuffled = unassigned_docs(10);
  std::mt19937_64 rng(99);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  split_corpus(shuffled, {0.8, 0.1, 0.1, 1});
  std::map<std::string, Split> by_id;
  for (const auto& d : shuffled) by_id[d.id] = d.split;
  for (const auto& d : docs) CHECK(by_id[d.id] == d.split);
}

TEST_CASE("splits are disjoint and exhaustive") {
  auto docs = unassigned_docs(37);
  split_corpus(docs, {0.70, 0.15, 0.15, 11});
  for (const auto& d : docs) CHECK(d.split != Split::unassigned);
}

TEST_CASE("split rejects bad input") {
  auto docs = unassigned_docs(10);
  CHECK_THROWS_WITH_AS(split_corpus(docs, {0.5, 0.2, 0.2, 0}),
                       doctest::Contains("sum to 1"), std::runtime_error);
  auto two = unassigned_docs(2);
  CHECK_THROWS(split_corpus(two, {0.70, 0.15, 0.15, 0}));
  split_corpus(docs, {0.70, 0.15, 0.15, 0});
  CHECK_THROWS_WITH_AS(split_corpus(docs, {0.70, 0.15, 0.15, 0}),
                       doctest::Contains("already"), std::runtime_error);
}

TEST_CASE("synthetic corpus is byte-deterministic") {
  SyntheticSpec spec;
  spec.n_docs = 5;
  spec.seed = 42;
  testutil::TempDir tmp("synth");
  save_corpus(generate_synthetic_corpus(spec), tmp.file("a.jsonl"));
  save_corpus(generate_synthetic_corpus(spec), tmp.file("b.jsonl"));
  CHECK(testutil::read_file(tmp.file("a.jsonl")) ==
        testutil::read_file(tmp.file("b.jsonl")));
  CHECK(!testutil::read_file(tmp.file("a.jsonl")).empty());
}

TEST_CASE("synthetic document lengths stay within the requested range") {
  SyntheticSpec spec;
  spec.n_docs = 100;
  spec.min_len = 800;
  spec.max_len = 1200;
  spec.seed = 3;
  auto docs = generate_synthetic_corpus(spec);
  auto vocab = build_vocab(docs, 4096);
  for (const auto& doc : docs) {
    auto seq = tokenize(doc.text, vocab, doc.id);
    CHECK(seq.length() >= 800);
    CHECK(seq.length() <= 1200);
  }
}

TEST_CASE("planted markers beat chance while majority stays at chance") {
  SyntheticSpec spec;
  spec.n_docs = 400;
  spec.n_labels = 5;
  spec.task = TaskKind::singlelabel;
  spec.seed = 17;
  auto docs = generate_synthetic_corpus(spec);

  std::map<std::string, int> label_counts;
  for (const auto& doc : docs) label_counts[doc.labels[0]]++;
  int majority = 0;
  for (const auto& [_, c] : label_counts) majority = std::max(majority, c);
  double majority_acc =
      static_cast<double>(majority) / static_cast<double>(docs.size());

  std::size_t marker_correct = 0;
  for (const auto& doc : docs)
    if (synthetic_label(oracle::marker_rule(doc.text, 5)) == doc.labels[0])
      ++marker_correct;
  double marker_acc =
      static_cast<double>(marker_correct) / static_cast<double>(docs.size());

  CHECK(marker_acc > 0.8);
  CHECK(majority_acc < 0.35);  // ~1/5 plus sampling noise
}

TEST_CASE("retrieval synthetic corpus pairs queries with duplicates") {
  SyntheticSpec spec;
  spec.n_docs = 10;
  spec.task = TaskKind::retrieval;
  spec.seed = 5;
  auto docs = generate_synthetic_corpus(spec);
  REQUIRE(docs.size() == 10);
  std::map<std::string, const Document*> by_id;
  for (const auto& d : docs) by_id[d.id] = &d;
  std::size_t queries = 0;
  for (const auto& d : docs) {
    if (d.relevant_ids.empty()) continue;
    ++queries;
    REQUIRE(d.relevant_ids.size() == 1);
    REQUIRE(by_id.count(d.relevant_ids[0]) == 1);
    CHECK(by_id[d.relevant_ids[0]]->text == d.text);
  }
  CHECK(queries == 5);
}
