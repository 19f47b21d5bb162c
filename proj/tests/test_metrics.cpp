#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "longdoc/metrics.hpp"
#include "oracles.hpp"

using namespace longdoc;

namespace {

DocPrediction prediction(std::string id, std::vector<double> probs,
                         std::vector<int> predicted) {
  DocPrediction p;
  p.doc_id = std::move(id);
  p.probs = std::move(probs);
  p.predicted = std::move(predicted);
  return p;
}

RankedList list_of(std::string query,
                   const std::vector<std::string>& candidates) {
  RankedList list;
  list.query_id = std::move(query);
  double score = 1.0;
  for (const auto& id : candidates) {
    list.entries.push_back({id, score});
    score -= 0.01;
  }
  return list;
}

// Random multi-label instance for the oracle equivalence checks.
struct RandomInstance {
  std::vector<DocPrediction> preds;
  std::unordered_map<std::string, std::vector<std::uint8_t>> gold;
  std::vector<std::set<int>> pred_sets, gold_sets;
  int n_labels;
};

RandomInstance random_instance(std::mt19937_64& rng, bool single_label) {
  std::uniform_int_distribution<int> label_dist(2, 6);
  std::uniform_int_distribution<int> doc_dist(2, 30);
  RandomInstance inst;
  inst.n_labels = label_dist(rng);
  const int n_docs = doc_dist(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n_docs; ++i) {
    std::string id = "d" + std::to_string(i);
    std::vector<double> probs(inst.n_labels);
    for (auto& p : probs) p = unit(rng);
    std::vector<std::uint8_t> gold(inst.n_labels, 0);
    std::vector<int> predicted;
    std::set<int> pred_set, gold_set;
    if (single_label) {
      int g = static_cast<int>(rng() % inst.n_labels);
      int p = static_cast<int>(rng() % inst.n_labels);
      gold[g] = 1;
      gold_set.insert(g);
      predicted.push_back(p);
      pred_set.insert(p);
    } else {
      for (int l = 0; l < inst.n_labels; ++l) {
        if (unit(rng) < 0.4) {
          gold[l] = 1;
          gold_set.insert(l);
        }
        if (unit(rng) < 0.4) {
          predicted.push_back(l);
          pred_set.insert(l);
        }
      }
    }
    inst.preds.push_back(prediction(id, probs, predicted));
    inst.gold.emplace(id, gold);
    inst.pred_sets.push_back(pred_set);
    inst.gold_sets.push_back(gold_set);
  }
  return inst;
}

}  // namespace

TEST_CASE("perfect predictions score 1 everywhere") {
  std::vector<DocPrediction> preds = {
      prediction("a", {0.9, 0.2, 0.8}, {0, 2}),
      prediction("b", {0.1, 0.9, 0.2}, {1}),
  };
  std::unordered_map<std::string, std::vector<std::uint8_t>> gold = {
      {"a", {1, 0, 1}},
      {"b", {0, 1, 0}},
  };
  auto report = eval_classification(preds, gold, TaskKind::multilabel);
  CHECK(report.micro_f1 == doctest::Approx(1.0));
  CHECK(report.macro_f1 == doctest::Approx(1.0));
  CHECK(report.accuracy == doctest::Approx(1.0));
  CHECK(report.auc == doctest::Approx(1.0));
}

TEST_CASE("the worked multi-label example: micro 2/3, macro 2/3, subset 0") {
  std::vector<DocPrediction> preds = {
      prediction("a", {0.9, 0.1, 0.2}, {0}),
      prediction("b", {0.1, 0.9, 0.8}, {1, 2}),
  };
  std::unordered_map<std::string, std::vector<std::uint8_t>> gold = {
      {"a", {1, 0, 1}},
      {"b", {0, 1, 0}},
  };
  // TP=2, FP=1, FN=1; per-label F1 = 1, 1, 0.
  auto report = eval_classification(preds, gold, TaskKind::multilabel);
  CHECK(report.micro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.accuracy == doctest::Approx(0.0));
}

TEST_CASE("a label never predicted nor gold contributes zero to macro-F1") {
  std::vector<DocPrediction> preds = {prediction("a", {0.9, 0.1}, {0}),
                                      prediction("b", {0.2, 0.1}, {})};
  std::unordered_map<std::string, std::vector<std::uint8_t>> gold = {
      {"a", {1, 0}}, {"b", {0, 0}}};
  auto report = eval_classification(preds, gold, TaskKind::multilabel);
  CHECK(report.macro_f1 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("evaluation fails when AUC is undefined for every label") {
  std::vector<DocPrediction> preds = {prediction("a", {0.9, 0.1}, {0})};
  std::unordered_map<std::string, std::vector<std::uint8_t>> gold = {
      {"a", {1, 0}}};
  CHECK_THROWS_WITH_AS(eval_classification(preds, gold, TaskKind::multilabel),
                       doctest::Contains("AUC undefined"), std::runtime_error);
}

TEST_CASE("roc_auc on the stated examples") {
  CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.1, 0.2},
                std::vector<std::uint8_t>{1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5},
                std::vector<std::uint8_t>{1, 0, 1, 0}) == doctest::Approx(0.5));
  // Pairwise: (1 + 1 + 0.5 + 1) / 4.
  CHECK(roc_auc(std::vector<double>{0.8, 0.5, 0.5, 0.2},
                std::vector<std::uint8_t>{1, 0, 1, 0}) ==
        doctest::Approx(0.875));
  CHECK_THROWS(roc_auc(std::vector<double>{0.5, 0.6},
                       std::vector<std::uint8_t>{1, 1}));
}

TEST_CASE("roc_auc matches pairwise counting on random instances") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + rng() % 40;
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid scores so ties actually happen.
      scores[i] = std::floor(unit(rng) * 8.0) / 8.0;
      labels[i] = rng() % 2;
      (labels[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    CHECK(std::abs(roc_auc(scores, labels) -
                   oracle::pairwise_auc(scores, labels)) < 1e-9);
  }
}

TEST_CASE("classification metrics match the set-based oracle") {
  std::mt19937_64 rng(32);
  int used = 0;
  for (int trial = 0; used < 200; ++trial) {
    auto inst = random_instance(rng, trial % 2 == 0);
    // AUC needs at least one label with both classes present.
    bool auc_defined = false;
    for (int l = 0; l < inst.n_labels && !auc_defined; ++l) {
      bool pos = false, neg = false;
      for (const auto& g : inst.gold_sets) (g.count(l) ? pos : neg) = true;
      auc_defined = pos && neg;
    }
    if (!auc_defined) continue;
    ++used;
    auto report = eval_classification(
        inst.preds, inst.gold,
        trial % 2 == 0 ? TaskKind::singlelabel : TaskKind::multilabel);
    CHECK(std::abs(report.micro_f1 -
                   oracle::set_micro_f1(inst.pred_sets, inst.gold_sets)) <
          1e-9);
    CHECK(std::abs(report.macro_f1 -
                   oracle::set_macro_f1(inst.pred_sets, inst.gold_sets,
                                        inst.n_labels)) < 1e-9);
    CHECK(std::abs(report.accuracy - oracle::set_subset_accuracy(
                                         inst.pred_sets, inst.gold_sets)) <
          1e-9);
  }
}

TEST_CASE("micro-F1 equals accuracy on single-label tasks") {
  std::mt19937_64 rng(33);
  int used = 0;
  for (int trial = 0; used < 50; ++trial) {
    auto inst = random_instance(rng, true);
    std::set<int> distinct;
    for (const auto& g : inst.gold_sets) distinct.insert(*g.begin());
    if (distinct.size() < 2) continue;  // keep AUC defined
    ++used;
    auto report =
        eval_classification(inst.preds, inst.gold, TaskKind::singlelabel);
    CHECK(report.micro_f1 == doctest::Approx(report.accuracy).epsilon(1e-12));
    // Plain accuracy: fraction of documents whose single label matches.
    std::size_t correct = 0;
    for (std::size_t i = 0; i < inst.pred_sets.size(); ++i)
      if (inst.pred_sets[i] == inst.gold_sets[i]) ++correct;
    CHECK(report.accuracy ==
          doctest::Approx(static_cast<double>(correct) /
                          static_cast<double>(inst.preds.size())));
  }
}

TEST_CASE("a single ideal query scores 1 on every retrieval metric") {
  RelevanceJudgments judgments;
  judgments.relevant["q"] = {"top"};
  auto lists = std::vector<RankedList>{list_of("q", {"top", "x", "y", "z"})};
  std::vector<std::size_t> ks = {10};
  auto report = eval_retrieval(lists, judgments, ks);
  CHECK(report.map == doctest::Approx(1.0));
  CHECK(report.mrr == doctest::Approx(1.0));
  CHECK(report.recall_at[0].second == doctest::Approx(1.0));
  CHECK(report.ndcg_at[0].second == doctest::Approx(1.0));
}

TEST_CASE("the worked retrieval example at k=3") {
  RelevanceJudgments judgments;
  judgments.relevant["q"] = {"r1", "r2"};
  auto lists = std::vector<RankedList>{list_of("q", {"x", "r1", "y", "r2"})};
  std::vector<std::size_t> ks = {3};
  auto report = eval_retrieval(lists, judgments, ks);
  CHECK(report.mrr == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.map == doctest::Approx(0.5).epsilon(1e-12));  // (1/2 + 2/4) / 2
  CHECK(report.recall_at[0].second == doctest::Approx(0.5).epsilon(1e-12));
  const double expected_ndcg =
      (1.0 / std::log2(3.0)) / (1.0 + 1.0 / std::log2(3.0));
  CHECK(report.ndcg_at[0].second ==
        doctest::Approx(expected_ndcg).epsilon(1e-9));
  CHECK(expected_ndcg == doctest::Approx(0.3869).epsilon(1e-3));
}

TEST_CASE("retrieval metrics match the rank-walk oracle on random instances") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t pool = 2 + rng() % 30;
    std::vector<std::string> candidates(pool);
    for (std::size_t i = 0; i < pool; ++i)
      candidates[i] = "c" + std::to_string(i);
    std::shuffle(candidates.begin(), candidates.end(), rng);

    RelevanceJudgments judgments;
    std::vector<bool> rel_at_rank(pool, false);
    std::size_t n_relevant = 1 + rng() % pool;
    std::vector<std::size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < n_relevant; ++i) {
      judgments.relevant["q"].insert(candidates[idx[i]]);
      rel_at_rank[idx[i]] = true;
    }
    const std::size_t k = 1 + rng() % (pool + 2);
    std::vector<std::size_t> ks = {k};
    auto report =
        eval_retrieval({list_of("q", candidates)}, judgments, ks);
    CHECK(std::abs(report.map - oracle::average_precision(rel_at_rank,
                                                          n_relevant)) < 1e-9);
    CHECK(std::abs(report.mrr - oracle::reciprocal_rank(rel_at_rank)) < 1e-9);
    CHECK(std::abs(report.recall_at[0].second -
                   oracle::recall_at_k(rel_at_rank, n_relevant, k)) < 1e-9);
    CHECK(std::abs(report.ndcg_at[0].second -
                   oracle::ndcg_at_k(rel_at_rank, n_relevant, k)) < 1e-9);
  }
}

TEST_CASE("nDCG matches exhaustive enumeration on all 5-document pools") {
  // Every permutation of 5 candidates, every nonempty relevant subset,
  // every cutoff: the implementation must equal the brute-force oracle,
  // and nDCG@k must hit 1 exactly when the top-min(k, |rel|) are relevant.
  std::vector<std::string> ids = {"a", "b", "c", "d", "e"};
  std::sort(ids.begin(), ids.end());
  do {
    for (unsigned subset = 1; subset < 32; ++subset) {
      RelevanceJudgments judgments;
      std::vector<bool> rel_at_rank(5);
      std::size_t n_relevant = 0;
      for (std::size_t i = 0; i < 5; ++i) {
        // Relevance keyed by candidate name so it is permutation-invariant.
        bool relevant = (subset >> (ids[i][0] - 'a')) & 1;
        rel_at_rank[i] = relevant;
        if (relevant) {
          judgments.relevant["q"].insert(ids[i]);
          ++n_relevant;
        }
      }
      for (std::size_t k : {1u, 3u, 5u, 10u}) {
        std::vector<std::size_t> ks = {k};
        auto report = eval_retrieval({list_of("q", ids)}, judgments, ks);
        const double expected =
            oracle::ndcg_at_k(rel_at_rank, n_relevant, k);
        REQUIRE(std::abs(report.ndcg_at[0].second - expected) < 1e-9);

        bool ideal_prefix = true;
        for (std::size_t i = 0; i < std::min(k, n_relevant); ++i)
          ideal_prefix = ideal_prefix && rel_at_rank[i];
        REQUIRE((report.ndcg_at[0].second == doctest::Approx(1.0)) ==
                ideal_prefix);
      }
    }
  } while (std::next_permutation(ids.begin(), ids.end()));
}

TEST_CASE("pushing all relevant docs to the bottom lowers nDCG") {
  RelevanceJudgments judgments;
  judgments.relevant["q"] = {"r1", "r2"};
  std::vector<std::size_t> ks = {3};
  auto good = eval_retrieval({list_of("q", {"r1", "r2", "x", "y", "z"})},
                             judgments, ks);
  auto bad = eval_retrieval({list_of("q", {"x", "y", "z", "r1", "r2"})},
                            judgments, ks);
  CHECK(good.ndcg_at[0].second > bad.ndcg_at[0].second);
}

TEST_CASE("recall is non-decreasing in k") {
  RelevanceJudgments judgments;
  judgments.relevant["q"] = {"r1", "r2", "r3"};
  std::vector<std::size_t> ks = {1, 2, 5, 8};
  auto report = eval_retrieval(
      {list_of("q", {"x", "r1", "y", "r2", "z", "r3", "w", "v"})}, judgments,
      ks);
  for (std::size_t i = 1; i < report.recall_at.size(); ++i)
    CHECK(report.recall_at[i].second >= report.recall_at[i - 1].second);
}

TEST_CASE("metrics are invariant to query order and candidate renaming") {
  RelevanceJudgments judgments;
  judgments.relevant["q1"] = {"a"};
  judgments.relevant["q2"] = {"b", "c"};
  std::vector<std::size_t> ks = {2};
  std::vector<RankedList> lists = {list_of("q1", {"x", "a", "y"}),
                                   list_of("q2", {"b", "x", "c"})};
  auto forward = eval_retrieval(lists, judgments, ks);
  std::reverse(lists.begin(), lists.end());
  auto backward = eval_retrieval(lists, judgments, ks);
  CHECK(forward.map == doctest::Approx(backward.map).epsilon(1e-15));
  CHECK(forward.mrr == doctest::Approx(backward.mrr).epsilon(1e-15));

  RelevanceJudgments renamed;
  renamed.relevant["q1"] = {"zz_a"};
  renamed.relevant["q2"] = {"zz_b", "zz_c"};
  std::vector<RankedList> renamed_lists = {
      list_of("q1", {"zz_x", "zz_a", "zz_y"}),
      list_of("q2", {"zz_b", "zz_x", "zz_c"})};
  auto after = eval_retrieval(renamed_lists, renamed, ks);
  CHECK(after.map == doctest::Approx(forward.map).epsilon(1e-15));
  CHECK(after.ndcg_at[0].second ==
        doctest::Approx(forward.ndcg_at[0].second).epsilon(1e-15));
}

TEST_CASE("queries without judgments are excluded; losing all is an error") {
  RelevanceJudgments judgments;
  judgments.relevant["q1"] = {"a"};
  judgments.relevant["q2"] = {};
  std::vector<std::size_t> ks = {2};
  auto report = eval_retrieval(
      {list_of("q1", {"a", "b"}), list_of("q2", {"a", "b"})}, judgments, ks);
  CHECK(report.n_evaluated == 1);
  CHECK(report.n_skipped == 1);

  RelevanceJudgments empty_only;
  empty_only.relevant["q2"] = {};
  CHECK_THROWS(eval_retrieval({list_of("q2", {"a", "b"})}, empty_only, ks));
  CHECK_THROWS_WITH_AS(
      eval_retrieval({list_of("missing", {"a"})}, judgments, ks),
      doctest::Contains("missing"), std::runtime_error);
}
