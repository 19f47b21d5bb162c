#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "longdoc/heads.hpp"
#include "longdoc/retrieval.hpp"

namespace longdoc {

// Binary relevance per query. Queries with empty sets are excluded from
// evaluation (with a warning).
struct RelevanceJudgments {
  std::unordered_map<std::string, std::unordered_set<std::string>> relevant;
};

struct MetricReport {
  TaskKind task = TaskKind::multilabel;
  std::size_t n_evaluated = 0;
  std::size_t n_skipped = 0;

  // Classification.
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
  bool has_auc = false;

  // Retrieval.
  double map = 0.0;
  double mrr = 0.0;
  std::vector<std::pair<std::size_t, double>> recall_at;
  std::vector<std::pair<std::size_t, double>> ndcg_at;

  bool is_retrieval() const { return task == TaskKind::retrieval; }
};

// Pooled-count micro-F1, unweighted macro-F1 (0/0 label F1 counts as 0),
// subset accuracy for multi-label, plain accuracy for single-label, and
// one-vs-rest AUC averaged over labels with both classes present.
MetricReport eval_classification(
    const std::vector<DocPrediction>& preds,
    const std::unordered_map<std::string, std::vector<std::uint8_t>>& gold,
    TaskKind task);

// Mann-Whitney AUC: (#{pos > neg} + 0.5 #{ties}) / (#pos * #neg).
double roc_auc(std::span<const double> scores,
               std::span<const std::uint8_t> labels);

MetricReport eval_retrieval(const std::vector<RankedList>& lists,
                            const RelevanceJudgments& judgments,
                            std::span<const std::size_t> ks);

}  // namespace longdoc
