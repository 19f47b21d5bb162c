#include "longdoc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "longdoc/common.hpp"

namespace longdoc {

namespace {

double f1_from_counts(double tp, double fp, double fn) {
  double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

}  // namespace

double roc_auc(std::span<const double> scores,
               std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw std::runtime_error("roc_auc: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (auto l : labels) n_pos += l ? 1 : 0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::runtime_error("roc_auc undefined for single-class input");

  // Rank-sum (Mann-Whitney) with average ranks over score ties.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    i = j;
  }
  const double u = rank_sum_pos -
                   static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MetricReport eval_classification(
    const std::vector<DocPrediction>& preds,
    const std::unordered_map<std::string, std::vector<std::uint8_t>>& gold,
    TaskKind task) {
  if (task == TaskKind::retrieval)
    throw std::runtime_error("eval_classification needs a classification task");
  if (preds.empty()) throw std::runtime_error("no predictions to evaluate");

  const std::size_t n_labels = preds.front().probs.size();
  MetricReport report;
  report.task = task;
  report.n_evaluated = preds.size();

  std::vector<double> tp(n_labels, 0.0), fp(n_labels, 0.0), fn(n_labels, 0.0);
  std::size_t exact = 0;
  for (const auto& pred : preds) {
    auto it = gold.find(pred.doc_id);
    if (it == gold.end())
      throw std::runtime_error("no gold labels for doc id: " + pred.doc_id);
    const auto& g = it->second;
    if (g.size() != n_labels || pred.probs.size() != n_labels)
      throw std::runtime_error("label vector length mismatch for doc " +
                               pred.doc_id);
    std::vector<std::uint8_t> p(n_labels, 0);
    for (int l : pred.predicted) p[static_cast<std::size_t>(l)] = 1;
    bool all_match = true;
    for (std::size_t l = 0; l < n_labels; ++l) {
      if (p[l] && g[l]) tp[l] += 1.0;
      if (p[l] && !g[l]) fp[l] += 1.0;
      if (!p[l] && g[l]) fn[l] += 1.0;
      if (p[l] != g[l]) all_match = false;
    }
    if (all_match) ++exact;
  }

  double tp_sum = 0.0, fp_sum = 0.0, fn_sum = 0.0, macro = 0.0;
  for (std::size_t l = 0; l < n_labels; ++l) {
    tp_sum += tp[l];
    fp_sum += fp[l];
    fn_sum += fn[l];
    macro += f1_from_counts(tp[l], fp[l], fn[l]);
  }
  report.micro_f1 = f1_from_counts(tp_sum, fp_sum, fn_sum);
  report.macro_f1 = macro / static_cast<double>(n_labels);
  report.accuracy =
      static_cast<double>(exact) / static_cast<double>(preds.size());

  // One-vs-rest AUC per label from the predicted probabilities, averaged
  // over labels where both classes occur.
  double auc_sum = 0.0;
  std::size_t auc_labels = 0;
  for (std::size_t l = 0; l < n_labels; ++l) {
    std::vector<double> scores;
    std::vector<std::uint8_t> binary;
    scores.reserve(preds.size());
    binary.reserve(preds.size());
    bool any_pos = false, any_neg = false;
    for (const auto& pred : preds) {
      const auto& g = gold.at(pred.doc_id);
      scores.push_back(pred.probs[l]);
      binary.push_back(g[l]);
      (g[l] ? any_pos : any_neg) = true;
    }
    if (!any_pos || !any_neg) {
      warn("AUC undefined for label " + std::to_string(l) +
           " (single class); skipped");
      continue;
    }
    auc_sum += roc_auc(scores, binary);
    ++auc_labels;
  }
  if (auc_labels == 0)
    throw std::runtime_error("AUC undefined: every label is single-class");
  report.auc = auc_sum / static_cast<double>(auc_labels);
  report.has_auc = true;
  return report;
}

MetricReport eval_retrieval(const std::vector<RankedList>& lists,
                            const RelevanceJudgments& judgments,
                            std::span<const std::size_t> ks) {
  if (lists.empty()) throw std::runtime_error("no ranked lists to evaluate");

  MetricReport report;
  report.task = TaskKind::retrieval;
  std::vector<double> recall_sum(ks.size(), 0.0), ndcg_sum(ks.size(), 0.0);
  double ap_sum = 0.0, rr_sum = 0.0;

  for (const auto& list : lists) {
    auto it = judgments.relevant.find(list.query_id);
    if (it == judgments.relevant.end())
      throw std::runtime_error("missing relevance judgments for query: " +
                               list.query_id);
    const auto& rel = it->second;
    if (rel.empty()) {
      warn("query " + list.query_id + " has no relevant documents; excluded");
      ++report.n_skipped;
      continue;
    }
    for (const auto& rid : rel)
      if (std::none_of(list.entries.begin(), list.entries.end(),
                       [&](const RankedEntry& e) { return e.id == rid; }))
        throw std::runtime_error("judged-relevant id " + rid +
                                 " absent from ranked list of query " +
                                 list.query_id);

    double ap = 0.0;
    std::size_t hits = 0;
    double rr = 0.0;
    for (std::size_t rank = 1; rank <= list.entries.size(); ++rank) {
      if (!rel.count(list.entries[rank - 1].id)) continue;
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(rank);
      if (hits == 1) rr = 1.0 / static_cast<double>(rank);
    }
    ap /= static_cast<double>(rel.size());
    ap_sum += ap;
    rr_sum += rr;

    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const std::size_t k = ks[ki];
      std::size_t top_hits = 0;
      double dcg = 0.0;
      const std::size_t upto = std::min(k, list.entries.size());
      for (std::size_t rank = 1; rank <= upto; ++rank)
        if (rel.count(list.entries[rank - 1].id)) {
          ++top_hits;
          dcg += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
        }
      recall_sum[ki] +=
          static_cast<double>(top_hits) / static_cast<double>(rel.size());
      double idcg = 0.0;
      const std::size_t ideal = std::min(k, rel.size());
      for (std::size_t rank = 1; rank <= ideal; ++rank)
        idcg += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
      ndcg_sum[ki] += dcg / idcg;
    }
    ++report.n_evaluated;
  }

  if (report.n_evaluated == 0)
    throw std::runtime_error("every query was excluded from evaluation");
  const double inv = 1.0 / static_cast<double>(report.n_evaluated);
  report.map = ap_sum * inv;
  report.mrr = rr_sum * inv;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    report.recall_at.emplace_back(ks[ki], recall_sum[ki] * inv);
    report.ndcg_at.emplace_back(ks[ki], ndcg_sum[ki] * inv);
  }
  return report;
}

}  // namespace longdoc
