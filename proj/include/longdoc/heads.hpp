#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "longdoc/corpus.hpp"

namespace longdoc {

// Linear classification head over pooled embeddings.
struct ProbeWeights {
  std::size_t n_labels = 0;
  std::size_t dim = 0;
  std::vector<double> w;  // n_labels x dim, row-major
  std::vector<double> b;  // n_labels
  TaskKind task = TaskKind::multilabel;
};

struct DocPrediction {
  std::string doc_id;
  std::vector<double> probs;   // per-label, in [0,1]; single-label sums to 1
  std::vector<int> predicted;  // label indices, sorted ascending
};

// Per-window scores: sigmoid probabilities for multi-label heads, raw logits
// for single-label heads (softmax happens after aggregation).
std::vector<double> window_predict(std::span<const double> embedding,
                                   const ProbeWeights& probe);

// Mean of window probabilities, then threshold (>= tau keeps the label).
DocPrediction aggregate_multilabel(
    std::string doc_id, const std::vector<std::vector<double>>& window_probs,
    double tau);

// Mean of window logits, then softmax; argmax ties go to the smaller index.
DocPrediction aggregate_singlelabel(
    std::string doc_id, const std::vector<std::vector<double>>& window_logits);

struct TrainExample {
  std::vector<double> embedding;
  std::vector<std::uint8_t> gold;  // multi-hot; single-label is one-hot
};

struct ProbeHyper {
  double lr = 0.5;
  int epochs = 100;
  std::size_t batch = 32;
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

struct ProbeGradient {
  std::vector<double> w;
  std::vector<double> b;
};

// Mean cross-entropy over the batch (softmax for single-label, per-label
// binary for multi-label) plus l2 * ||W||^2.
double probe_loss(const ProbeWeights& probe,
                  std::span<const TrainExample> batch, double l2);

// Analytic gradient of probe_loss with respect to W and b.
ProbeGradient probe_gradient(const ProbeWeights& probe,
                             std::span<const TrainExample> batch, double l2);

struct TrainResult {
  ProbeWeights weights;
  std::vector<double> loss_trace;  // epoch-average training loss
};

// Mini-batch gradient descent from zero init; batching order is a
// deterministic function of hyper.seed.
TrainResult train_probe(const std::vector<TrainExample>& examples,
                        TaskKind task, std::size_t n_labels,
                        const ProbeHyper& hyper);

}  // namespace longdoc
