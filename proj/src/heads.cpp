#include "longdoc/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace longdoc {

namespace {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::vector<double> logits(const ProbeWeights& probe,
                           std::span<const double> embedding) {
  if (embedding.size() != probe.dim)
    throw std::runtime_error("embedding dim " +
                             std::to_string(embedding.size()) +
                             " does not match probe dim " +
                             std::to_string(probe.dim));
  std::vector<double> out(probe.n_labels);
  for (std::size_t l = 0; l < probe.n_labels; ++l) {
    const double* row = probe.w.data() + l * probe.dim;
    double s = probe.b[l];
    for (std::size_t c = 0; c < probe.dim; ++c) s += row[c] * embedding[c];
    out[l] = s;
  }
  return out;
}

std::vector<double> softmax(std::vector<double> v) {
  double hi = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (auto& x : v) {
    x = std::exp(x - hi);
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return v;
}

// Numerically stable -log p for binary cross-entropy from the raw logit:
// bce(z, 1) = log(1 + e^-z), bce(z, 0) = log(1 + e^z).
inline double bce_from_logit(double z, bool positive) {
  double m = positive ? -z : z;
  return m > 30.0 ? m : std::log1p(std::exp(m));
}

}  // namespace

std::vector<double> window_predict(std::span<const double> embedding,
                                   const ProbeWeights& probe) {
  auto out = logits(probe, embedding);
  if (probe.task == TaskKind::multilabel)
    for (auto& v : out) v = sigmoid(v);
  return out;
}

DocPrediction aggregate_multilabel(
    std::string doc_id, const std::vector<std::vector<double>>& window_probs,
    double tau) {
  if (window_probs.empty())
    throw std::runtime_error("cannot aggregate zero windows");
  const std::size_t n = window_probs.front().size();
  DocPrediction pred;
  pred.doc_id = std::move(doc_id);
  pred.probs.assign(n, 0.0);
  for (const auto& wp : window_probs) {
    if (wp.size() != n)
      throw std::runtime_error("window probability vectors differ in length");
    for (std::size_t l = 0; l < n; ++l) pred.probs[l] += wp[l];
  }
  for (auto& p : pred.probs) p /= static_cast<double>(window_probs.size());
  for (std::size_t l = 0; l < n; ++l)
    if (pred.probs[l] >= tau) pred.predicted.push_back(static_cast<int>(l));
  return pred;
}

DocPrediction aggregate_singlelabel(
    std::string doc_id, const std::vector<std::vector<double>>& window_logits) {
  if (window_logits.empty())
    throw std::runtime_error("cannot aggregate zero windows");
  const std::size_t n = window_logits.front().size();
  std::vector<double> mean(n, 0.0);
  for (const auto& wl : window_logits) {
    if (wl.size() != n)
      throw std::runtime_error("window logit vectors differ in length");
    for (std::size_t l = 0; l < n; ++l) mean[l] += wl[l];
  }
  for (auto& v : mean) v /= static_cast<double>(window_logits.size());

  DocPrediction pred;
  pred.doc_id = std::move(doc_id);
  pred.probs = softmax(std::move(mean));
  std::size_t best = 0;
  for (std::size_t l = 1; l < n; ++l)
    if (pred.probs[l] > pred.probs[best]) best = l;  // ties keep the smaller
  pred.predicted = {static_cast<int>(best)};
  return pred;
}

double probe_loss(const ProbeWeights& probe,
                  std::span<const TrainExample> batch, double l2) {
  if (batch.empty()) throw std::runtime_error("empty batch");
  double loss = 0.0;
  for (const auto& ex : batch) {
    auto z = logits(probe, ex.embedding);
    if (probe.task == TaskKind::singlelabel) {
      double hi = *std::max_element(z.begin(), z.end());
      double lse = 0.0;
      for (double v : z) lse += std::exp(v - hi);
      lse = hi + std::log(lse);
      for (std::size_t l = 0; l < z.size(); ++l)
        if (ex.gold[l]) loss += lse - z[l];
    } else {
      for (std::size_t l = 0; l < z.size(); ++l)
        loss += bce_from_logit(z[l], ex.gold[l] != 0);
    }
  }
  loss /= static_cast<double>(batch.size());
  double reg = 0.0;
  for (double w : probe.w) reg += w * w;
  return loss + l2 * reg;
}

ProbeGradient probe_gradient(const ProbeWeights& probe,
                             std::span<const TrainExample> batch, double l2) {
  if (batch.empty()) throw std::runtime_error("empty batch");
  ProbeGradient grad;
  grad.w.assign(probe.w.size(), 0.0);
  grad.b.assign(probe.b.size(), 0.0);
  for (const auto& ex : batch) {
    auto z = logits(probe, ex.embedding);
    std::vector<double> err(z.size());
    if (probe.task == TaskKind::singlelabel) {
      auto p = softmax(std::move(z));
      for (std::size_t l = 0; l < p.size(); ++l)
        err[l] = p[l] - (ex.gold[l] ? 1.0 : 0.0);
    } else {
      for (std::size_t l = 0; l < z.size(); ++l)
        err[l] = sigmoid(z[l]) - (ex.gold[l] ? 1.0 : 0.0);
    }
    for (std::size_t l = 0; l < err.size(); ++l) {
      double* gw = grad.w.data() + l * probe.dim;
      for (std::size_t c = 0; c < probe.dim; ++c)
        gw[c] += err[l] * ex.embedding[c];
      grad.b[l] += err[l];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad.w) g *= inv;
  for (auto& g : grad.b) g *= inv;
  for (std::size_t i = 0; i < grad.w.size(); ++i)
    grad.w[i] += 2.0 * l2 * probe.w[i];
  return grad;
}

TrainResult train_probe(const std::vector<TrainExample>& examples,
                        TaskKind task, std::size_t n_labels,
                        const ProbeHyper& hyper) {
  if (examples.size() < 2)
    throw std::runtime_error("probe training needs at least 2 examples");
  if (n_labels < 2) throw std::runtime_error("probe needs at least 2 labels");
  std::vector<std::uint8_t> label_seen(n_labels, 0);
  for (const auto& ex : examples) {
    if (ex.gold.size() != n_labels)
      throw std::runtime_error("gold vector length mismatch");
    for (std::size_t l = 0; l < n_labels; ++l)
      if (ex.gold[l]) label_seen[l] = 1;
  }
  if (std::accumulate(label_seen.begin(), label_seen.end(), 0) < 2)
    throw std::runtime_error(
        "probe training needs at least 2 distinct labels present");

  TrainResult result;
  auto& probe = result.weights;
  probe.n_labels = n_labels;
  probe.dim = examples.front().embedding.size();
  probe.task = task;
  probe.w.assign(n_labels * probe.dim, 0.0);
  probe.b.assign(n_labels, 0.0);

  std::mt19937_64 rng(hyper.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch =
      std::min<std::size_t>(std::max<std::size_t>(1, hyper.batch),
                            examples.size());

  std::vector<TrainExample> scratch(batch);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      for (std::size_t i = 0; i < count; ++i)
        scratch[i] = examples[order[start + i]];
      std::span<const TrainExample> view(scratch.data(), count);
      epoch_loss += probe_loss(probe, view, hyper.l2);
      auto grad = probe_gradient(probe, view, hyper.l2);
      for (std::size_t i = 0; i < probe.w.size(); ++i)
        probe.w[i] -= hyper.lr * grad.w[i];
      for (std::size_t i = 0; i < probe.b.size(); ++i)
        probe.b[i] -= hyper.lr * grad.b[i];
      ++n_batches;
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(n_batches));
  }
  return result;
}

}  // namespace longdoc
