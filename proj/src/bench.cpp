#include "longdoc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "longdoc/common.hpp"
#include "longdoc/tokenize.hpp"

namespace longdoc {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<int> random_token_ids(std::size_t t_len, std::size_t vocab_size,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(
      Vocab::kReserved, static_cast<int>(vocab_size) - 1);
  std::vector<int> ids(t_len);
  for (auto& id : ids) id = dist(rng);
  return ids;
}

}  // namespace

double timer_resolution_seconds() {
  static const double resolution = [] {
    double best = 1.0;
    for (int trial = 0; trial < 16; ++trial) {
      auto a = Clock::now();
      auto b = a;
      while (b == a) b = Clock::now();
      best = std::min(best, std::chrono::duration<double>(b - a).count());
    }
    return best;
  }();
  return resolution;
}

ThroughputReport measure_throughput(const EncoderConfig& cfg,
                                    const EncoderWeights& weights,
                                    std::size_t t_len, int reps, int warmup,
                                    double overlap) {
  cfg.validate();
  if (t_len < 1) throw std::runtime_error("throughput needs t_len >= 1");
  if (reps < 3) throw std::runtime_error("throughput needs reps >= 3");
  if (warmup < 1) throw std::runtime_error("throughput needs warmup >= 1");

  TokenSequence tokens;
  tokens.doc_id = "bench";
  tokens.ids = random_token_ids(t_len, cfg.vocab_size,
                                derive_seed(cfg.seed, "bench-tokens"));

  // Attention inputs beyond the cap are split into overlapping windows of
  // exactly the cap; everything else is one whole-document window.
  WindowingConfig windowing;
  const bool windowed = cfg.kind == EncoderKind::attention &&
                        cfg.max_context > 0 && t_len > cfg.max_context;
  windowing.window_len = windowed ? cfg.max_context : 0;
  windowing.overlap = overlap;
  WindowSet windows = make_windows(tokens, windowing);

  ThroughputReport report;
  report.kind = cfg.kind;
  report.seq_len = t_len;
  report.reps = reps;
  report.warmup = warmup;
  report.window_count = windows.count();
  for (std::size_t w = 0; w < windows.count(); ++w)
    report.tokens_per_rep += windows.spans[w].end - windows.spans[w].start;

  auto run_once = [&] {
    for (std::size_t w = 0; w < windows.count(); ++w)
      encode(windows.padded_ids[w], windows.masks[w], cfg, weights);
  };
  for (int i = 0; i < warmup; ++i) run_once();
  report.rep_seconds.reserve(reps);
  for (int i = 0; i < reps; ++i) {
    auto start = Clock::now();
    run_once();
    report.rep_seconds.push_back(
        std::chrono::duration<double>(Clock::now() - start).count());
  }
  report.median_seconds = median(report.rep_seconds);
  if (report.median_seconds < 100.0 * timer_resolution_seconds())
    throw std::runtime_error(
        "measured time " + std::to_string(report.median_seconds) +
        "s is within 100x of timer resolution; increase t_len or model size");
  report.tokens_per_sec =
      static_cast<double>(report.tokens_per_rep) / report.median_seconds;
  return report;
}

double fit_power_law(std::span<const std::size_t> lengths,
                     std::span<const double> times) {
  if (lengths.size() != times.size() || lengths.size() < 2)
    throw std::runtime_error("power-law fit needs >= 2 (length, time) points");
  const auto n = static_cast<double>(lengths.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (times[i] <= 0.0)
      throw std::runtime_error("power-law fit needs positive times");
    const double x = std::log(static_cast<double>(lengths[i]));
    const double y = std::log(times[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::runtime_error("degenerate lengths for fit");
  return (n * sxy - sx * sy) / denom;
}

ScalingReport fit_scaling_exponent(const EncoderConfig& cfg,
                                   const EncoderWeights& weights,
                                   std::span<const std::size_t> lengths,
                                   int reps, int warmup) {
  if (lengths.size() < 4)
    throw std::runtime_error("scaling fit needs >= 4 lengths");
  for (std::size_t i = 1; i < lengths.size(); ++i)
    if (lengths[i] <= lengths[i - 1])
      throw std::runtime_error("scaling lengths must be strictly increasing");
  if (lengths.back() < 8 * lengths.front())
    throw std::runtime_error("scaling lengths must span at least an 8x range");

  ScalingReport report;
  report.kind = cfg.kind;
  report.lengths.assign(lengths.begin(), lengths.end());
  for (std::size_t t : lengths) {
    auto tp = measure_throughput(cfg, weights, t, reps, warmup);
    report.median_seconds.push_back(tp.median_seconds);
    report.tokens_per_sec.push_back(tp.tokens_per_sec);
  }
  for (std::size_t i = 1; i < report.median_seconds.size(); ++i)
    if (report.median_seconds[i] < report.median_seconds[i - 1])
      report.monotone = false;
  if (!report.monotone)
    warn("scaling times are not monotone in length; fit reported anyway");
  report.beta = fit_power_law(report.lengths, report.median_seconds);
  return report;
}

CapacityReport compare_context_capacity(const EncoderConfig& cfg,
                                        std::size_t budget_bytes,
                                        bool verify_encode) {
  cfg.validate();
  if (encode_workspace_bytes(cfg, 1) > budget_bytes)
    throw std::runtime_error("memory budget below the minimal model footprint");

  // Exponential probe then binary search for the largest fitting length.
  std::size_t lo = 1, hi = 2;
  while (encode_workspace_bytes(cfg, hi) <= budget_bytes) {
    lo = hi;
    hi *= 2;
  }
  while (lo + 1 < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (encode_workspace_bytes(cfg, mid) <= budget_bytes ? lo : hi) = mid;
  }

  CapacityReport report;
  report.kind = cfg.kind;
  report.max_tokens = lo;
  if (cfg.kind == EncoderKind::attention && cfg.max_context > 0 &&
      cfg.max_context <= lo) {
    report.max_tokens = cfg.max_context;
    report.hard_cap = true;
  }

  if (verify_encode) {
    EncoderWeights weights = init_weights(cfg);
    auto ids = random_token_ids(report.max_tokens, cfg.vocab_size,
                                derive_seed(cfg.seed, "capacity-tokens"));
    std::vector<std::uint8_t> mask(report.max_tokens, 1);
    encode(ids, mask, cfg, weights);
  }
  return report;
}

}  // namespace longdoc
