#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "longdoc/encoder.hpp"
#include "longdoc/window.hpp"

namespace longdoc {

struct ThroughputReport {
  EncoderKind kind = EncoderKind::attention;
  std::size_t seq_len = 0;
  int reps = 0;
  int warmup = 0;
  std::vector<double> rep_seconds;
  double median_seconds = 0.0;
  std::size_t tokens_per_rep = 0;  // real tokens, window overlap included
  double tokens_per_sec = 0.0;
  std::size_t window_count = 0;
};

// Smallest observable tick of the wall clock, measured once.
double timer_resolution_seconds();

// Forward-pass throughput on a seeded random token stream. Attention inputs
// beyond the context cap run in windowed mode and pay for the overlap, like
// the real pipeline does. Single-threaded by construction.
ThroughputReport measure_throughput(const EncoderConfig& cfg,
                                    const EncoderWeights& weights,
                                    std::size_t t_len, int reps, int warmup,
                                    double overlap = 0.2);

// OLS slope of log(time) on log(length).
double fit_power_law(std::span<const std::size_t> lengths,
                     std::span<const double> times);

struct ScalingReport {
  EncoderKind kind = EncoderKind::attention;
  std::vector<std::size_t> lengths;
  std::vector<double> median_seconds;
  std::vector<double> tokens_per_sec;
  double beta = 0.0;
  bool monotone = true;
};

// Measures each length and fits the scaling exponent. Needs >= 4 lengths
// spanning at least an 8x range.
ScalingReport fit_scaling_exponent(const EncoderConfig& cfg,
                                   const EncoderWeights& weights,
                                   std::span<const std::size_t> lengths,
                                   int reps, int warmup);

struct CapacityReport {
  EncoderKind kind = EncoderKind::attention;
  std::size_t max_tokens = 0;
  bool hard_cap = false;  // attention stopped by its context cap, not memory
};

// Largest T whose workspace fits the byte budget (binary search over the
// documented memory model); attention reports its context cap when that is
// hit first. With verify_encode, runs one real encode at the reported size.
CapacityReport compare_context_capacity(const EncoderConfig& cfg,
                                        std::size_t budget_bytes,
                                        bool verify_encode = false);

}  // namespace longdoc
