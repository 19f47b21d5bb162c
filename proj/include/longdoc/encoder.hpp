#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace longdoc {

enum class EncoderKind { attention, scan_sequential, scan_chunked };

const char* to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(const std::string& name);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::attention;
  int model_dim = 64;
  int n_layers = 2;
  int n_heads = 4;        // attention only; must divide model_dim
  int state_dim = 16;     // scan only
  int chunk_len = 64;     // scan_chunked only
  std::size_t max_context = 512;  // attention hard cap; scans are unbounded
  std::uint64_t seed = 0;
  std::size_t vocab_size = 0;

  bool is_scan() const { return kind != EncoderKind::attention; }
  void validate() const;
  std::uint64_t fingerprint() const;
};

struct AttentionLayerParams {
  std::vector<double> wq, wk, wv, wo;  // d x d, row-major (in, out)
  std::vector<double> ffn_w1, ffn_b1;  // d x 4d, 4d
  std::vector<double> ffn_w2, ffn_b2;  // 4d x d, d
  std::vector<double> ln1_gain, ln1_bias, ln2_gain, ln2_bias;  // d each
};

struct ScanLayerParams {
  std::vector<double> a;        // d x N, all entries <= 0
  std::vector<double> w_delta;  // d x d
  std::vector<double> b_delta;  // d
  std::vector<double> w_b;      // d x N (input -> per-position B)
  std::vector<double> w_c;      // d x N (input -> per-position C)
  std::vector<double> d_skip;   // d
  std::vector<double> w_gate;   // d x d
};

struct EncoderWeights {
  std::vector<double> embedding;  // V x d
  std::vector<AttentionLayerParams> attn_layers;
  std::vector<ScanLayerParams> scan_layers;
};

// Deterministic initialization: projections ~ N(0, 1/fan_in), embeddings
// ~ N(0, 1), state matrix A[c][n] = -(n+1), skip weights 1, biases 0.
EncoderWeights init_weights(const EncoderConfig& cfg);

void save_weights(const std::string& path, const EncoderConfig& cfg,
                  const EncoderWeights& weights);
std::pair<EncoderConfig, EncoderWeights> load_weights(const std::string& path);

// Flat "key = value" encoder config file. Accepted keys: kind, model_dim,
// n_layers, n_heads, state_dim, chunk_len, max_context; anything else is
// rejected. Seed and vocab size stay with the pipeline that owns them.
EncoderConfig load_encoder_config(const std::string& path);
void save_encoder_config(const std::string& path, const EncoderConfig& cfg);

struct HiddenStates {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;            // rows x cols, row-major
  std::vector<std::uint8_t> mask;      // rows; 1 = real token

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

// Attention probabilities captured for inspection; head_probs[h] is a
// t x t row-major matrix over (query, key).
struct AttentionProbs {
  std::size_t t = 0;
  std::vector<std::vector<double>> head_probs;
};

// Pre-residual multi-head attention: concat_h(softmax(Q_h K_h^T / sqrt(d_h)
// masked over invalid keys) V_h) W_o.
HiddenStates multi_head_attention(const HiddenStates& x,
                                  const AttentionLayerParams& params,
                                  const EncoderConfig& cfg,
                                  AttentionProbs* probs = nullptr);

// Full transformer block: post-norm residual attention then feed-forward.
HiddenStates self_attention_layer(const HiddenStates& x,
                                  const AttentionLayerParams& params,
                                  const EncoderConfig& cfg,
                                  AttentionProbs* probs = nullptr);

// Selective-scan recurrence over precomputed per-position inputs. Shapes:
// x, delta: t x d; b_in, c_out: t x n_state; a: d x n_state; d_skip: d;
// y: t x d (output). Masked positions leave the state untouched and emit 0.
void scan_recurrence_sequential(std::size_t t_len, std::size_t d,
                                std::size_t n_state, std::span<const double> x,
                                std::span<const double> delta,
                                std::span<const double> b_in,
                                std::span<const double> c_out,
                                std::span<const double> a,
                                std::span<const double> d_skip,
                                std::span<const std::uint8_t> mask,
                                std::span<double> y);

// Chunk-wise evaluation of the same recurrence: each chunk scans from a zero
// state while the carried state is propagated through the chunk's running
// decay product. Output matches the sequential scan within 1e-5 max-abs.
void scan_recurrence_chunked(std::size_t t_len, std::size_t d,
                             std::size_t n_state, std::size_t chunk_len,
                             std::span<const double> x,
                             std::span<const double> delta,
                             std::span<const double> b_in,
                             std::span<const double> c_out,
                             std::span<const double> a,
                             std::span<const double> d_skip,
                             std::span<const std::uint8_t> mask,
                             std::span<double> y);

// Full scan layer: input-dependent delta/B/C projections, the recurrence
// (sequential or chunked per cfg.kind), then the SiLU output gate.
HiddenStates ssm_scan_layer(const HiddenStates& x,
                            const ScanLayerParams& params,
                            const EncoderConfig& cfg);

struct EncodeTrace {
  // One entry per (layer, head, query row): sum of that row's attention
  // probabilities over valid keys.
  std::vector<double> attention_row_sums;
};

struct EncodeResult {
  HiddenStates states;
  std::vector<double> pooled;  // masked mean over final-layer states
};

EncodeResult encode(std::span<const int> ids,
                    std::span<const std::uint8_t> mask,
                    const EncoderConfig& cfg, const EncoderWeights& weights,
                    EncodeTrace* trace = nullptr);

// Fixed parameter footprint of the model in bytes.
std::size_t weight_bytes(const EncoderConfig& cfg);

// Peak transient buffer bytes for encoding a length-T input, including the
// parameter footprint. This is the memory model used for capacity search.
std::size_t encode_workspace_bytes(const EncoderConfig& cfg, std::size_t t_len);

}  // namespace longdoc
