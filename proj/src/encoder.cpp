#include "longdoc/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "longdoc/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian");

namespace longdoc {

namespace {

constexpr std::size_t kRowBlock = 48;  // attention score rows per pass

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// out = x * w, shapes t x m times m x n, all row-major. out is overwritten.
void matmul(const double* x, std::size_t t, std::size_t m, const double* w,
            std::size_t n, double* out) {
  for (std::size_t i = 0; i < t; ++i) {
    double* o = out + i * n;
    std::fill(o, o + n, 0.0);
    const double* xi = x + i * m;
    for (std::size_t k = 0; k < m; ++k) {
      const double xv = xi[k];
      const double* wr = w + k * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += xv * wr[j];
    }
  }
}

inline double silu(double v) { return v / (1.0 + std::exp(-v)); }

inline double softplus(double v) {
  if (v > 30.0) return v;
  return std::log1p(std::exp(v));
}

void layer_norm_row(double* row, std::size_t d, const double* gain,
                    const double* bias) {
  constexpr double kEps = 1e-5;
  double mean = 0.0;
  for (std::size_t c = 0; c < d; ++c) mean += row[c];
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double dv = row[c] - mean;
    var += dv * dv;
  }
  var /= static_cast<double>(d);
  double inv = 1.0 / std::sqrt(var + kEps);
  for (std::size_t c = 0; c < d; ++c)
    row[c] = (row[c] - mean) * inv * gain[c] + bias[c];
}

}  // namespace

const char* to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::attention: return "attention";
    case EncoderKind::scan_sequential: return "scan";
    case EncoderKind::scan_chunked: return "scan-chunked";
  }
  return "?";
}

EncoderKind encoder_kind_from_string(const std::string& name) {
  if (name == "attention") return EncoderKind::attention;
  if (name == "scan" || name == "scan-sequential")
    return EncoderKind::scan_sequential;
  if (name == "scan-chunked") return EncoderKind::scan_chunked;
  throw std::runtime_error("unknown encoder kind: " + name);
}

void EncoderConfig::validate() const {
  if (model_dim < 2) throw std::runtime_error("model_dim must be >= 2");
  if (n_layers < 1) throw std::runtime_error("n_layers must be >= 1");
  if (kind == EncoderKind::attention) {
    if (n_heads < 1) throw std::runtime_error("n_heads must be >= 1");
    if (model_dim % n_heads != 0)
      throw std::runtime_error("model_dim " + std::to_string(model_dim) +
                               " not divisible by n_heads " +
                               std::to_string(n_heads));
    if (max_context < 1)
      throw std::runtime_error("attention requires a positive max_context");
  } else {
    if (state_dim < 1) throw std::runtime_error("state_dim must be >= 1");
    if (kind == EncoderKind::scan_chunked && chunk_len < 1)
      throw std::runtime_error("chunk_len must be >= 1");
  }
}

std::uint64_t EncoderConfig::fingerprint() const {
  std::uint64_t h = fnv1a64("encoder");
  h = hash_combine(h, static_cast<std::uint64_t>(kind));
  h = hash_combine(h, static_cast<std::uint64_t>(model_dim));
  h = hash_combine(h, static_cast<std::uint64_t>(n_layers));
  h = hash_combine(h, static_cast<std::uint64_t>(n_heads));
  h = hash_combine(h, static_cast<std::uint64_t>(state_dim));
  h = hash_combine(h, static_cast<std::uint64_t>(chunk_len));
  h = hash_combine(h, static_cast<std::uint64_t>(max_context));
  h = hash_combine(h, seed);
  h = hash_combine(h, static_cast<std::uint64_t>(vocab_size));
  return h;
}

EncoderWeights init_weights(const EncoderConfig& cfg) {
  cfg.validate();
  if (cfg.vocab_size < 1)
    throw std::runtime_error("vocab_size must be set before init_weights");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto draw = [&](std::size_t n, double scale) {
    std::vector<double> v(n);
    for (auto& x : v) x = unit(rng) * scale;
    return v;
  };
  const std::size_t d = static_cast<std::size_t>(cfg.model_dim);
  const double proj = 1.0 / std::sqrt(static_cast<double>(d));

  EncoderWeights weights;
  weights.embedding = draw(cfg.vocab_size * d, 1.0);

  if (cfg.kind == EncoderKind::attention) {
    const std::size_t ffn = 4 * d;
    const double ffn_proj = 1.0 / std::sqrt(static_cast<double>(ffn));
    weights.attn_layers.resize(cfg.n_layers);
    for (auto& layer : weights.attn_layers) {
      layer.wq = draw(d * d, proj);
      layer.wk = draw(d * d, proj);
      layer.wv = draw(d * d, proj);
      layer.wo = draw(d * d, proj);
      layer.ffn_w1 = draw(d * ffn, proj);
      layer.ffn_b1.assign(ffn, 0.0);
      layer.ffn_w2 = draw(ffn * d, ffn_proj);
      layer.ffn_b2.assign(d, 0.0);
      layer.ln1_gain.assign(d, 1.0);
      layer.ln1_bias.assign(d, 0.0);
      layer.ln2_gain.assign(d, 1.0);
      layer.ln2_bias.assign(d, 0.0);
    }
  } else {
    const std::size_t n = static_cast<std::size_t>(cfg.state_dim);
    weights.scan_layers.resize(cfg.n_layers);
    for (auto& layer : weights.scan_layers) {
      layer.a.resize(d * n);
      for (std::size_t c = 0; c < d; ++c)
        for (std::size_t k = 0; k < n; ++k)
          layer.a[c * n + k] = -static_cast<double>(k + 1);
      layer.w_delta = draw(d * d, proj);
      layer.b_delta.assign(d, 0.0);
      layer.w_b = draw(d * n, proj);
      layer.w_c = draw(d * n, proj);
      layer.d_skip.assign(d, 1.0);
      layer.w_gate = draw(d * d, proj);
    }
  }
  return weights;
}

HiddenStates multi_head_attention(const HiddenStates& x,
                                  const AttentionLayerParams& params,
                                  const EncoderConfig& cfg,
                                  AttentionProbs* probs) {
  const std::size_t t_len = x.rows;
  const std::size_t d = x.cols;
  const std::size_t heads = static_cast<std::size_t>(cfg.n_heads);
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  if (std::none_of(x.mask.begin(), x.mask.end(), [](auto m) { return m; }))
    throw std::runtime_error("attention window has no valid positions");

  std::vector<double> q(t_len * d), k(t_len * d), v(t_len * d);
  matmul(x.data.data(), t_len, d, params.wq.data(), d, q.data());
  matmul(x.data.data(), t_len, d, params.wk.data(), d, k.data());
  matmul(x.data.data(), t_len, d, params.wv.data(), d, v.data());

  if (probs) {
    probs->t = t_len;
    probs->head_probs.assign(heads, std::vector<double>(t_len * t_len, 0.0));
  }

  std::vector<double> attn(t_len * d, 0.0);
  std::vector<double> scores(kRowBlock * t_len);
  std::vector<double> out_block(kRowBlock * dh);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t base = h * dh;
    for (std::size_t i0 = 0; i0 < t_len; i0 += kRowBlock) {
      const std::size_t ib = std::min(kRowBlock, t_len - i0);
      for (std::size_t j = 0; j < t_len; ++j) {
        const double* kj = k.data() + j * d + base;
        for (std::size_t i = 0; i < ib; ++i)
          scores[i * t_len + j] =
              dot(q.data() + (i0 + i) * d + base, kj, dh) * scale;
      }
      // Masked keys get zero weight; softmax over the valid ones.
      for (std::size_t i = 0; i < ib; ++i) {
        double* row = scores.data() + i * t_len;
        double hi = -HUGE_VAL;
        for (std::size_t j = 0; j < t_len; ++j)
          if (x.mask[j] && row[j] > hi) hi = row[j];
        double sum = 0.0;
        for (std::size_t j = 0; j < t_len; ++j) {
          if (x.mask[j]) {
            row[j] = std::exp(row[j] - hi);
            sum += row[j];
          } else {
            row[j] = 0.0;
          }
        }
        const double inv = 1.0 / sum;
        for (std::size_t j = 0; j < t_len; ++j) row[j] *= inv;
        if (probs)
          std::copy(row, row + t_len,
                    probs->head_probs[h].begin() + (i0 + i) * t_len);
      }
      std::fill(out_block.begin(), out_block.begin() + ib * dh, 0.0);
      for (std::size_t j = 0; j < t_len; ++j) {
        const double* vj = v.data() + j * d + base;
        for (std::size_t i = 0; i < ib; ++i) {
          const double p = scores[i * t_len + j];
          if (p == 0.0) continue;
          double* o = out_block.data() + i * dh;
          for (std::size_t c = 0; c < dh; ++c) o[c] += p * vj[c];
        }
      }
      for (std::size_t i = 0; i < ib; ++i)
        std::copy(out_block.data() + i * dh, out_block.data() + (i + 1) * dh,
                  attn.data() + (i0 + i) * d + base);
    }
  }

  HiddenStates out;
  out.rows = t_len;
  out.cols = d;
  out.mask = x.mask;
  out.data.resize(t_len * d);
  matmul(attn.data(), t_len, d, params.wo.data(), d, out.data.data());
  return out;
}

HiddenStates self_attention_layer(const HiddenStates& x,
                                  const AttentionLayerParams& params,
                                  const EncoderConfig& cfg,
                                  AttentionProbs* probs) {
  const std::size_t t_len = x.rows;
  const std::size_t d = x.cols;
  if (cfg.max_context > 0 && t_len > cfg.max_context)
    throw ContextOverflowError(t_len, cfg.max_context);

  HiddenStates y = multi_head_attention(x, params, cfg, probs);
  for (std::size_t i = 0; i < t_len * d; ++i) y.data[i] += x.data[i];
  for (std::size_t t = 0; t < t_len; ++t)
    layer_norm_row(y.data.data() + t * d, d, params.ln1_gain.data(),
                   params.ln1_bias.data());

  const std::size_t ffn = 4 * d;
  std::vector<double> hidden(t_len * ffn);
  matmul(y.data.data(), t_len, d, params.ffn_w1.data(), ffn, hidden.data());
  for (std::size_t t = 0; t < t_len; ++t) {
    double* row = hidden.data() + t * ffn;
    for (std::size_t j = 0; j < ffn; ++j)
      row[j] = std::max(0.0, row[j] + params.ffn_b1[j]);
  }
  std::vector<double> proj(t_len * d);
  matmul(hidden.data(), t_len, ffn, params.ffn_w2.data(), d, proj.data());
  for (std::size_t t = 0; t < t_len; ++t) {
    double* row = y.data.data() + t * d;
    const double* pr = proj.data() + t * d;
    for (std::size_t c = 0; c < d; ++c) row[c] += pr[c] + params.ffn_b2[c];
    layer_norm_row(row, d, params.ln2_gain.data(), params.ln2_bias.data());
  }
  return y;
}

void scan_recurrence_sequential(std::size_t t_len, std::size_t d,
                                std::size_t n_state, std::span<const double> x,
                                std::span<const double> delta,
                                std::span<const double> b_in,
                                std::span<const double> c_out,
                                std::span<const double> a,
                                std::span<const double> d_skip,
                                std::span<const std::uint8_t> mask,
                                std::span<double> y) {
  std::vector<double> h(n_state);
  for (std::size_t c = 0; c < d; ++c) {
    std::fill(h.begin(), h.end(), 0.0);
    const double* ac = a.data() + c * n_state;
    const double dsk = d_skip[c];
    for (std::size_t t = 0; t < t_len; ++t) {
      if (!mask[t]) {
        y[t * d + c] = 0.0;  // state passes through untouched
        continue;
      }
      const double dt = delta[t * d + c];
      const double xv = x[t * d + c];
      const double* bt = b_in.data() + t * n_state;
      const double* ct = c_out.data() + t * n_state;
      double acc = 0.0;
      // Explicit fma keeps the rounding identical to the chunked path, so
      // the degenerate chunk sizes compare bit for bit.
      for (std::size_t n = 0; n < n_state; ++n) {
        const double abar = std::exp(dt * ac[n]);
        const double bx = dt * bt[n] * xv;
        h[n] = std::fma(abar, h[n], bx);
        acc = std::fma(ct[n], h[n], acc);
      }
      const double out = std::fma(dsk, xv, acc);
      if (!std::isfinite(out))
        throw NumericError(t, "non-finite selective-scan output");
      y[t * d + c] = out;
    }
  }
}

void scan_recurrence_chunked(std::size_t t_len, std::size_t d,
                             std::size_t n_state, std::size_t chunk_len,
                             std::span<const double> x,
                             std::span<const double> delta,
                             std::span<const double> b_in,
                             std::span<const double> c_out,
                             std::span<const double> a,
                             std::span<const double> d_skip,
                             std::span<const std::uint8_t> mask,
                             std::span<double> y) {
  if (chunk_len < 1) throw std::runtime_error("chunk_len must be >= 1");
  std::vector<double> h0(n_state), h_in(n_state), decay(n_state);
  for (std::size_t c = 0; c < d; ++c) {
    std::fill(h0.begin(), h0.end(), 0.0);
    const double* ac = a.data() + c * n_state;
    const double dsk = d_skip[c];
    for (std::size_t t0 = 0; t0 < t_len; t0 += chunk_len) {
      const std::size_t t1 = std::min(t_len, t0 + chunk_len);
      // Each chunk scans from a zero state; the carried state rides along
      // through the running decay product and is folded in per position.
      std::fill(h_in.begin(), h_in.end(), 0.0);
      std::fill(decay.begin(), decay.end(), 1.0);
      for (std::size_t t = t0; t < t1; ++t) {
        if (!mask[t]) {
          y[t * d + c] = 0.0;
          continue;
        }
        const double dt = delta[t * d + c];
        const double xv = x[t * d + c];
        const double* bt = b_in.data() + t * n_state;
        const double* ct = c_out.data() + t * n_state;
        double acc = 0.0;
        for (std::size_t n = 0; n < n_state; ++n) {
          const double abar = std::exp(dt * ac[n]);
          const double bx = dt * bt[n] * xv;
          h_in[n] = std::fma(abar, h_in[n], bx);
          decay[n] *= abar;
          const double state = std::fma(decay[n], h0[n], h_in[n]);
          acc = std::fma(ct[n], state, acc);
        }
        const double out = std::fma(dsk, xv, acc);
        if (!std::isfinite(out))
          throw NumericError(t, "non-finite selective-scan output");
        y[t * d + c] = out;
      }
      for (std::size_t n = 0; n < n_state; ++n)
        h0[n] = std::fma(decay[n], h0[n], h_in[n]);
    }
  }
}

HiddenStates ssm_scan_layer(const HiddenStates& x,
                            const ScanLayerParams& params,
                            const EncoderConfig& cfg) {
  const std::size_t t_len = x.rows;
  const std::size_t d = x.cols;
  const std::size_t n = static_cast<std::size_t>(cfg.state_dim);

  std::vector<double> delta(t_len * d);
  matmul(x.data.data(), t_len, d, params.w_delta.data(), d, delta.data());
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t c = 0; c < d; ++c)
      delta[t * d + c] = softplus(delta[t * d + c] + params.b_delta[c]);

  std::vector<double> b_in(t_len * n), c_out(t_len * n);
  matmul(x.data.data(), t_len, d, params.w_b.data(), n, b_in.data());
  matmul(x.data.data(), t_len, d, params.w_c.data(), n, c_out.data());

  std::vector<double> gate(t_len * d);
  matmul(x.data.data(), t_len, d, params.w_gate.data(), d, gate.data());

  HiddenStates out;
  out.rows = t_len;
  out.cols = d;
  out.mask = x.mask;
  out.data.assign(t_len * d, 0.0);
  if (cfg.kind == EncoderKind::scan_chunked)
    scan_recurrence_chunked(t_len, d, n, cfg.chunk_len, x.data, delta, b_in,
                            c_out, params.a, params.d_skip, x.mask, out.data);
  else
    scan_recurrence_sequential(t_len, d, n, x.data, delta, b_in, c_out,
                               params.a, params.d_skip, x.mask, out.data);

  for (std::size_t i = 0; i < t_len * d; ++i) out.data[i] *= silu(gate[i]);
  return out;
}

EncodeResult encode(std::span<const int> ids,
                    std::span<const std::uint8_t> mask,
                    const EncoderConfig& cfg, const EncoderWeights& weights,
                    EncodeTrace* trace) {
  cfg.validate();
  const std::size_t t_len = ids.size();
  if (t_len == 0) throw std::runtime_error("cannot encode an empty window");
  if (mask.size() != t_len)
    throw std::runtime_error("mask length does not match token count");
  if (cfg.kind == EncoderKind::attention && cfg.max_context > 0 &&
      t_len > cfg.max_context)
    throw ContextOverflowError(t_len, cfg.max_context);

  const std::size_t d = static_cast<std::size_t>(cfg.model_dim);
  HiddenStates x;
  x.rows = t_len;
  x.cols = d;
  x.mask.assign(mask.begin(), mask.end());
  x.data.resize(t_len * d);
  std::size_t n_valid = 0;
  for (std::size_t t = 0; t < t_len; ++t) {
    const int id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size)
      throw std::runtime_error("token id " + std::to_string(id) +
                               " outside vocab of size " +
                               std::to_string(cfg.vocab_size));
    std::copy_n(weights.embedding.data() + static_cast<std::size_t>(id) * d, d,
                x.data.data() + t * d);
    if (mask[t]) ++n_valid;
  }
  if (n_valid == 0)
    throw std::runtime_error("window has no valid (non-pad) tokens");

  for (int layer = 0; layer < cfg.n_layers; ++layer) {
    if (cfg.kind == EncoderKind::attention) {
      AttentionProbs probs;
      x = self_attention_layer(x, weights.attn_layers[layer], cfg,
                               trace ? &probs : nullptr);
      if (trace)
        for (const auto& head : probs.head_probs)
          for (std::size_t i = 0; i < t_len; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < t_len; ++j) sum += head[i * t_len + j];
            trace->attention_row_sums.push_back(sum);
          }
    } else {
      x = ssm_scan_layer(x, weights.scan_layers[layer], cfg);
    }
  }

  EncodeResult result;
  result.pooled.assign(d, 0.0);
  for (std::size_t t = 0; t < t_len; ++t) {
    if (!x.mask[t]) continue;
    const double* row = x.data.data() + t * d;
    for (std::size_t c = 0; c < d; ++c) result.pooled[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(n_valid);
  for (std::size_t c = 0; c < d; ++c) {
    result.pooled[c] *= inv;
    if (!std::isfinite(result.pooled[c]))
      throw NumericError(c, "non-finite pooled embedding component");
  }
  result.states = std::move(x);
  return result;
}

namespace {

std::size_t attn_layer_param_count(std::size_t d) {
  return 4 * d * d /* qkvo */ + d * 4 * d + 4 * d + 4 * d * d + d /* ffn */ +
         4 * d /* layer norms */;
}

std::size_t scan_layer_param_count(std::size_t d, std::size_t n) {
  return d * n /* a */ + d * d + d /* delta */ + 2 * d * n /* b, c */ +
         d /* skip */ + d * d /* gate */;
}

void write_block(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_block(std::ifstream& in, std::vector<double>& v, std::size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("truncated weight file");
}

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated weight file");
  return v;
}

constexpr char kWeightMagic[8] = {'L', 'D', 'W', 'T', '0', '0', '0', '1'};

}  // namespace

void save_weights(const std::string& path, const EncoderConfig& cfg,
                  const EncoderWeights& weights) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write weight file: " + path);
  out.write(kWeightMagic, sizeof kWeightMagic);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.kind));
  write_pod<std::int32_t>(out, cfg.model_dim);
  write_pod<std::int32_t>(out, cfg.n_layers);
  write_pod<std::int32_t>(out, cfg.n_heads);
  write_pod<std::int32_t>(out, cfg.state_dim);
  write_pod<std::int32_t>(out, cfg.chunk_len);
  write_pod<std::uint64_t>(out, cfg.max_context);
  write_pod<std::uint64_t>(out, cfg.seed);
  write_pod<std::uint64_t>(out, cfg.vocab_size);

  write_block(out, weights.embedding);
  for (const auto& l : weights.attn_layers) {
    write_block(out, l.wq);
    write_block(out, l.wk);
    write_block(out, l.wv);
    write_block(out, l.wo);
    write_block(out, l.ffn_w1);
    write_block(out, l.ffn_b1);
    write_block(out, l.ffn_w2);
    write_block(out, l.ffn_b2);
    write_block(out, l.ln1_gain);
    write_block(out, l.ln1_bias);
    write_block(out, l.ln2_gain);
    write_block(out, l.ln2_bias);
  }
  for (const auto& l : weights.scan_layers) {
    write_block(out, l.a);
    write_block(out, l.w_delta);
    write_block(out, l.b_delta);
    write_block(out, l.w_b);
    write_block(out, l.w_c);
    write_block(out, l.d_skip);
    write_block(out, l.w_gate);
  }
}

std::pair<EncoderConfig, EncoderWeights> load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weight file: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kWeightMagic, sizeof magic) != 0)
    throw std::runtime_error("not a weight file: " + path);

  EncoderConfig cfg;
  cfg.kind = static_cast<EncoderKind>(read_pod<std::uint32_t>(in));
  cfg.model_dim = read_pod<std::int32_t>(in);
  cfg.n_layers = read_pod<std::int32_t>(in);
  cfg.n_heads = read_pod<std::int32_t>(in);
  cfg.state_dim = read_pod<std::int32_t>(in);
  cfg.chunk_len = read_pod<std::int32_t>(in);
  cfg.max_context = read_pod<std::uint64_t>(in);
  cfg.seed = read_pod<std::uint64_t>(in);
  cfg.vocab_size = read_pod<std::uint64_t>(in);
  cfg.validate();

  const auto d = static_cast<std::size_t>(cfg.model_dim);
  const auto n = static_cast<std::size_t>(cfg.state_dim);
  EncoderWeights weights;
  read_block(in, weights.embedding, cfg.vocab_size * d);
  if (cfg.kind == EncoderKind::attention) {
    weights.attn_layers.resize(cfg.n_layers);
    for (auto& l : weights.attn_layers) {
      read_block(in, l.wq, d * d);
      read_block(in, l.wk, d * d);
      read_block(in, l.wv, d * d);
      read_block(in, l.wo, d * d);
      read_block(in, l.ffn_w1, d * 4 * d);
      read_block(in, l.ffn_b1, 4 * d);
      read_block(in, l.ffn_w2, 4 * d * d);
      read_block(in, l.ffn_b2, d);
      read_block(in, l.ln1_gain, d);
      read_block(in, l.ln1_bias, d);
      read_block(in, l.ln2_gain, d);
      read_block(in, l.ln2_bias, d);
    }
  } else {
    weights.scan_layers.resize(cfg.n_layers);
    for (auto& l : weights.scan_layers) {
      read_block(in, l.a, d * n);
      read_block(in, l.w_delta, d * d);
      read_block(in, l.b_delta, d);
      read_block(in, l.w_b, d * n);
      read_block(in, l.w_c, d * n);
      read_block(in, l.d_skip, d);
      read_block(in, l.w_gate, d * d);
    }
  }
  return {cfg, std::move(weights)};
}

EncoderConfig load_encoder_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open encoder config: " + path);
  EncoderConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto sep = line.find('=');
    if (sep == std::string::npos)
      throw std::runtime_error("encoder config line " +
                               std::to_string(line_no) + " is not key = value");
    auto trim = [](std::string s) {
      const char* ws = " \t";
      s.erase(0, s.find_first_not_of(ws));
      s.erase(s.find_last_not_of(ws) + 1);
      return s;
    };
    const std::string key = trim(line.substr(0, sep));
    const std::string value = trim(line.substr(sep + 1));
    if (key == "kind") cfg.kind = encoder_kind_from_string(value);
    else if (key == "model_dim") cfg.model_dim = std::stoi(value);
    else if (key == "n_layers") cfg.n_layers = std::stoi(value);
    else if (key == "n_heads") cfg.n_heads = std::stoi(value);
    else if (key == "state_dim") cfg.state_dim = std::stoi(value);
    else if (key == "chunk_len") cfg.chunk_len = std::stoi(value);
    else if (key == "max_context") cfg.max_context = std::stoull(value);
    else
      throw std::runtime_error("unknown encoder config key on line " +
                               std::to_string(line_no) + ": " + key);
  }
  return cfg;
}

void save_encoder_config(const std::string& path, const EncoderConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write encoder config: " + path);
  out << "kind = " << to_string(cfg.kind) << "\n";
  out << "model_dim = " << cfg.model_dim << "\n";
  out << "n_layers = " << cfg.n_layers << "\n";
  out << "n_heads = " << cfg.n_heads << "\n";
  out << "state_dim = " << cfg.state_dim << "\n";
  out << "chunk_len = " << cfg.chunk_len << "\n";
  out << "max_context = " << cfg.max_context << "\n";
}

std::size_t weight_bytes(const EncoderConfig& cfg) {
  const auto d = static_cast<std::size_t>(cfg.model_dim);
  const auto n = static_cast<std::size_t>(cfg.state_dim);
  std::size_t params = cfg.vocab_size * d;
  params += static_cast<std::size_t>(cfg.n_layers) *
            (cfg.kind == EncoderKind::attention ? attn_layer_param_count(d)
                                                : scan_layer_param_count(d, n));
  return params * sizeof(double);
}

std::size_t encode_workspace_bytes(const EncoderConfig& cfg,
                                   std::size_t t_len) {
  const auto d = static_cast<std::size_t>(cfg.model_dim);
  const auto n = static_cast<std::size_t>(cfg.state_dim);
  std::size_t per_token;
  if (cfg.kind == EncoderKind::attention) {
    // input + q/k/v + attention out + projection + 4d ffn hidden, plus the
    // row-block score buffer.
    per_token = (8 * d + kRowBlock) * sizeof(double);
  } else {
    // input + output + delta + gate (d each) and b/c projections (n each).
    per_token = (4 * d + 2 * n) * sizeof(double);
  }
  return weight_bytes(cfg) + t_len * (per_token + 1 /* mask byte */);
}

}  // namespace longdoc
