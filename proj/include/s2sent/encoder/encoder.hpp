#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "s2sent/encoder/tokenizer.hpp"
#include "s2sent/numerics/ops.hpp"
#include "s2sent/numerics/parameters.hpp"
#include "s2sent/numerics/rng.hpp"

namespace s2sent::encoder {

struct EncoderConfig {
  std::size_t vocab_size = 8192;
  std::size_t depth = 6;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t ffn_mult = 4;
  double dropout = 0.1;
  std::size_t max_len = 32;

  void validate() const {
    require(vocab_size > kReservedIds, "encoder: vocab_size must exceed the reserved ids");
    require(depth >= 1, "encoder: depth must be at least 1");
    require(width >= 1 && heads >= 1 && width % heads == 0,
            "encoder: width " + std::to_string(width) + " not divisible by heads " +
                std::to_string(heads));
    require(ffn_mult >= 1, "encoder: ffn_mult must be at least 1");
    require(dropout >= 0.0 && dropout < 1.0, "encoder: dropout must lie in [0, 1)");
    require(max_len >= 1, "encoder: max_len must be at least 1");
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Indices of one pre-norm transformer block's tensors in a ParameterList.
struct BlockLayout {
  std::size_t ln1_gain, ln1_bias;
  std::size_t wq, bq, wk, bk, wv, bv, wo, bo;
  std::size_t ln2_gain, ln2_bias;
  std::size_t ff1, ff1_bias, ff2, ff2_bias;
};

struct EncoderLayout {
  std::size_t embedding = 0;
  std::vector<BlockLayout> blocks;
};

inline EncoderLayout add_encoder_parameters(ParameterList& params, const EncoderConfig& cfg,
                                            SplitMix64& rng) {
  cfg.validate();
  const std::size_t D = cfg.width, H = cfg.width * cfg.ffn_mult;
  auto linear = [&](const std::string& name, std::size_t in, std::size_t out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    return params.add(name, uniform_tensor({in, out}, -bound, bound, rng));
  };
  auto zeros = [&](const std::string& name, std::size_t n) { return params.add(name, Tensor({n})); };
  auto ones = [&](const std::string& name, std::size_t n) { return params.add(name, Tensor({n}, 1.0)); };

  EncoderLayout layout;
  // Unit-variance token embeddings.
  const double e = std::sqrt(3.0);
  layout.embedding = params.add("embedding", uniform_tensor({cfg.vocab_size, D}, -e, e, rng));
  for (std::size_t b = 0; b < cfg.depth; ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    BlockLayout bl{};
    bl.ln1_gain = ones(p + "ln1.gain", D);
    bl.ln1_bias = zeros(p + "ln1.bias", D);
    bl.wq = linear(p + "attn.wq", D, D);
    bl.bq = zeros(p + "attn.bq", D);
    bl.wk = linear(p + "attn.wk", D, D);
    bl.bk = zeros(p + "attn.bk", D);
    bl.wv = linear(p + "attn.wv", D, D);
    bl.bv = zeros(p + "attn.bv", D);
    bl.wo = linear(p + "attn.wo", D, D);
    bl.bo = zeros(p + "attn.bo", D);
    bl.ln2_gain = ones(p + "ln2.gain", D);
    bl.ln2_bias = zeros(p + "ln2.bias", D);
    bl.ff1 = linear(p + "ffn.w1", D, H);
    bl.ff1_bias = zeros(p + "ffn.b1", H);
    bl.ff2 = linear(p + "ffn.w2", H, D);
    bl.ff2_bias = zeros(p + "ffn.b2", D);
    layout.blocks.push_back(bl);
  }
  return layout;
}

/// Sinusoidal position table [L x D].
inline Tensor sinusoidal_positions(std::size_t length, std::size_t width) {
  Tensor table({length, width});
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < width; ++i) {
      const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(width);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
      table(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return table;
}

/// Inverted dropout masks from a seeded stream.
class Dropout {
 public:
  Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {}

  Var apply(Var x) {
    if (rate_ <= 0.0) return x;
    Tensor mask(x.shape());
    const double keep = 1.0 - rate_;
    for (double& m : mask.data()) m = rng_.uniform() < keep ? 1.0 / keep : 0.0;
    return ag::mul_const(x, std::move(mask));
  }

 private:
  double rate_;
  SplitMix64 rng_;
};

/// Runs the token sequence through every block and returns each block's
/// output [L x D] in depth order. A null dropout means inference mode.
inline std::vector<Var> encode(Graph& graph, std::span<const Var> params, const EncoderLayout& layout,
                               const EncoderConfig& cfg, const TokenSequence& seq,
                               Dropout* dropout) {
  const std::size_t L = seq.size();
  require(L >= 1, "encode: empty token sequence");
  require(!params.empty() && params.front().graph == &graph, "encode: parameters bound to another graph");
  if (L > cfg.max_len) {
    throw ContractError("encode: sequence of " + std::to_string(L) + " tokens exceeds max_len " +
                        std::to_string(cfg.max_len));
  }
  const std::size_t D = cfg.width, heads = cfg.heads, head_width = D / heads;
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(head_width));
  auto drop = [&](Var x) { return dropout ? dropout->apply(x) : x; };

  Var x = ag::gather_rows(params[layout.embedding], seq.ids);
  x = drop(ag::add_const(x, sinusoidal_positions(L, D)));

  std::vector<Var> outputs;
  outputs.reserve(layout.blocks.size());
  for (const BlockLayout& b : layout.blocks) {
    const Var h = ag::layer_norm(x, params[b.ln1_gain], params[b.ln1_bias]);
    const Var q = ag::add_row(ag::matmul(h, params[b.wq]), params[b.bq]);
    const Var k = ag::add_row(ag::matmul(h, params[b.wk]), params[b.bk]);
    const Var v = ag::add_row(ag::matmul(h, params[b.wv]), params[b.bv]);
    std::vector<Var> head_out;
    head_out.reserve(heads);
    for (std::size_t hd = 0; hd < heads; ++hd) {
      const std::size_t lo = hd * head_width, hi = lo + head_width;
      const Var qh = heads == 1 ? q : ag::slice_cols(q, lo, hi);
      const Var kh = heads == 1 ? k : ag::slice_cols(k, lo, hi);
      const Var vh = heads == 1 ? v : ag::slice_cols(v, lo, hi);
      const Var attn = ag::softmax(ag::scale(ag::matmul_nt(qh, kh), attn_scale), 1);
      head_out.push_back(ag::matmul(attn, vh));
    }
    const Var mixed = heads == 1 ? head_out.front() : ag::concat_cols(head_out);
    const Var attn_out = ag::add_row(ag::matmul(mixed, params[b.wo]), params[b.bo]);
    x = ag::add(x, drop(attn_out));

    const Var h2 = ag::layer_norm(x, params[b.ln2_gain], params[b.ln2_bias]);
    const Var inner = ag::relu(ag::add_row(ag::matmul(h2, params[b.ff1]), params[b.ff1_bias]));
    const Var ffn_out = ag::add_row(ag::matmul(inner, params[b.ff2]), params[b.ff2_bias]);
    x = ag::add(x, drop(ffn_out));
    outputs.push_back(x);
  }
  return outputs;
}

/// Mean of the first true_len rows.
inline Tensor pool_avg(const Tensor& v, std::size_t true_len) {
  require(v.rank() == 2, "pool_avg: expects [L x D]");
  require(true_len >= 1, "pool_avg: true_len must be positive");
  require(true_len <= v.dim(0), "pool_avg: true_len exceeds sequence length");
  Tensor out({v.dim(1)});
  for (std::size_t l = 0; l < true_len; ++l)
    for (std::size_t d = 0; d < v.dim(1); ++d) out[d] += v(l, d);
  for (double& x : out.data()) x /= static_cast<double>(true_len);
  return out;
}

/// Row 0 (first-token surrogate for a classifier token).
inline Tensor pool_first(const Tensor& v) {
  require(v.rank() == 2 && v.dim(0) >= 1, "pool_first: expects [L x D] with L >= 1");
  return Tensor::vector(std::vector<double>(v.row(0).begin(), v.row(0).end()));
}

/// Encoder that owns its parameters, for standalone use.
class Encoder {
 public:
  Encoder(EncoderConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    SplitMix64 rng(seed);
    layout_ = add_encoder_parameters(params_, cfg_, rng);
  }

  const EncoderConfig& config() const { return cfg_; }
  const ParameterList& parameters() const { return params_; }
  ParameterList& parameters() { return params_; }
  const EncoderLayout& layout() const { return layout_; }

  /// Every block's output. Dropout is active only when training is true and
  /// then draws its masks from dropout_seed.
  std::vector<Tensor> encode(const TokenSequence& seq, bool training,
                             std::uint64_t dropout_seed = 0) const {
    Graph graph;
    const std::vector<Var> bound = params_.bind(graph, false);
    std::optional<Dropout> dropout;
    if (training) dropout.emplace(cfg_.dropout, dropout_seed);
    std::vector<Tensor> out;
    for (const Var& v : encoder::encode(graph, bound, layout_, cfg_, seq,
                                        dropout ? &*dropout : nullptr)) {
      out.push_back(v.value());
    }
    return out;
  }

 private:
  EncoderConfig cfg_;
  ParameterList params_;
  EncoderLayout layout_;
};

}  // namespace s2sent::encoder
