#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s2sent/encoder/encoder.hpp"
#include "s2sent/selector/fusion.hpp"

namespace s2sent::training {

enum class Pooling { avg, first };

inline std::string_view to_string(Pooling p) { return p == Pooling::avg ? "avg" : "first"; }

inline Pooling parse_pooling(std::string_view name) {
  if (name == "avg") return Pooling::avg;
  if (name == "first") return Pooling::first;
  throw ContractError("unknown pooling '" + std::string(name) + "' (expected avg|first)");
}

struct ModelConfig {
  encoder::EncoderConfig encoder;
  selector::FusionConfig fusion;
  Pooling pooling = Pooling::avg;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Encoder, fusion head and pooling: text in, sentence embedding [D] out.
class SentenceModel {
 public:
  SentenceModel(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.encoder.validate();
    require(cfg_.fusion.n_blocks <= cfg_.encoder.depth,
            "model: Last" + std::to_string(cfg_.fusion.n_blocks) + " exceeds encoder depth " +
                std::to_string(cfg_.encoder.depth));
    SplitMix64 enc_rng(derive_seed(seed, {1}));
    encoder_layout_ = encoder::add_encoder_parameters(params_, cfg_.encoder, enc_rng);
    backbone_tensors_ = params_.size();
    SplitMix64 head_rng(derive_seed(seed, {2}));
    fusion_layout_ = selector::add_fusion_parameters(params_, cfg_.fusion, cfg_.encoder.width, head_rng);
  }

  const ModelConfig& config() const { return cfg_; }
  ParameterList& parameters() { return params_; }
  const ParameterList& parameters() const { return params_; }

  std::size_t backbone_parameter_count() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < backbone_tensors_; ++i) total += params_[i].size();
    return total;
  }

  std::size_t head_parameter_count() const { return params_.scalar_count() - backbone_parameter_count(); }

  const selector::FusionLayout& fusion_layout() const { return fusion_layout_; }

  /// Current selector weights (1d and 2d variants only).
  selector::SelectorParams selector_params() const {
    require(cfg_.fusion.variant == selector::Variant::ss1d || cfg_.fusion.variant == selector::Variant::ss2d,
            "model: variant has no selector parameters");
    selector::SelectorParams p;
    p.w1 = params_[fusion_layout_.w1];
    for (std::size_t idx : fusion_layout_.w2) p.w2.push_back(params_[idx]);
    p.reduction = cfg_.fusion.reduction;
    p.bottleneck = cfg_.fusion.bottleneck;
    return p;
  }

  /// Inference-mode output of every encoder block.
  std::vector<Tensor> block_outputs(const encoder::TokenSequence& seq) const {
    Graph graph;
    const std::vector<Var> bound = params_.bind(graph, false);
    std::vector<Tensor> out;
    for (const Var& v : encoder::encode(graph, bound, encoder_layout_, cfg_.encoder, seq, nullptr)) {
      out.push_back(v.value());
    }
    return out;
  }

  /// Token ids for a sentence: hashed words, truncated to fit max_len, with
  /// the first-token id prepended under first-token pooling.
  encoder::TokenSequence prepare(std::string_view text) const {
    encoder::TokenSequence seq = encoder::tokenize(text, cfg_.encoder.vocab_size);
    const std::size_t room = cfg_.encoder.max_len - (cfg_.pooling == Pooling::first ? 1 : 0);
    require(room >= 1, "model: max_len leaves no room for tokens");
    if (seq.ids.size() > room) seq.ids.resize(room);
    if (cfg_.pooling == Pooling::first) seq = encoder::with_first_token(std::move(seq));
    return seq;
  }

  /// Fused [L x D] representation before pooling.
  Var represent(Graph& graph, std::span<const Var> bound, const encoder::TokenSequence& seq,
                encoder::Dropout* dropout) const {
    const std::vector<Var> blocks =
        encoder::encode(graph, bound, encoder_layout_, cfg_.encoder, seq, dropout);
    return selector::fuse(blocks, bound, fusion_layout_, cfg_.fusion);
  }

  /// Sentence embedding [D].
  Var embed(Graph& graph, std::span<const Var> bound, const encoder::TokenSequence& seq,
            encoder::Dropout* dropout) const {
    const Var v = represent(graph, bound, seq, dropout);
    return cfg_.pooling == Pooling::avg ? ag::mean_rows(v, seq.size()) : ag::row(v, 0);
  }

  /// Inference-mode embeddings, evaluated in chunks that share one binding.
  std::vector<Tensor> embed_all(std::span<const std::string> sentences) const {
    constexpr std::size_t kChunk = 64;
    std::vector<Tensor> out;
    out.reserve(sentences.size());
    for (std::size_t start = 0; start < sentences.size(); start += kChunk) {
      Graph graph;
      const std::vector<Var> bound = params_.bind(graph, false);
      const std::size_t end = std::min(sentences.size(), start + kChunk);
      for (std::size_t i = start; i < end; ++i) {
        out.push_back(embed(graph, bound, prepare(sentences[i]), nullptr).value());
      }
    }
    return out;
  }

  Tensor embed(std::string_view sentence) const {
    const std::string s(sentence);
    return embed_all(std::span<const std::string>(&s, 1)).front();
  }

  /// Embedding from the last block alone with average pooling: the
  /// selector-free baseline path.
  Var embed_last_block(Graph& graph, std::span<const Var> bound,
                       const encoder::TokenSequence& seq) const {
    const std::vector<Var> blocks =
        encoder::encode(graph, bound, encoder_layout_, cfg_.encoder, seq, nullptr);
    return ag::mean_rows(blocks.back(), seq.size());
  }

 private:
  ModelConfig cfg_;
  ParameterList params_;
  encoder::EncoderLayout encoder_layout_;
  selector::FusionLayout fusion_layout_;
  std::size_t backbone_tensors_ = 0;
};

}  // namespace s2sent::training
