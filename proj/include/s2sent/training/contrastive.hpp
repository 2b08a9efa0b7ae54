#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "s2sent/numerics/ops.hpp"
#include "s2sent/training/model.hpp"

namespace s2sent::training {

struct TrainConfig {
  double learning_rate = 3e-3;
  std::size_t batch_size = 16;
  double temperature = 0.05;
  std::size_t steps = 1000;
  std::size_t eval_every = 125;
  std::uint64_t seed = 0;

  void validate() const {
    require(learning_rate >= 0.0, "train: learning_rate must be non-negative");
    require(temperature > 0.0, "train: temperature must be positive");
    require(batch_size >= 1, "train: batch_size must be at least 1");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  require(na > 0.0 && nb > 0.0, "cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

inline double cosine_similarity(const Tensor& a, const Tensor& b) {
  return cosine_similarity(a.data(), b.data());
}

/// In-batch InfoNCE over stacked anchors and positives [B x D]: mean over i
/// of -log softmax_k(cos(a_i, p_k) / tau) at k = i.
inline Var info_nce_loss(Var anchors, Var positives, double temperature) {
  require(temperature > 0.0, "info_nce_loss: temperature must be positive");
  if (anchors.shape() != positives.shape()) {
    throw DimensionError("info_nce_loss: anchors " + shape_string(anchors.shape()) +
                         " vs positives " + shape_string(positives.shape()));
  }
  const Var sims = ag::matmul_nt(ag::normalize_rows(anchors), ag::normalize_rows(positives));
  return ag::cross_entropy_diagonal(ag::scale(sims, 1.0 / temperature));
}

inline double info_nce_loss(std::span<const Tensor> anchors, std::span<const Tensor> positives,
                            double temperature) {
  require(!anchors.empty(), "info_nce_loss: empty batch");
  Graph g;
  std::vector<Var> a, p;
  for (const Tensor& t : anchors) a.push_back(g.constant_ref(t));
  for (const Tensor& t : positives) p.push_back(g.constant_ref(t));
  return info_nce_loss(ag::stack_rows(a), ag::stack_rows(p), temperature).value().item();
}

/// Contrastive loss of a batch: every sentence is embedded twice under
/// independent dropout draws seeded from (step_seed, item, pass).
inline Var batch_loss(const SentenceModel& model, std::span<const Var> bound,
                      std::span<const encoder::TokenSequence> batch, double temperature,
                      std::uint64_t step_seed) {
  require(!batch.empty(), "batch_loss: empty batch");
  Graph& graph = *bound.front().graph;
  std::vector<Var> anchors, positives;
  const double rate = model.config().encoder.dropout;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    encoder::Dropout first(rate, derive_seed(step_seed, {i, 0}));
    encoder::Dropout second(rate, derive_seed(step_seed, {i, 1}));
    anchors.push_back(model.embed(graph, bound, batch[i], &first));
    positives.push_back(model.embed(graph, bound, batch[i], &second));
  }
  return info_nce_loss(ag::stack_rows(anchors), ag::stack_rows(positives), temperature);
}

/// One update: batch_loss, backward, and every parameter moves by
/// -learning_rate * gradient. Returns the loss before the update.
inline double train_step(SentenceModel& model, std::span<const encoder::TokenSequence> batch,
                         const TrainConfig& cfg, std::uint64_t step_seed) {
  require(!batch.empty(), "train_step: empty batch");
  cfg.validate();
  Graph graph;
  ParameterList& params = model.parameters();
  const std::vector<Var> bound = params.bind(graph, true);
  const Var loss = batch_loss(model, bound, batch, cfg.temperature, step_seed);
  const double value = loss.value().item();
  const Gradients grads = graph.backward(loss);
  if (cfg.learning_rate > 0.0) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      const Tensor& g = grads.at(bound[k].id);
      Tensor& w = params[k];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * g[i];
    }
  }
  return value;
}

struct TrainLogEntry {
  std::size_t step = 0;
  double loss = 0.0;
  double dev_spearman = 0.0;

  friend bool operator==(const TrainLogEntry&, const TrainLogEntry&) = default;
};

/// Runs cfg.steps updates over shuffled epochs of `sentences`. When an
/// evaluator is given it is called every cfg.eval_every steps.
inline std::vector<TrainLogEntry> train(SentenceModel& model, std::span<const std::string> sentences,
                                        const TrainConfig& cfg,
                                        const std::function<double()>& evaluator = {},
                                        std::vector<double>* losses = nullptr) {
  cfg.validate();
  std::vector<TrainLogEntry> log;
  if (cfg.steps == 0) return log;
  require(!sentences.empty(), "train: no training sentences");
  std::vector<encoder::TokenSequence> tokens;
  tokens.reserve(sentences.size());
  for (const std::string& s : sentences) tokens.push_back(model.prepare(s));

  SplitMix64 order_rng(derive_seed(cfg.seed, {0x5eed}));
  std::vector<std::size_t> order(tokens.size());
  std::size_t cursor = order.size();
  std::vector<encoder::TokenSequence> batch;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    batch.clear();
    while (batch.size() < cfg.batch_size) {
      if (cursor == order.size()) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle(order, order_rng);
        cursor = 0;
      }
      batch.push_back(tokens[order[cursor++]]);
      if (batch.size() == tokens.size()) break;
    }
    const double loss = train_step(model, batch, cfg, derive_seed(cfg.seed, {0xd20, step}));
    if (losses) losses->push_back(loss);
    if (cfg.eval_every > 0 && (step % cfg.eval_every == 0 || step == cfg.steps)) {
      log.push_back({step, loss, evaluator ? evaluator() : 0.0});
    }
  }
  return log;
}

}  // namespace s2sent::training
