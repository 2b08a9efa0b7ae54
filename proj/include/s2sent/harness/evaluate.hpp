#pragma once

#include <algorithm>
#include <chrono>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "s2sent/harness/data.hpp"
#include "s2sent/harness/stats.hpp"
#include "s2sent/training/contrastive.hpp"

namespace s2sent::harness {

/// Inference-mode cosine similarity of each pair.
inline std::vector<double> pair_similarities(const training::SentenceModel& model,
                                             std::span<const SentencePairRecord> pairs) {
  std::vector<std::string> sentences;
  sentences.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    sentences.push_back(p.sentence_a);
    sentences.push_back(p.sentence_b);
  }
  const std::vector<Tensor> emb = model.embed_all(sentences);
  std::vector<double> sims(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    sims[i] = training::cosine_similarity(emb[2 * i], emb[2 * i + 1]);
  }
  return sims;
}

/// Spearman correlation between model cosines and gold scores.
inline double evaluate(const training::SentenceModel& model, std::span<const SentencePairRecord> pairs) {
  require(pairs.size() >= 2, "evaluate: need at least two pairs");
  std::vector<double> gold(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) gold[i] = pairs[i].gold_score;
  return spearman(pair_similarities(model, pairs), gold);
}

// ---------------------------------------------------------------------------

struct LatencyReport {
  double baseline_ns = 0.0;       ///< last block, average pooling
  double with_selector_ns = 0.0;  ///< configured fusion head
  double ratio = 0.0;             ///< with_selector / baseline
  std::size_t repetitions = 0;

  friend bool operator==(const LatencyReport&, const LatencyReport&) = default;
};

inline constexpr std::size_t kMinLatencyRepetitions = 30;

namespace detail {

template <typename F>
double median_ns_per_item(F&& pass, std::size_t items, std::size_t repetitions, std::size_t warmup) {
  using clock = std::chrono::steady_clock;
  for (std::size_t w = 0; w < warmup; ++w) pass();
  std::vector<double> samples(repetitions);
  for (auto& s : samples) {
    const auto t0 = clock::now();
    pass();
    const auto t1 = clock::now();
    s = std::chrono::duration<double, std::nano>(t1 - t0).count() / static_cast<double>(items);
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  return samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
}

}  // namespace detail

/// Median inference time per sentence with and without the fusion head.
inline LatencyReport latency_bench(const training::SentenceModel& model,
                                   std::span<const std::string> sentences,
                                   std::size_t repetitions = kMinLatencyRepetitions,
                                   std::size_t warmup = 3) {
  require(!sentences.empty(), "latency_bench: no sentences");
  require(repetitions >= kMinLatencyRepetitions,
          "latency_bench: at least " + std::to_string(kMinLatencyRepetitions) + " repetitions required");
  std::vector<encoder::TokenSequence> seqs;
  for (const auto& s : sentences) seqs.push_back(model.prepare(s));
  double sink = 0.0;
  auto baseline = [&] {
    Graph g;
    const auto bound = model.parameters().bind(g, false);
    for (const auto& seq : seqs) sink += model.embed_last_block(g, bound, seq).value()[0];
  };
  auto selector = [&] {
    Graph g;
    const auto bound = model.parameters().bind(g, false);
    for (const auto& seq : seqs) sink += model.embed(g, bound, seq, nullptr).value()[0];
  };
  LatencyReport r;
  r.repetitions = repetitions;
  r.baseline_ns = detail::median_ns_per_item(baseline, seqs.size(), repetitions, warmup);
  r.with_selector_ns = detail::median_ns_per_item(selector, seqs.size(), repetitions, warmup);
  r.ratio = r.with_selector_ns / r.baseline_ns;
  if (!std::isfinite(sink)) r.ratio = std::nan("");
  return r;
}

// ---------------------------------------------------------------------------

inline constexpr std::size_t kGoldGroups = 5;

/// Histograms of pair cosines, one per gold group. Groups split the 0..5
/// gold scale into unit intervals ([4, 5] closed); bins split [-1, 1] evenly.
struct DensityExport {
  std::size_t bins = 0;
  std::vector<std::vector<std::size_t>> counts;  ///< [group][bin]

  std::size_t group_size(std::size_t g) const {
    std::size_t n = 0;
    for (std::size_t c : counts[g]) n += c;
    return n;
  }

  double bin_low(std::size_t b) const { return -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(bins); }
  double bin_high(std::size_t b) const { return bin_low(b + 1); }

  friend bool operator==(const DensityExport&, const DensityExport&) = default;
};

inline std::size_t gold_group(double gold) {
  if (!(gold > 0.0)) return 0;
  return std::min<std::size_t>(kGoldGroups - 1, static_cast<std::size_t>(gold));
}

inline std::size_t similarity_bin(double cosine, std::size_t bins) {
  const double u = (std::clamp(cosine, -1.0, 1.0) + 1.0) / 2.0;
  return std::min(bins - 1, static_cast<std::size_t>(u * static_cast<double>(bins)));
}

inline DensityExport density_from_similarities(std::span<const double> sims,
                                               std::span<const SentencePairRecord> pairs,
                                               std::size_t bins) {
  require(bins >= 2, "density_export: bins must be at least 2");
  require(sims.size() == pairs.size(), "density_export: one similarity per pair required");
  DensityExport out{bins, std::vector<std::vector<std::size_t>>(kGoldGroups, std::vector<std::size_t>(bins))};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ++out.counts[gold_group(pairs[i].gold_score)][similarity_bin(sims[i], bins)];
  }
  return out;
}

inline DensityExport density_export(const training::SentenceModel& model,
                                    std::span<const SentencePairRecord> pairs, std::size_t bins) {
  require(bins >= 2, "density_export: bins must be at least 2");
  return density_from_similarities(pair_similarities(model, pairs), pairs, bins);
}

/// Long-form TSV: group, gold range, bin range, count.
inline void write_density_tsv(std::ostream& os, const DensityExport& d) {
  os << "group\tgold_low\tgold_high\tbin_low\tbin_high\tcount\n";
  for (std::size_t g = 0; g < d.counts.size(); ++g) {
    for (std::size_t b = 0; b < d.bins; ++b) {
      os << g << '\t' << g << '\t' << g + 1 << '\t' << d.bin_low(b) << '\t' << d.bin_high(b) << '\t'
         << d.counts[g][b] << '\n';
    }
  }
}

}  // namespace s2sent::harness
