#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "s2sent/encoder/checkpoint.hpp"
#include "s2sent/harness/config.hpp"
#include "s2sent/harness/report.hpp"

namespace s2sent::harness {

/// `eval` concatenates the evaluation sets; `sets` records where each one
/// starts so runs can be scored per dataset.
struct ExperimentData {
  std::vector<std::string> train;
  std::vector<SentencePairRecord> eval;
  std::vector<SentencePairRecord> dev;
  std::vector<std::string> set_names;
  std::vector<std::size_t> set_offsets;
};

inline std::vector<std::string> load_sentences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string s = detail::trim(line);
    if (!s.empty()) out.push_back(std::move(s));
  }
  if (out.empty()) throw DataError(path.string() + " holds no sentences");
  return out;
}

/// Synthetic sets unless files are configured. User-supplied evaluation
/// files also provide the dev pairs (leading rows of the first file) and,
/// without a separate training file, the unlabelled training sentences.
inline ExperimentData load_data(const ExperimentConfig& cfg) {
  ExperimentData d;
  if (cfg.data.empty()) {
    d.eval = synth_corpus(cfg.eval_pairs, derive_seed(cfg.data_seed, {1}));
    d.set_names = {"synthetic"};
    d.set_offsets = {0};
    if (cfg.dev_pairs >= 2) d.dev = synth_corpus(cfg.dev_pairs, derive_seed(cfg.data_seed, {2}));
  } else {
    for (const std::string& path : cfg.data) {
      const auto pairs = load_pairs_tsv(path);
      if (pairs.size() < 2) throw DataError(path + ": need at least two pairs");
      d.set_names.push_back(path);
      d.set_offsets.push_back(d.eval.size());
      d.eval.insert(d.eval.end(), pairs.begin(), pairs.end());
    }
    const std::size_t first = d.set_offsets.size() > 1 ? d.set_offsets[1] : d.eval.size();
    const std::size_t n = std::min(cfg.dev_pairs, first);
    if (n >= 2) d.dev.assign(d.eval.begin(), d.eval.begin() + static_cast<std::ptrdiff_t>(n));
  }
  if (!cfg.train_data.empty()) {
    d.train = load_sentences(cfg.train_data);
  } else if (!cfg.data.empty()) {
    for (const auto& p : d.eval) {
      d.train.push_back(p.sentence_a);
      d.train.push_back(p.sentence_b);
    }
  } else {
    d.train = synth_sentences(cfg.train_sentences, derive_seed(cfg.data_seed, {0}));
  }
  return d;
}

/// Spearman per evaluation set, given similarities over the concatenation.
inline std::vector<DatasetScore> score_sets(const ExperimentData& data, const std::vector<double>& sims) {
  std::vector<DatasetScore> out;
  for (std::size_t s = 0; s < data.set_offsets.size(); ++s) {
    const std::size_t lo = data.set_offsets[s];
    const std::size_t hi = s + 1 < data.set_offsets.size() ? data.set_offsets[s + 1] : data.eval.size();
    std::vector<double> gold;
    for (std::size_t i = lo; i < hi; ++i) gold.push_back(data.eval[i].gold_score);
    const std::vector<double> part(sims.begin() + static_cast<std::ptrdiff_t>(lo),
                                   sims.begin() + static_cast<std::ptrdiff_t>(hi));
    out.push_back({data.set_names[s], spearman(part, gold)});
  }
  return out;
}

/// Unweighted mean over datasets, whatever their sizes.
inline double mean_score(const std::vector<DatasetScore>& scores) {
  double total = 0.0;
  for (const auto& s : scores) total += s.spearman;
  return total / static_cast<double>(scores.size());
}

/// Grid points in (variant, blocks, freqs, reduction, pooling) order. Axes a
/// variant does not use are recorded as 0 and collapse to one point.
inline std::vector<RunSpec> expand_grid(const ExperimentConfig& cfg) {
  std::vector<RunSpec> out;
  for (auto v : cfg.variants)
    for (auto k : cfg.blocks)
      for (auto m : cfg.freqs)
        for (auto r : cfg.reductions)
          for (auto p : cfg.poolings) {
            RunSpec s{v, k, m, r, p};
            if (v == selector::Variant::avg || v == selector::Variant::token_gate) s.freqs = s.reduction = 0;
            if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
          }
  return out;
}

inline training::ModelConfig model_config(const ExperimentConfig& cfg, const RunSpec& spec) {
  training::ModelConfig m;
  m.encoder = cfg.encoder;
  m.fusion.variant = spec.variant;
  m.fusion.n_blocks = spec.blocks;
  m.fusion.freqs = std::max<std::size_t>(spec.freqs, 1);
  m.fusion.reduction = std::max<std::size_t>(spec.reduction, 1);
  m.fusion.bottleneck = cfg.bottleneck;
  m.pooling = spec.pooling;
  return m;
}

inline FlowRecord flow_record(const training::SentenceModel& model, const std::string& sentence) {
  const auto& f = model.config().fusion;
  const std::vector<Tensor> all = model.block_outputs(model.prepare(sentence));
  const std::vector<Tensor> last(all.end() - static_cast<std::ptrdiff_t>(f.n_blocks), all.end());
  const bool ss = f.variant == selector::Variant::ss2d;
  selector::SelectorParams p;
  if (ss) p = model.selector_params();
  const auto plan = spectral::plan_for_grid(last.size(), last.front().dim(0), f.freqs);
  const auto flow = selector::gradient_flow_diagnostic(
      last, p, plan, ss ? selector::FlowFusion::spatial_selection : selector::FlowFusion::average);
  FlowRecord r;
  r.fusion = ss ? "spatial_selection" : "average";
  for (const auto& b : flow.blocks) {
    r.direct_weights.push_back(b.direct_weight);
    r.gradient_norms.push_back(b.gradient_norm);
  }
  r.norm_variation = flow.norm_variation();
  return r;
}

inline void write_train_log(std::ostream& os, const std::vector<training::TrainLogEntry>& log) {
  os << "step\tloss\tdev_spearman\n";
  os.precision(17);
  for (const auto& e : log) os << e.step << '\t' << e.loss << '\t' << e.dev_spearman << '\n';
}

/// Train, evaluate and audit one (grid point, seed). Writes the training log
/// and checkpoint under out_dir when it is non-empty.
inline RunRecord run_single(const ExperimentConfig& cfg, const RunSpec& spec, std::uint64_t seed,
                            const ExperimentData& data, const std::string& out_dir = "") {
  training::SentenceModel model(model_config(cfg, spec), seed);
  RunRecord r;
  r.spec = spec;
  r.seed = seed;
  r.untrained_spearman = mean_score(score_sets(data, pair_similarities(model, data.eval)));
  std::vector<double> losses;
  std::function<double()> dev_eval;
  if (data.dev.size() >= 2) dev_eval = [&] { return evaluate(model, data.dev); };
  const auto t0 = std::chrono::steady_clock::now();
  r.log = training::train(model, data.train, cfg.train_config(seed), dev_eval, &losses);
  r.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.final_loss = losses.empty() ? 0.0 : losses.back();

  const std::vector<double> sims = pair_similarities(model, data.eval);
  r.datasets = score_sets(data, sims);
  r.spearman = mean_score(r.datasets);
  r.density = density_from_similarities(sims, data.eval, cfg.density_bins);

  r.param_count = model.head_parameter_count();
  r.param_ratio = static_cast<double>(r.param_count) / static_cast<double>(model.backbone_parameter_count());
  if (spec.variant == selector::Variant::ss1d || spec.variant == selector::Variant::ss2d) {
    const std::size_t rows = spec.variant == selector::Variant::ss2d ? spec.blocks : 1;
    for (const auto& p : data.eval) {
      for (const std::string* s : {&p.sentence_a, &p.sentence_b}) {
        if (rows * model.prepare(*s).size() < spec.freqs) ++r.clamped_plans;
      }
    }
  }
  r.gradient_flow = flow_record(model, data.eval.front().sentence_a);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string stem = out_dir + "/" + spec.label() + "-s" + std::to_string(seed);
    std::ofstream log(stem + ".log.tsv");
    write_train_log(log, r.log);
    encoder::save_checkpoint(stem + ".ckpt", model.parameters());
  }
  return r;
}

/// Every grid point x every seed; runs go to `cfg.workers` threads and are
/// reported in grid-then-seed order regardless of completion order.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr) {
  cfg.validate();
  const ExperimentData data = load_data(cfg);
  const std::vector<RunSpec> grid = expand_grid(cfg);
  const std::vector<std::uint64_t> seeds = cfg.seed_list();

  ExperimentReport report;
  report.config = config_to_json(cfg);
  report.seeds = seeds;
  report.runs.resize(grid.size() * seeds.size());

  std::atomic<std::size_t> next{0};
  std::mutex io;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t job; (job = next++) < report.runs.size();) {
      const RunSpec& spec = grid[job / seeds.size()];
      const std::uint64_t seed = seeds[job % seeds.size()];
      try {
        report.runs[job] = run_single(cfg, spec, seed, data, cfg.out);
      } catch (...) {
        std::lock_guard lock(io);
        if (!failure) failure = std::current_exception();
        next = report.runs.size();
        return;
      }
      if (progress) {
        std::lock_guard lock(io);
        *progress << spec.label() << " seed " << seed << " spearman " << report.runs[job].spearman << '\n';
      }
    }
  };
  const std::size_t n_threads = std::min(cfg.workers, report.runs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<std::string> latency_sentences;
  for (std::size_t i = 0; i < data.eval.size() && latency_sentences.size() < 32; ++i) {
    latency_sentences.push_back(data.eval[i].sentence_a);
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    GroupSummary s;
    s.spec = grid[g];
    s.seeds = seeds;
    for (std::size_t i = 0; i < seeds.size(); ++i) s.spearman.push_back(report.runs[g * seeds.size() + i].spearman);
    s.mean = mean(s.spearman);
    s.std = sample_std(s.spearman);
    if (cfg.latency_reps > 0) {
      const training::SentenceModel model(model_config(cfg, grid[g]), cfg.base_seed);
      s.has_latency = true;
      s.latency = latency_bench(model, latency_sentences, cfg.latency_reps);
    }
    report.groups.push_back(std::move(s));
  }
  return report;
}

inline const GroupSummary* find_group(const ExperimentReport& r, const RunSpec& spec) {
  for (const auto& g : r.groups)
    if (g.spec == spec) return &g;
  return nullptr;
}

}  // namespace s2sent::harness
