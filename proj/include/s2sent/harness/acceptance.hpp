#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "s2sent/harness/experiment.hpp"
#include "s2sent/numerics/gradcheck.hpp"

// Acceptance checks. Each returns a verdict plus a one-line detail string;
// run_acceptance prints "PASS|FAIL <id> <name> (<seconds>s) <detail>".
namespace s2sent::harness::acceptance {

struct Verdict {
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

inline std::vector<Tensor> random_blocks(std::size_t n, std::size_t l, std::size_t d, SplitMix64& rng,
                                         double lo = -2.0, double hi = 2.0) {
  std::vector<Tensor> blocks;
  for (std::size_t i = 0; i < n; ++i) blocks.push_back(uniform_tensor({l, d}, lo, hi, rng));
  return blocks;
}

inline std::size_t between(SplitMix64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

}  // namespace detail

/// m = 1 frequency squeeze vs N*L times the average squeeze.
inline Verdict gap_dct_equivalence(std::size_t trials = 1000) {
  SplitMix64 rng(0x6a9);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = detail::between(rng, 1, 4), l = detail::between(rng, 1, 16),
                      d = detail::between(rng, 1, 32);
    const auto blocks = detail::random_blocks(n, l, d, rng);
    const HiddenStack stack = stack_blocks(blocks);
    const Tensor fs = spectral::fs_squeeze(stack, spectral::select_low_frequencies(n, l, 1));
    const Tensor gap = spectral::gap_squeeze(stack);
    for (std::size_t i = 0; i < d; ++i) {
      worst = std::max(worst, std::abs(fs[i] - static_cast<double>(n * l) * gap[i]));
    }
  }
  return {worst <= 1e-10, "max abs diff " + detail::fmt(worst) + " over " + std::to_string(trials) + " stacks"};
}

inline Verdict dct_roundtrip(std::size_t trials = 1000) {
  SplitMix64 rng(0xdc7);
  double worst_rt = 0.0, worst_energy = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = detail::between(rng, 1, 8), l = detail::between(rng, 1, 16);
    const Tensor x = uniform_tensor({n, l}, -2.0, 2.0, rng);
    worst_rt = std::max(worst_rt, max_abs_diff(spectral::dct_roundtrip_oracle(x), x));
    const Tensor c = spectral::dct2_orthonormal(x);
    double ex = 0.0, ec = 0.0;
    for (double v : x.data()) ex += v * v;
    for (double v : c.data()) ec += v * v;
    worst_energy = std::max(worst_energy, std::abs(ex - ec));
  }
  return {worst_rt <= 1e-10 && worst_energy <= 1e-8,
          "roundtrip " + detail::fmt(worst_rt) + ", energy " + detail::fmt(worst_energy)};
}

inline Verdict selection_weight_laws(std::size_t trials = 1000) {
  SplitMix64 rng(0x5e1);
  static constexpr std::size_t widths[] = {4, 8, 16, 32};
  double worst_sum = 0.0, worst_ratio = 0.0, hull_excess = 0.0;
  bool open_interval = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = detail::between(rng, 1, 4), l = detail::between(rng, 1, 8);
    const std::size_t d = widths[rng.below(4)];
    const std::size_t r = std::size_t{1} << rng.below(3);  // 1, 2, 4 all divide d
    std::size_t m = std::size_t{1} << rng.below(3);
    while (d % m != 0) m /= 2;
    const auto blocks = detail::random_blocks(n, l, d, rng);
    const auto params = selector::init_selector(d, r, n, rng);
    const auto plan = spectral::plan_for_grid(n, l, m);
    const auto fused = selector::ss_forward_2d(blocks, params, plan);
    for (std::size_t j = 0; j < d; ++j) {
      double sum = 0.0, lo = INFINITY, hi = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = fused.weights(i, j);
        open_interval = open_interval && w > 0.0 && (n == 1 ? w == 1.0 : w < 1.0);
        sum += w;
        lo = std::min(lo, w);
        hi = std::max(hi, w);
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      worst_ratio = std::max(worst_ratio, hi / lo);
      for (std::size_t k = 0; k < l; ++k) {
        double bmin = INFINITY, bmax = -INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
          bmin = std::min(bmin, blocks[i](k, j));
          bmax = std::max(bmax, blocks[i](k, j));
        }
        const double v = fused.v(k, j);
        hull_excess = std::max({hull_excess, bmin - v, v - bmax});
      }
    }
  }
  const bool pass = worst_sum <= 1e-12 && hull_excess <= 0.0 && worst_ratio < std::exp(1.0) && open_interval;
  return {pass, "sum err " + detail::fmt(worst_sum) + ", hull excess " + detail::fmt(hull_excess) +
                    ", max ratio " + detail::fmt(worst_ratio, 6)};
}

inline training::ModelConfig micro_model_config() {
  training::ModelConfig cfg;
  cfg.encoder.vocab_size = 32;
  cfg.encoder.depth = 2;
  cfg.encoder.width = 8;
  cfg.encoder.heads = 2;
  cfg.encoder.ffn_mult = 2;
  cfg.encoder.max_len = 3;
  cfg.fusion.variant = selector::Variant::ss2d;
  cfg.fusion.n_blocks = 2;
  cfg.fusion.freqs = 2;
  cfg.fusion.reduction = 2;
  return cfg;
}

/// Whole-pipeline gradient check: InfoNCE over average-pooled spatial
/// selection of a 2-block encoder, B = 2, L = 3.
inline Verdict pipeline_gradients(std::size_t instances = 20, double step = 1e-5) {
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    training::SentenceModel model(micro_model_config(), 1000 + inst);
    const std::vector<encoder::TokenSequence> batch = {
        model.prepare("w" + std::to_string(inst) + " alpha beta"),
        model.prepare("gamma w" + std::to_string(inst + 7) + " delta")};
    const std::uint64_t step_seed = derive_seed(inst, {0x9c});
    Graph graph;
    const auto bound = model.parameters().bind(graph, true);
    const Gradients grads = graph.backward(training::batch_loss(model, bound, batch, 0.05, step_seed));
    ParameterList& params = model.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
      const Tensor original = params[k];
      auto loss_at = [&](const Tensor& probe) {
        params[k] = probe;
        Graph g;
        const auto b = model.parameters().bind(g, false);
        return training::batch_loss(model, b, batch, 0.05, step_seed).value().item();
      };
      const Tensor numeric = finite_difference_gradient(loss_at, original, step);
      params[k] = original;
      worst = std::max(worst, max_relative_error(grads.at(bound[k].id), numeric));
      checked += original.size();
    }
  }
  return {worst < 1e-4, "max rel err " + detail::fmt(worst) + " over " + std::to_string(checked) + " coordinates"};
}

inline Verdict gradient_flow_differentiation(std::size_t instances = 20) {
  bool average_exact = true;
  double min_variation = INFINITY;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    SplitMix64 rng(derive_seed(0xf10, {inst}));
    const std::size_t n = 2 + inst % 3, l = 3 + inst % 4, d = 8;
    const auto blocks = detail::random_blocks(n, l, d, rng);
    const auto plan = spectral::plan_for_grid(n, l, 2);
    // A fully dead ReLU bottleneck leaves every gate at 0.5, the same
    // degenerate point as W1 = 0; redraw until some gate moves.
    const Tensor f = spectral::fs_squeeze(stack_blocks(blocks), plan);
    auto degenerate = [&](const selector::SelectorParams& p) {
      for (const Tensor& e : selector::excite(f, p))
        for (double v : e.data())
          if (v != 0.5) return false;
      return true;
    };
    selector::SelectorParams params;
    do {
      params = selector::init_selector(d, 2, n, rng);
    } while (degenerate(params));
    const auto avg = selector::gradient_flow_diagnostic(blocks, params, plan, selector::FlowFusion::average);
    const double expected = 1.0 / static_cast<double>(n);
    for (const auto& b : avg.blocks) {
      average_exact = average_exact && b.direct_weight == expected;
      for (double g : b.gradient.data()) average_exact = average_exact && g == expected;
    }
    const auto ss =
        selector::gradient_flow_diagnostic(blocks, params, plan, selector::FlowFusion::spatial_selection);
    min_variation = std::min(min_variation, ss.norm_variation());
  }
  return {average_exact && min_variation > 1e-6,
          std::string("average coefficients exact: ") + (average_exact ? "yes" : "no") +
              ", min SS norm CV " + detail::fmt(min_variation)};
}

inline Verdict parameter_audit_bound() {
  constexpr std::size_t D = 768, backbone = 110'000'000;
  double worst = 0.0;
  bool formula = true;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t r = 12; r <= D; ++r) {
      if (D % r != 0) continue;
      const auto a = selector::parameter_audit(D, r, n, backbone);
      formula = formula && a.count == D * D / r * (1 + n);
      worst = std::max(worst, a.ratio);
    }
  }
  return {formula && worst <= 0.0034,
          "max ratio " + detail::fmt(100.0 * worst) + "% (N=6, r=12: " +
              std::to_string(selector::parameter_audit(D, 12, 6, backbone).count) + " params)"};
}

// ---------------------------------------------------------------------------
// Desk-scale experiment shared by the ordering and pooling checks.

struct DeskResult {
  std::vector<double> avg, ss_m4, ss_m1, ss_m4_first;
};

inline ExperimentConfig desk_config() {
  ExperimentConfig cfg;
  cfg.seeds = 7;
  cfg.steps = 1000;
  cfg.eval_every = 0;
  cfg.train_sentences = 2000;
  cfg.eval_pairs = 500;
  cfg.dev_pairs = 0;
  return cfg;
}

inline DeskResult run_desk(const ExperimentConfig& cfg, std::ostream* progress) {
  const ExperimentData data = load_data(cfg);
  auto series = [&](RunSpec spec) {
    std::vector<double> out;
    for (std::uint64_t seed : cfg.seed_list()) {
      const RunRecord r = run_single(cfg, spec, seed, data);
      if (progress) *progress << "  " << spec.label() << " seed " << seed << " spearman " << r.spearman << std::endl;
      out.push_back(r.spearman);
    }
    return out;
  };
  using selector::Variant;
  using training::Pooling;
  DeskResult d;
  d.avg = series({Variant::avg, 3, 0, 0, Pooling::avg});
  d.ss_m4 = series({Variant::ss2d, 3, 4, 16, Pooling::avg});
  d.ss_m1 = series({Variant::ss2d, 3, 1, 16, Pooling::avg});
  d.ss_m4_first = series({Variant::ss2d, 3, 4, 16, Pooling::first});
  return d;
}

inline Verdict desk_ordering(const DeskResult& d) {
  const auto t = paired_t_test(d.ss_m4, d.avg);
  const auto fs = paired_t_test(d.ss_m4, d.ss_m1);
  const bool pass = mean(d.ss_m4) >= mean(d.avg) && t.p_two_sided < 0.05 && mean(d.ss_m4) >= mean(d.ss_m1);
  return {pass, "2d " + detail::fmt(mean(d.ss_m4), 6) + " vs avg " + detail::fmt(mean(d.avg), 6) +
                    " (p=" + detail::fmt(t.p_two_sided) + "); m1 " + detail::fmt(mean(d.ss_m1), 6) +
                    " (p=" + detail::fmt(fs.p_two_sided) + ")"};
}

inline Verdict desk_pooling(const DeskResult& d) {
  const auto t = paired_t_test(d.ss_m4, d.ss_m4_first);
  return {mean(d.ss_m4_first) < mean(d.ss_m4),
          "first " + detail::fmt(mean(d.ss_m4_first), 6) + " vs avg " + detail::fmt(mean(d.ss_m4), 6) +
              " (p=" + detail::fmt(t.p_two_sided) + ")"};
}

inline ExperimentConfig determinism_config() {
  ExperimentConfig cfg;
  cfg.variants = {selector::Variant::avg, selector::Variant::ss2d};
  cfg.seeds = 2;
  cfg.steps = 40;
  cfg.eval_every = 20;
  cfg.train_sentences = 200;
  cfg.eval_pairs = 60;
  cfg.dev_pairs = 20;
  return cfg;
}

inline Verdict determinism() {
  const ExperimentConfig cfg = determinism_config();
  const json first = strip_timing(to_json(run_experiment(cfg)));
  const json second = strip_timing(to_json(run_experiment(cfg)));
  const bool same_report = first.dump() == second.dump();

  const ExperimentData data = load_data(cfg);
  training::SentenceModel model(model_config(cfg, expand_grid(cfg).back()), 5);
  training::train(model, data.train, cfg.train_config(5));
  const double before = evaluate(model, data.eval);
  std::stringstream buf;
  encoder::write_checkpoint(buf, model.parameters());
  training::SentenceModel restored(model.config(), 99);
  encoder::read_checkpoint(buf, restored.parameters());
  const double after = evaluate(restored, data.eval);
  const bool same_score = std::bit_cast<std::uint64_t>(before) == std::bit_cast<std::uint64_t>(after);
  return {same_report && same_score, std::string("report identical: ") + (same_report ? "yes" : "no") +
                                         ", checkpoint score " + detail::fmt(before, 17) + " -> " +
                                         detail::fmt(after, 17)};
}

struct Options {
  bool skip_desk = false;  ///< skip the 30-minute desk-scale experiment (7, 8)
  ExperimentConfig desk = desk_config();
};

/// Runs every check, printing one line each. Returns true when all pass.
inline bool run_acceptance(std::ostream& os, const Options& opt = {}, std::ostream* progress = nullptr) {
  bool all = true;
  auto report = [&](int id, const std::string& name, double budget, const std::function<Verdict()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= budget;
    if (!in_time) v.detail += "; over the " + detail::fmt(budget) + "s budget";
    v.pass = v.pass && in_time;
    all = all && v.pass;
    os << (v.pass ? "PASS" : "FAIL") << ' ' << id << ' ' << name << " (" << detail::fmt(secs, 3) << "s) "
       << v.detail << std::endl;
  };
  report(1, "gap-dct-equivalence", 5, [] { return gap_dct_equivalence(); });
  report(2, "dct-roundtrip-parseval", 5, [] { return dct_roundtrip(); });
  report(3, "selection-weight-laws", 10, [] { return selection_weight_laws(); });
  report(4, "pipeline-gradients", 120, [] { return pipeline_gradients(); });
  report(5, "gradient-flow-differentiation", 30, [] { return gradient_flow_differentiation(); });
  report(6, "parameter-audit", 1, [] { return parameter_audit_bound(); });
  if (opt.skip_desk) {
    os << "SKIP 7 desk-ordering\nSKIP 8 desk-pooling" << std::endl;
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    DeskResult desk;
    std::string failure;
    try {
      desk = run_desk(opt.desk, progress);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto timed = [&](const std::function<Verdict(const DeskResult&)>& fn) {
      return [&, fn] {
        if (!failure.empty()) return Verdict{false, "exception: " + failure};
        Verdict v = fn(desk);
        v.detail += "; experiment " + detail::fmt(secs, 4) + "s";
        v.pass = v.pass && secs <= 1800.0;
        return v;
      };
    };
    report(7, "desk-ordering", 1800, timed(desk_ordering));
    report(8, "desk-pooling", 1800, timed(desk_pooling));
  }
  report(9, "determinism", 300, [] { return determinism(); });
  return all;
}

}  // namespace s2sent::harness::acceptance
