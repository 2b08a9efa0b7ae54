// s2sent: train, evaluate and audit cross-block sentence-embedding fusion.
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "s2sent/harness/acceptance.hpp"

using namespace s2sent;
using harness::json;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds;
  std::vector<std::string> data;
  std::string out;
  std::string variant;
  std::optional<std::size_t> blocks, freqs, reduction;
  std::string checkpoint;
  std::string sentence;
  std::size_t bins = 0;
  std::size_t reps = harness::kMinLatencyRepetitions;
  std::optional<std::size_t> dim;
  std::optional<std::size_t> backbone;
  bool skip_desk = false;
};

harness::ExperimentConfig resolve(const Flags& f) {
  harness::ExperimentConfig c = f.config.empty() ? harness::ExperimentConfig{} : harness::load_config(f.config);
  try {
    if (!f.variant.empty()) c.variants = {selector::parse_variant(f.variant)};
  } catch (const ContractError& e) {
    throw harness::ConfigError(e.what());
  }
  if (f.blocks) c.blocks = {*f.blocks};
  if (f.freqs) c.freqs = {*f.freqs};
  if (f.reduction) c.reductions = {*f.reduction};
  if (f.seed) c.base_seed = *f.seed;
  if (f.seeds) c.seeds = *f.seeds;
  if (!f.data.empty()) c.data = f.data;
  c.validate();
  return c;
}

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw harness::ConfigError("cannot write " + path);
  return file;
}

training::SentenceModel build_model(const harness::ExperimentConfig& c, const Flags& f) {
  training::SentenceModel model(harness::model_config(c, harness::expand_grid(c).front()), c.base_seed);
  if (!f.checkpoint.empty()) encoder::load_checkpoint(f.checkpoint, model.parameters());
  return model;
}

json flow_json(const harness::FlowRecord& r) {
  return {{"fusion", r.fusion},
          {"direct_weights", r.direct_weights},
          {"gradient_norms", r.gradient_norms},
          {"norm_variation", r.norm_variation}};
}

int cmd_train(const Flags& f) {
  const auto c = resolve(f);
  const auto data = harness::load_data(c);
  const auto spec = harness::expand_grid(c).front();
  const auto rec = harness::run_single(c, spec, c.base_seed, data, f.out.empty() ? c.out : f.out);
  harness::write_train_log(std::cerr, rec.log);
  std::cout << harness::to_json(rec).dump(2) << '\n';
  return 0;
}

int cmd_eval(const Flags& f) {
  const auto c = resolve(f);
  const auto model = build_model(c, f);
  const auto data = harness::load_data(c);
  const auto scores = harness::score_sets(data, harness::pair_similarities(model, data.eval));
  std::cout << std::setprecision(17);
  if (scores.size() > 1)
    for (const auto& s : scores) std::cout << "spearman\t" << s.name << '\t' << s.spearman << '\n';
  std::cout << "spearman\t" << harness::mean_score(scores) << '\n';
  return 0;
}

int cmd_sweep(const Flags& f) {
  const auto c = resolve(f);
  const auto report = harness::run_experiment(c, &std::cerr);
  std::ofstream file;
  output(f.out, file) << harness::to_json(report).dump(2) << '\n';
  return 0;
}

int cmd_audit(const Flags& f) {
  const auto c = resolve(f);
  const auto spec = harness::expand_grid(c).front();
  const std::size_t D = f.dim.value_or(c.encoder.width);
  std::size_t backbone = 0;
  if (f.backbone) {
    backbone = *f.backbone;
  } else {
    backbone = training::SentenceModel(harness::model_config(c, spec), c.base_seed).backbone_parameter_count();
  }
  const std::size_t r = f.reduction.value_or(c.reductions.front());
  json rows = json::array();
  for (std::size_t n : c.blocks) {
    const auto a = selector::parameter_audit(D, r, n, backbone);
    rows.push_back({{"D", D}, {"r", r}, {"N", n}, {"backbone", backbone}, {"count", a.count}, {"ratio", a.ratio}});
  }
  std::cout << rows.dump(2) << '\n';
  return 0;
}

int cmd_bench(const Flags& f) {
  const auto c = resolve(f);
  const auto model = build_model(c, f);
  const auto data = harness::load_data(c);
  std::vector<std::string> sentences;
  for (std::size_t i = 0; i < data.eval.size() && sentences.size() < 32; ++i) sentences.push_back(data.eval[i].sentence_a);
  const auto r = harness::latency_bench(model, sentences, f.reps);
  std::cout << json{{"baseline_ns", r.baseline_ns},
                    {"with_selector_ns", r.with_selector_ns},
                    {"ratio", r.ratio},
                    {"repetitions", r.repetitions},
                    {"sentences", sentences.size()}}
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_diagnose(const Flags& f) {
  const auto c = resolve(f);
  const auto model = build_model(c, f);
  std::string sentence = f.sentence;
  if (sentence.empty()) sentence = harness::load_data(c).eval.front().sentence_a;
  const auto& fusion = model.config().fusion;
  const auto all = model.block_outputs(model.prepare(sentence));
  const std::vector<Tensor> last(all.end() - static_cast<std::ptrdiff_t>(fusion.n_blocks), all.end());
  SplitMix64 rng(derive_seed(c.base_seed, {0xd1a}));
  const auto params = fusion.variant == selector::Variant::ss2d
                          ? model.selector_params()
                          : selector::init_selector(c.encoder.width, fusion.reduction, last.size(), rng, fusion.bottleneck);
  const auto plan = spectral::plan_for_grid(last.size(), last.front().dim(0), fusion.freqs);
  auto record = [&](selector::FlowFusion kind) {
    const auto flow = selector::gradient_flow_diagnostic(last, params, plan, kind);
    harness::FlowRecord r;
    r.fusion = kind == selector::FlowFusion::average ? "average" : "spatial_selection";
    for (const auto& b : flow.blocks) {
      r.direct_weights.push_back(b.direct_weight);
      r.gradient_norms.push_back(b.gradient_norm);
    }
    r.norm_variation = flow.norm_variation();
    return flow_json(r);
  };
  std::cout << json{{"sentence", sentence},
                    {"blocks", last.size()},
                    {"trained_selector", fusion.variant == selector::Variant::ss2d},
                    {"average", record(selector::FlowFusion::average)},
                    {"spatial_selection", record(selector::FlowFusion::spatial_selection)}}
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_density(const Flags& f) {
  const auto c = resolve(f);
  const auto model = build_model(c, f);
  const auto data = harness::load_data(c);
  const auto d = harness::density_export(model, data.eval, f.bins ? f.bins : c.density_bins);
  std::ofstream file;
  harness::write_density_tsv(output(f.out, file), d);
  return 0;
}

int cmd_selftest(const Flags& f) {
  harness::acceptance::Options opt;
  opt.skip_desk = f.skip_desk;
  if (!f.config.empty()) opt.desk = resolve(f);
  if (f.seeds) opt.desk.seeds = *f.seeds;
  return harness::acceptance::run_acceptance(std::cout, opt, &std::cerr) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-block sentence-embedding fusion: training, evaluation and audits"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "Experiment config (JSON)");
  app.add_option("--seed", f.seed, "Base seed");
  app.add_option("--seeds", f.seeds, "Number of seeds");
  app.add_option("--data", f.data, "STS-style TSVs: sentence_a, sentence_b, score; one score each");
  app.add_option("--out", f.out, "Output path (file, or directory for train)");
  app.add_option("--variant", f.variant, "avg | 1d | 2d | token_gate");
  app.add_option("--blocks", f.blocks, "Last-k blocks to fuse");
  app.add_option("--freqs", f.freqs, "Frequency parts m");
  app.add_option("--reduction", f.reduction, "Reduction ratio r");

  auto* train = app.add_subcommand("train", "Train one model; checkpoint and log go to --out");
  auto* eval = app.add_subcommand("eval", "Spearman correlation of a model on the evaluation pairs");
  auto* sweep = app.add_subcommand("sweep", "Run the configured grid over all seeds; JSON report");
  auto* audit = app.add_subcommand("audit-params", "Selector parameter count and overhead ratio");
  auto* bench = app.add_subcommand("bench-latency", "Median inference time with and without the selector");
  auto* diag = app.add_subcommand("diagnose-gradients", "Per-block gradient flow, averaging vs selection");
  auto* density = app.add_subcommand("export-density", "Per-gold-group cosine histograms as TSV");
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance checks");

  for (auto* sub : {eval, bench, diag, density}) sub->add_option("--checkpoint", f.checkpoint, "Model checkpoint");
  density->add_option("--bins", f.bins, "Histogram bins over [-1, 1]")->check(CLI::Range(2, 1000));
  bench->add_option("--reps", f.reps, "Timed repetitions (>= 30)");
  diag->add_option("--sentence", f.sentence, "Sentence to diagnose");
  audit->add_option("--dim", f.dim, "Embedding dimension D (default: config width)");
  audit->add_option("--backbone-params", f.backbone, "Reference backbone size (default: this encoder)");
  selftest->add_flag("--skip-desk", f.skip_desk, "Skip the desk-scale training experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train) return cmd_train(f);
    if (*eval) return cmd_eval(f);
    if (*sweep) return cmd_sweep(f);
    if (*audit) return cmd_audit(f);
    if (*bench) return cmd_bench(f);
    if (*diag) return cmd_diagnose(f);
    if (*density) return cmd_density(f);
    if (*selftest) return cmd_selftest(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
