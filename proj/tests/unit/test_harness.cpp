#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "golden.hpp"
#include "s2sent/harness/experiment.hpp"

using namespace s2sent;
using namespace s2sent::harness;

namespace {

encoder::EncoderConfig tiny_encoder() {
  encoder::EncoderConfig e;
  e.vocab_size = 128;
  e.depth = 2;
  e.width = 8;
  e.heads = 2;
  e.ffn_mult = 2;
  e.max_len = 12;
  return e;
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.encoder = tiny_encoder();
  c.blocks = {2};
  c.freqs = {2};
  c.reductions = {2};
  c.seeds = 2;
  c.steps = 3;
  c.batch_size = 4;
  c.eval_every = 2;
  c.train_sentences = 20;
  c.eval_pairs = 12;
  c.dev_pairs = 4;
  c.density_bins = 4;
  return c;
}

training::SentenceModel tiny_model(std::uint64_t seed = 1) {
  const auto cfg = tiny_config();
  return training::SentenceModel(model_config(cfg, expand_grid(cfg).front()), seed);
}

std::vector<SentencePairRecord> parse(const std::string& text, std::ostream* warnings = nullptr) {
  std::istringstream in(text);
  return parse_pairs_tsv(in, "mem", warnings);
}

}  // namespace

TEST(PairsTsv, TwoRowsInOrder) {
  const auto rows = parse("a cat\ta dog\t4.2\n\nthe sun\tthe moon\t0\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (SentencePairRecord{"a cat", "a dog", 4.2}));
  EXPECT_EQ(rows[1], (SentencePairRecord{"the sun", "the moon", 0.0}));
  EXPECT_EQ(rows[0].gold_score, 4.2);
}

TEST(PairsTsv, EmptyInputWarns) {
  std::ostringstream warn;
  EXPECT_TRUE(parse("", &warn).empty());
  EXPECT_NE(warn.str().find("warning"), std::string::npos);
}

TEST(PairsTsv, MalformedRowsNameTheLine) {
  try {
    parse("a\tb\t1\na\tb\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("mem:2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("a\tb\tabc\n"), DataError);
  EXPECT_THROW(parse("a\tb\tnan\n"), DataError);
  EXPECT_THROW(parse("a\tb\t1.5x\n"), DataError);
  EXPECT_THROW(parse("\tb\t1\n"), DataError);
  EXPECT_THROW(parse("a\tb\t1\t2\n"), DataError);
  EXPECT_THROW(load_pairs_tsv("/nonexistent/pairs.tsv"), DataError);
}

TEST(PairsTsv, WriteReadRoundtrip) {
  const auto pairs = synth_corpus(25, 3);
  std::ostringstream out;
  write_pairs_tsv(out, pairs);
  EXPECT_EQ(parse(out.str()), pairs);
}

TEST(SynthCorpus, GoldTracksOverlap) {
  std::set<double> seen;
  for (const auto& p : synth_corpus(400, 11)) {
    seen.insert(p.gold_score);
    if (p.gold_score == 5.0) {
      EXPECT_EQ(p.sentence_a, p.sentence_b);
    }
    std::istringstream a(p.sentence_a), b(p.sentence_b);
    std::string wa, wb;
    std::size_t shared = 0;
    while (a >> wa && b >> wb) {
      if (wa == wb && std::isdigit(static_cast<unsigned char>(wa.back()))) ++shared;
    }
    EXPECT_DOUBLE_EQ(p.gold_score, overlap_gold(shared));
  }
  EXPECT_EQ(seen.size(), kSlots + 1);
  EXPECT_TRUE(seen.count(0.0));
  EXPECT_TRUE(seen.count(5.0));
}

TEST(SynthCorpus, FixedSeedIsFrozen) {
  EXPECT_EQ(synth_corpus(30, 7), synth_corpus(30, 7));
  EXPECT_NE(synth_corpus(30, 7), synth_corpus(30, 8));
  std::ostringstream out;
  write_pairs_tsv(out, synth_corpus(30, 7));
  for (const auto& s : synth_sentences(10, 7)) out << s << '\n';
  expect_golden("synth_corpus.tsv", out.str());
}

TEST(Spearman, Examples) {
  const std::vector<double> x = {1, 2, 3, 4}, y = {10, 20, 30, 40}, r = {4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(spearman(x, y), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, r), -1.0);
  EXPECT_NEAR(spearman(x, std::vector<double>{1, 3, 2, 4}), 0.8, 1e-15);
  EXPECT_THROW(spearman(x, std::vector<double>{1, 2}), DimensionError);
  EXPECT_THROW(spearman(x, std::vector<double>{1, 1, 1, 1}), ContractError);
}

TEST(Spearman, TiesGetAverageRanks) {
  EXPECT_EQ(average_ranks(std::vector<double>{3, 1, 3, 2}), (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(Spearman, MonotoneInvariance) {
  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(30), y(30), ex(30);
    for (std::size_t i = 0; i < 30; ++i) {
      x[i] = rng.uniform() * 4 - 2;
      y[i] = x[i] + rng.uniform();
      ex[i] = std::exp(x[i]);
    }
    EXPECT_NEAR(spearman(x, y), spearman(ex, y), 1e-12);
  }
}

TEST(Stats, MeanStdAndPairedT) {
  const std::vector<double> a = {1, 2, 3, 4}, b = {0.5, 1.5, 2.0, 3.5};
  EXPECT_DOUBLE_EQ(mean(a), 2.5);
  EXPECT_NEAR(sample_std(a), std::sqrt(5.0 / 3.0), 1e-15);
  const auto t = paired_t_test(a, b);
  // Differences 0.5, 0.5, 1, 0.5: mean 0.625, sd 0.25, t = 0.625 / (0.25 / 2) = 5.
  EXPECT_DOUBLE_EQ(t.mean_difference, 0.625);
  EXPECT_NEAR(t.t, 5.0, 1e-12);
  EXPECT_EQ(t.dof, 3.0);
  EXPECT_NEAR(t.p_two_sided, 0.015392, 1e-5);
  EXPECT_EQ(paired_t_test(a, a).p_two_sided, 1.0);
}

TEST(Evaluate, SelfConsistencyAndNull) {
  const auto model = tiny_model();
  auto pairs = synth_corpus(200, 21);
  const auto sims = pair_similarities(model, pairs);
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].gold_score = sims[i];
  EXPECT_DOUBLE_EQ(evaluate(model, pairs), 1.0);
  SplitMix64 rng(4);
  std::vector<double> gold = sims;
  shuffle(gold, rng);
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].gold_score = gold[i];
  EXPECT_LT(std::abs(evaluate(model, pairs)), 0.3);
  EXPECT_EQ(evaluate(model, pairs), evaluate(tiny_model(), pairs));
  EXPECT_THROW(evaluate(model, std::span(pairs).first(1)), ContractError);
}

TEST(Latency, ContractAndSelfComparison) {
  const auto model = tiny_model();
  EXPECT_THROW(latency_bench(model, std::vector<std::string>{}), ContractError);
  const std::vector<std::string> sentences = synth_sentences(8, 2);
  EXPECT_THROW(latency_bench(model, sentences, 5), ContractError);
  const auto a = latency_bench(model, sentences, 30);
  const auto b = latency_bench(model, sentences, 30);
  EXPECT_EQ(a.repetitions, 30u);
  EXPECT_GT(a.baseline_ns, 0.0);
  EXPECT_NEAR(b.ratio / a.ratio, 1.0, 0.2);
}

TEST(Density, SingleGroupAndConservation) {
  const std::vector<SentencePairRecord> pairs(5, SentencePairRecord{"a", "b", 3.5});
  const std::vector<double> sims = {-1.0, -0.2, 0.0, 0.7, 1.0};
  const auto d = density_from_similarities(sims, pairs, 4);
  for (std::size_t g = 0; g < kGoldGroups; ++g) EXPECT_EQ(d.group_size(g), g == 3 ? 5u : 0u);
  EXPECT_EQ(d.counts[3], (std::vector<std::size_t>{1, 1, 1, 2}));
  EXPECT_EQ(gold_group(5.0), 4u);
  EXPECT_EQ(gold_group(0.0), 0u);
  EXPECT_EQ(gold_group(1.0), 1u);
  EXPECT_THROW(density_from_similarities(sims, pairs, 1), ContractError);

  const auto model = tiny_model();
  const auto corpus = synth_corpus(60, 9);
  const auto full = density_export(model, corpus, 10);
  std::size_t total = 0;
  for (std::size_t g = 0; g < kGoldGroups; ++g) total += full.group_size(g);
  EXPECT_EQ(total, corpus.size());
}

TEST(Density, GoldenSeedRun) {
  const auto d = density_export(tiny_model(3), synth_corpus(80, 13), 8);
  std::ostringstream out;
  write_density_tsv(out, d);
  expect_golden("density.tsv", out.str());
}

TEST(Config, UnknownKeysAreListed) {
  try {
    config_from_json(json::parse(R"({"steps": 5, "stepz": 1, "lerning_rate": 0.1})"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("stepz"), std::string::npos);
    EXPECT_NE(msg.find("lerning_rate"), std::string::npos);
  }
}

TEST(Config, BadValuesAndValidation) {
  EXPECT_THROW(config_from_json(json::parse(R"({"steps": "many"})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"variants": ["3d"]})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"([1, 2])")), ConfigError);
  ExperimentConfig c = tiny_config();
  c.freqs = {3};
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config();
  c.blocks = {3};
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config();
  c.latency_reps = 10;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, JsonRoundtrip) {
  ExperimentConfig c = tiny_config();
  c.variants = {selector::Variant::avg, selector::Variant::token_gate};
  c.poolings = {training::Pooling::first};
  c.bottleneck = Activation::tanh;
  c.data = {"x.tsv", "y.tsv"};
  EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))), config_to_json(c));
  EXPECT_EQ(config_from_json(json::object()).steps, ExperimentConfig{}.steps);
  EXPECT_EQ(config_from_json({{"data", "x.tsv"}}).data, std::vector<std::string>{"x.tsv"});
  EXPECT_TRUE(config_from_json({{"data", ""}}).data.empty());
}

TEST(Grid, UnusedAxesCollapse) {
  ExperimentConfig c = tiny_config();
  c.variants = {selector::Variant::avg, selector::Variant::ss2d};
  c.blocks = {1, 2};
  c.freqs = {1, 2};
  const auto grid = expand_grid(c);
  EXPECT_EQ(grid.size(), 2u + 4u);
  EXPECT_EQ(grid.front().label(), "avg-L1-m0-r0-avg");
}

TEST(Report, JsonRoundtrip) {
  ExperimentConfig c = tiny_config();
  c.latency_reps = 30;
  const auto report = run_experiment(c);
  const json j = to_json(report);
  EXPECT_EQ(report_from_json(json::parse(j.dump())), report);
  ASSERT_TRUE(report.groups.front().has_latency);
}

TEST(Experiment, DeterministicAcrossRuns) {
  ExperimentConfig c = tiny_config();
  c.workers = 2;
  const auto a = run_experiment(c);
  c.workers = 1;
  const auto b = run_experiment(c);
  json ja = strip_timing(to_json(a)), jb = strip_timing(to_json(b));
  ja["config"].erase("workers");
  jb["config"].erase("workers");
  EXPECT_EQ(ja, jb);
  EXPECT_EQ(a.runs.front().log, b.runs.front().log);
}

TEST(Experiment, ZeroStepsReportsUntrainedModel) {
  ExperimentConfig c = tiny_config();
  c.steps = 0;
  c.seeds = 1;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_TRUE(r.runs[0].log.empty());
  EXPECT_EQ(r.runs[0].spearman, r.runs[0].untrained_spearman);
}

TEST(Experiment, GridTimesSeedsRuns) {
  ExperimentConfig c = tiny_config();
  c.variants = {selector::Variant::avg, selector::Variant::ss1d, selector::Variant::ss2d, selector::Variant::token_gate};
  c.blocks = {1, 2};
  c.seeds = 2;
  c.steps = 1;
  const auto r = run_experiment(c);
  const std::size_t g = expand_grid(c).size();
  EXPECT_EQ(g, 8u);
  EXPECT_EQ(r.runs.size(), g * 2);
  EXPECT_EQ(r.groups.size(), g);
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    EXPECT_EQ(r.runs[i].spec, r.groups[i / 2].spec);
    EXPECT_EQ(r.runs[i].seed, c.base_seed + i % 2);
  }
  EXPECT_NE(find_group(r, r.groups.back().spec), nullptr);
}

TEST(Experiment, WritesLogsAndCheckpoints) {
  ExperimentConfig c = tiny_config();
  c.seeds = 1;
  c.out = (std::filesystem::temp_directory_path() / "s2sent_test_run").string();
  std::filesystem::remove_all(c.out);
  const auto r = run_experiment(c);
  const std::string stem = c.out + "/" + r.runs[0].spec.label() + "-s1";
  EXPECT_TRUE(std::filesystem::exists(stem + ".log.tsv"));
  ASSERT_TRUE(std::filesystem::exists(stem + ".ckpt"));
  auto model = tiny_model(99);
  encoder::load_checkpoint(stem + ".ckpt", model.parameters());
  EXPECT_EQ(evaluate(model, load_data(c).eval), r.runs[0].spearman);
  std::filesystem::remove_all(c.out);
}

TEST(Experiment, UserDataSuppliesDevAndTraining) {
  const auto path = std::filesystem::temp_directory_path() / "s2sent_test_pairs.tsv";
  {
    std::ofstream out(path);
    write_pairs_tsv(out, synth_corpus(10, 5));
  }
  ExperimentConfig c = tiny_config();
  c.data = {path.string()};
  const auto d = load_data(c);
  EXPECT_EQ(d.eval.size(), 10u);
  EXPECT_EQ(d.dev.size(), 4u);
  EXPECT_EQ(d.dev.front(), d.eval.front());
  EXPECT_EQ(d.train.size(), 20u);
  std::filesystem::remove(path);
}

TEST(Experiment, ScoresEachDatasetAndAveragesUnweighted) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto small = dir / "s2sent_test_small.tsv", large = dir / "s2sent_test_large.tsv";
  const auto small_pairs = synth_corpus(12, 6), large_pairs = synth_corpus(40, 7);
  {
    std::ofstream a(small), b(large);
    write_pairs_tsv(a, small_pairs);
    write_pairs_tsv(b, large_pairs);
  }
  ExperimentConfig c = tiny_config();
  c.data = {small.string(), large.string()};
  const auto d = load_data(c);
  EXPECT_EQ(d.eval.size(), 52u);
  EXPECT_EQ(d.set_offsets, (std::vector<std::size_t>{0, 12}));
  EXPECT_EQ(d.dev.size(), 4u);

  const auto r = run_single(c, expand_grid(c).front(), 3, d);
  ASSERT_EQ(r.datasets.size(), 2u);
  EXPECT_EQ(r.datasets[0].name, small.string());
  training::SentenceModel model(model_config(c, r.spec), 3);
  training::train(model, d.train, c.train_config(3), {}, nullptr);
  EXPECT_EQ(r.datasets[0].spearman, evaluate(model, small_pairs));
  EXPECT_EQ(r.datasets[1].spearman, evaluate(model, large_pairs));
  EXPECT_DOUBLE_EQ(r.spearman, 0.5 * (r.datasets[0].spearman + r.datasets[1].spearman));
  EXPECT_EQ(run_from_json(to_json(r)).datasets, r.datasets);
  std::filesystem::remove(small);
  std::filesystem::remove(large);
}
