#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2sent/training/contrastive.hpp"

// Experiment configuration: one flat JSON object. Keys and defaults
//
//   variants        ["2d"]         avg | 1d | 2d | token_gate
//   blocks          [3]            Last-k values
//   freqs           [4]            m values
//   reductions      [16]           r values
//   poolings        ["avg"]        avg | first
//   bottleneck      "relu"         relu | tanh | sigmoid
//   seeds           7              number of seeds: base_seed, base_seed+1, ...
//   base_seed       1
//   steps           1000
//   batch_size      8
//   learning_rate   3e-3
//   temperature     0.05
//   eval_every      125            dev evaluation interval, 0 disables
//   train_sentences 2000           synthetic corpus sizes
//   eval_pairs      500
//   dev_pairs       100
//   data_seed       20240501       seed of the synthetic corpus
//   data            []             STS-style TSVs for evaluation (replace the synthetic eval set);
//                                  a single path string is also accepted
//   train_data      ""             one sentence per line (replaces the synthetic training set)
//   vocab_size, depth, width, heads, ffn_mult, dropout, max_len   encoder
//   workers         1              concurrent runs
//   density_bins    20
//   latency_reps    0              0 skips the latency benchmark
//   out             ""             directory for logs and checkpoints
namespace s2sent::harness {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::vector<selector::Variant> variants{selector::Variant::ss2d};
  std::vector<std::size_t> blocks{3};
  std::vector<std::size_t> freqs{4};
  std::vector<std::size_t> reductions{16};
  std::vector<training::Pooling> poolings{training::Pooling::avg};
  Activation bottleneck = Activation::relu;
  std::size_t seeds = 7;
  std::uint64_t base_seed = 1;
  std::size_t steps = 1000;
  std::size_t batch_size = 8;
  double learning_rate = 3e-3;
  double temperature = 0.05;
  std::size_t eval_every = 125;
  std::size_t train_sentences = 2000;
  std::size_t eval_pairs = 500;
  std::size_t dev_pairs = 100;
  std::uint64_t data_seed = 20240501;
  std::vector<std::string> data;
  std::string train_data;
  encoder::EncoderConfig encoder;
  std::size_t workers = 1;
  std::size_t density_bins = 20;
  std::size_t latency_reps = 0;
  std::string out;

  std::vector<std::uint64_t> seed_list() const {
    std::vector<std::uint64_t> s(seeds);
    for (std::size_t i = 0; i < seeds; ++i) s[i] = base_seed + i;
    return s;
  }

  training::TrainConfig train_config(std::uint64_t seed) const {
    training::TrainConfig t;
    t.learning_rate = learning_rate;
    t.batch_size = batch_size;
    t.temperature = temperature;
    t.steps = steps;
    t.eval_every = eval_every;
    t.seed = seed;
    return t;
  }

  void validate() const {
    auto need = [](bool ok, const std::string& msg) {
      if (!ok) throw ConfigError("config: " + msg);
    };
    need(!variants.empty() && !blocks.empty() && !freqs.empty() && !reductions.empty() && !poolings.empty(),
         "grid axes must be non-empty");
    need(seeds >= 1, "seeds must be at least 1");
    need(learning_rate > 0.0, "learning_rate must be positive");
    need(temperature > 0.0, "temperature must be positive");
    need(batch_size >= 1, "batch_size must be at least 1");
    need(workers >= 1, "workers must be at least 1");
    need(density_bins >= 2, "density_bins must be at least 2");
    need(latency_reps == 0 || latency_reps >= 30, "latency_reps must be 0 or at least 30");
    need(train_sentences >= 1 || !train_data.empty(), "train_sentences must be positive");
    need(eval_pairs >= 2 || !data.empty(), "eval_pairs must be at least 2");
    for (std::size_t k : blocks) need(k >= 1 && k <= encoder.depth, "blocks must lie in [1, depth]");
    for (std::size_t m : freqs) {
      need(m >= 1 && encoder.width % m == 0, "freqs must divide width " + std::to_string(encoder.width));
    }
    for (std::size_t r : reductions) {
      need(r >= 1 && encoder.width % r == 0, "reductions must divide width " + std::to_string(encoder.width));
    }
    try {
      encoder.validate();
    } catch (const ContractError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "variants", "blocks", "freqs", "reductions", "poolings", "bottleneck", "seeds", "base_seed",
      "steps", "batch_size", "learning_rate", "temperature", "eval_every", "train_sentences",
      "eval_pairs", "dev_pairs", "data_seed", "data", "train_data", "vocab_size", "depth", "width",
      "heads", "ffn_mult", "dropout", "max_len", "workers", "density_bins", "latency_reps", "out"};
  return keys;
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

template <typename T, typename Parse>
void read_names(const json& j, const char* key, std::vector<T>& into, Parse parse) {
  std::vector<std::string> names;
  read(j, key, names);
  if (!j.contains(key)) return;
  into.clear();
  try {
    for (const auto& n : names) into.push_back(parse(n));
  } catch (const ContractError& e) {
    throw ConfigError(std::string("config: ") + key + ": " + e.what());
  }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  std::vector<std::string> unknown;
  for (const auto& [key, _] : j.items()) {
    if (!detail::known_keys().count(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  ExperimentConfig c;
  detail::read_names(j, "variants", c.variants, selector::parse_variant);
  detail::read(j, "blocks", c.blocks);
  detail::read(j, "freqs", c.freqs);
  detail::read(j, "reductions", c.reductions);
  detail::read_names(j, "poolings", c.poolings, training::parse_pooling);
  if (j.contains("bottleneck")) {
    std::string name;
    detail::read(j, "bottleneck", name);
    try {
      c.bottleneck = parse_activation(name);
    } catch (const ContractError& e) {
      throw ConfigError(std::string("config: bottleneck: ") + e.what());
    }
  }
  detail::read(j, "seeds", c.seeds);
  detail::read(j, "base_seed", c.base_seed);
  detail::read(j, "steps", c.steps);
  detail::read(j, "batch_size", c.batch_size);
  detail::read(j, "learning_rate", c.learning_rate);
  detail::read(j, "temperature", c.temperature);
  detail::read(j, "eval_every", c.eval_every);
  detail::read(j, "train_sentences", c.train_sentences);
  detail::read(j, "eval_pairs", c.eval_pairs);
  detail::read(j, "dev_pairs", c.dev_pairs);
  detail::read(j, "data_seed", c.data_seed);
  if (j.contains("data") && j.at("data").is_string()) {
    const std::string one = j.at("data").get<std::string>();
    if (!one.empty()) c.data = {one};
  } else {
    detail::read(j, "data", c.data);
  }
  detail::read(j, "train_data", c.train_data);
  detail::read(j, "vocab_size", c.encoder.vocab_size);
  detail::read(j, "depth", c.encoder.depth);
  detail::read(j, "width", c.encoder.width);
  detail::read(j, "heads", c.encoder.heads);
  detail::read(j, "ffn_mult", c.encoder.ffn_mult);
  detail::read(j, "dropout", c.encoder.dropout);
  detail::read(j, "max_len", c.encoder.max_len);
  detail::read(j, "workers", c.workers);
  detail::read(j, "density_bins", c.density_bins);
  detail::read(j, "latency_reps", c.latency_reps);
  detail::read(j, "out", c.out);
  c.validate();
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  std::vector<std::string> v, p;
  for (auto x : c.variants) v.emplace_back(to_string(x));
  for (auto x : c.poolings) p.emplace_back(to_string(x));
  j["variants"] = v;
  j["blocks"] = c.blocks;
  j["freqs"] = c.freqs;
  j["reductions"] = c.reductions;
  j["poolings"] = p;
  j["bottleneck"] = std::string(to_string(c.bottleneck));
  j["seeds"] = c.seeds;
  j["base_seed"] = c.base_seed;
  j["steps"] = c.steps;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["temperature"] = c.temperature;
  j["eval_every"] = c.eval_every;
  j["train_sentences"] = c.train_sentences;
  j["eval_pairs"] = c.eval_pairs;
  j["dev_pairs"] = c.dev_pairs;
  j["data_seed"] = c.data_seed;
  j["data"] = c.data;
  j["train_data"] = c.train_data;
  j["vocab_size"] = c.encoder.vocab_size;
  j["depth"] = c.encoder.depth;
  j["width"] = c.encoder.width;
  j["heads"] = c.encoder.heads;
  j["ffn_mult"] = c.encoder.ffn_mult;
  j["dropout"] = c.encoder.dropout;
  j["max_len"] = c.encoder.max_len;
  j["workers"] = c.workers;
  j["density_bins"] = c.density_bins;
  j["latency_reps"] = c.latency_reps;
  j["out"] = c.out;
  return j;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace s2sent::harness
