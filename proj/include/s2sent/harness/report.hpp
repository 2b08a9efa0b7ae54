#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2sent/harness/evaluate.hpp"
#include "s2sent/training/contrastive.hpp"

namespace s2sent::harness {

using nlohmann::json;

/// One grid point of a sweep (seed excluded).
struct RunSpec {
  selector::Variant variant = selector::Variant::ss2d;
  std::size_t blocks = 3;
  std::size_t freqs = 4;
  std::size_t reduction = 16;
  training::Pooling pooling = training::Pooling::avg;

  /// Stable label, e.g. "2d-L3-m4-r16-avg".
  std::string label() const {
    return std::string(to_string(variant)) + "-L" + std::to_string(blocks) + "-m" + std::to_string(freqs) +
           "-r" + std::to_string(reduction) + "-" + std::string(to_string(pooling));
  }

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct FlowRecord {
  std::string fusion;  ///< "average" or "spatial_selection"
  std::vector<double> direct_weights;
  std::vector<double> gradient_norms;
  double norm_variation = 0.0;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

struct DatasetScore {
  std::string name;
  double spearman = 0.0;

  friend bool operator==(const DatasetScore&, const DatasetScore&) = default;
};

struct RunRecord {
  RunSpec spec;
  std::uint64_t seed = 0;
  double spearman = 0.0;  ///< unweighted mean over `datasets`
  std::vector<DatasetScore> datasets;
  double untrained_spearman = 0.0;
  double final_loss = 0.0;
  std::vector<training::TrainLogEntry> log;
  std::size_t param_count = 0;
  double param_ratio = 0.0;
  std::size_t clamped_plans = 0;  ///< eval sentences whose grid held fewer than m frequency pairs
  FlowRecord gradient_flow;
  DensityExport density;
  double train_seconds = 0.0;  // timing

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct GroupSummary {
  RunSpec spec;
  std::vector<std::uint64_t> seeds;
  std::vector<double> spearman;
  double mean = 0.0;
  double std = 0.0;
  bool has_latency = false;
  LatencyReport latency;  // timing

  friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

struct ExperimentReport {
  json config;
  std::vector<std::uint64_t> seeds;
  std::vector<RunRecord> runs;
  std::vector<GroupSummary> groups;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

inline json to_json(const RunSpec& s) {
  return {{"variant", std::string(to_string(s.variant))}, {"blocks", s.blocks},   {"freqs", s.freqs},
          {"reduction", s.reduction},        {"pooling", std::string(to_string(s.pooling))}};
}

inline RunSpec spec_from_json(const json& j) {
  return {selector::parse_variant(j.at("variant").get<std::string>()), j.at("blocks").get<std::size_t>(),
          j.at("freqs").get<std::size_t>(), j.at("reduction").get<std::size_t>(),
          training::parse_pooling(j.at("pooling").get<std::string>())};
}

inline json to_json(const RunRecord& r) {
  json log = json::array();
  for (const auto& e : r.log) log.push_back({{"step", e.step}, {"loss", e.loss}, {"dev_spearman", e.dev_spearman}});
  json datasets = json::array();
  for (const auto& d : r.datasets) datasets.push_back({{"name", d.name}, {"spearman", d.spearman}});
  return {{"spec", to_json(r.spec)},
          {"label", r.spec.label()},
          {"seed", r.seed},
          {"spearman", r.spearman},
          {"datasets", datasets},
          {"untrained_spearman", r.untrained_spearman},
          {"final_loss", r.final_loss},
          {"log", log},
          {"delta_params", {{"count", r.param_count}, {"ratio", r.param_ratio}}},
          {"clamped_plans", r.clamped_plans},
          {"gradient_flow",
           {{"fusion", r.gradient_flow.fusion},
            {"direct_weights", r.gradient_flow.direct_weights},
            {"gradient_norms", r.gradient_flow.gradient_norms},
            {"norm_variation", r.gradient_flow.norm_variation}}},
          {"density", {{"bins", r.density.bins}, {"counts", r.density.counts}}},
          {"timing", {{"train_seconds", r.train_seconds}}}};
}

inline RunRecord run_from_json(const json& j) {
  RunRecord r;
  r.spec = spec_from_json(j.at("spec"));
  r.seed = j.at("seed").get<std::uint64_t>();
  r.spearman = j.at("spearman").get<double>();
  for (const auto& d : j.at("datasets")) r.datasets.push_back({d.at("name").get<std::string>(), d.at("spearman").get<double>()});
  r.untrained_spearman = j.at("untrained_spearman").get<double>();
  r.final_loss = j.at("final_loss").get<double>();
  for (const auto& e : j.at("log")) {
    r.log.push_back({e.at("step").get<std::size_t>(), e.at("loss").get<double>(), e.at("dev_spearman").get<double>()});
  }
  r.param_count = j.at("delta_params").at("count").get<std::size_t>();
  r.param_ratio = j.at("delta_params").at("ratio").get<double>();
  r.clamped_plans = j.at("clamped_plans").get<std::size_t>();
  const json& f = j.at("gradient_flow");
  r.gradient_flow = {f.at("fusion").get<std::string>(), f.at("direct_weights").get<std::vector<double>>(),
                     f.at("gradient_norms").get<std::vector<double>>(), f.at("norm_variation").get<double>()};
  r.density.bins = j.at("density").at("bins").get<std::size_t>();
  r.density.counts = j.at("density").at("counts").get<std::vector<std::vector<std::size_t>>>();
  r.train_seconds = j.at("timing").at("train_seconds").get<double>();
  return r;
}

inline json to_json(const GroupSummary& g) {
  json j = {{"spec", to_json(g.spec)}, {"label", g.spec.label()}, {"seeds", g.seeds},
            {"spearman", g.spearman},  {"mean", g.mean},           {"std", g.std}};
  if (g.has_latency) {
    j["timing"] = {{"latency",
                    {{"baseline_ns", g.latency.baseline_ns},
                     {"with_selector_ns", g.latency.with_selector_ns},
                     {"ratio", g.latency.ratio},
                     {"repetitions", g.latency.repetitions}}}};
  }
  return j;
}

inline GroupSummary group_from_json(const json& j) {
  GroupSummary g;
  g.spec = spec_from_json(j.at("spec"));
  g.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  g.spearman = j.at("spearman").get<std::vector<double>>();
  g.mean = j.at("mean").get<double>();
  g.std = j.at("std").get<double>();
  if (j.contains("timing")) {
    const json& l = j.at("timing").at("latency");
    g.has_latency = true;
    g.latency = {l.at("baseline_ns").get<double>(), l.at("with_selector_ns").get<double>(),
                 l.at("ratio").get<double>(), l.at("repetitions").get<std::size_t>()};
  }
  return g;
}

inline json to_json(const ExperimentReport& r) {
  json runs = json::array(), groups = json::array();
  for (const auto& x : r.runs) runs.push_back(to_json(x));
  for (const auto& g : r.groups) groups.push_back(to_json(g));
  return {{"config", r.config}, {"seeds", r.seeds}, {"runs", runs}, {"groups", groups}};
}

inline ExperimentReport report_from_json(const json& j) {
  ExperimentReport r;
  r.config = j.at("config");
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& x : j.at("runs")) r.runs.push_back(run_from_json(x));
  for (const auto& g : j.at("groups")) r.groups.push_back(group_from_json(g));
  return r;
}

/// Copy of a serialized report with every "timing" member removed.
inline json strip_timing(json j) {
  if (j.is_object()) {
    j.erase("timing");
    for (auto& item : j.items()) item.value() = strip_timing(item.value());
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_timing(v);
  }
  return j;
}

}  // namespace s2sent::harness
