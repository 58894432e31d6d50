#pragma once

// Pipeline configuration, read from and echoed to JSON. Every key is
// optional; missing keys keep their defaults.
//
// {
//   "features":   {"min_word_length", "freq_low_cut", "freq_high_cut",
//                  "high_freq_prune_threshold", "stopword_list", "extra_stopwords"},
//   "graph":      {"sigma", "k", "metric"},
//   "spread":     {"alpha", "max_iterations", "tolerance"},
//   "evaluation": {"k_values", "fractions", "runs", "base_seed", "balance_ratio"},
//   "classify":   {"labeled_fraction", "seed"}
// }

#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aspectra/error.hpp"
#include "aspectra/evaluation.hpp"
#include "aspectra/features.hpp"
#include "aspectra/graph.hpp"
#include "aspectra/spreading.hpp"
#include "aspectra/stopwords.hpp"

namespace aspectra {

struct PipelineConfig {
  FeatureConfig features;
  std::vector<std::string> extra_stopwords;
  GraphConfig graph;
  SpreadConfig spread;
  SweepGrid grid = default_grid();
  double balance_ratio = 1.0;
  double classify_fraction = 0.2;
  std::uint64_t seed = 0;

  static SweepGrid default_grid() {
    SweepGrid g;
    g.k_values.resize(20);
    std::iota(g.k_values.begin(), g.k_values.end(), std::size_t{1});
    g.fractions = {0.10, 0.15, 0.20};
    g.runs = 10;
    g.base_seed = 0;
    return g;
  }

  ExperimentConfig experiment() const {
    ExperimentConfig e;
    e.graph = graph;
    e.spread = spread;
    e.labeled_fraction = classify_fraction;
    e.balance_ratio = balance_ratio;
    return e;
  }

  void validate() const {
    features.validate();
    spread.validate();
    grid.validate();
    if (!(graph.sigma > 0.0)) throw ConfigError("graph.sigma must be positive");
    if (graph.k < 1) throw ConfigError("graph.k must be >= 1");
    if (!(balance_ratio > 0.0)) throw ConfigError("evaluation.balance_ratio must be positive");
    if (!(classify_fraction > 0.0 && classify_fraction < 1.0))
      throw ConfigError("classify.labeled_fraction must be in (0, 1)");
  }
};

namespace detail {

template <typename T>
void read_key(const nlohmann::json& obj, const char* section, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: bad value for ") + section + "." + key);
  }
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["features"]["min_word_length"] = c.features.min_word_length;
  j["features"]["freq_low_cut"] = c.features.freq_low_cut;
  j["features"]["freq_high_cut"] = c.features.freq_high_cut;
  j["features"]["high_freq_prune_threshold"] = c.features.high_freq_prune_threshold;
  j["features"]["stopword_list"] = c.features.stopword_list;
  j["features"]["extra_stopwords"] = c.extra_stopwords;
  j["graph"]["sigma"] = c.graph.sigma;
  j["graph"]["k"] = c.graph.k;
  j["graph"]["metric"] = std::string(to_string(c.graph.metric));
  j["spread"]["alpha"] = c.spread.alpha;
  j["spread"]["max_iterations"] = c.spread.max_iterations;
  j["spread"]["tolerance"] = c.spread.tolerance;
  j["evaluation"]["k_values"] = c.grid.k_values;
  j["evaluation"]["fractions"] = c.grid.fractions;
  j["evaluation"]["runs"] = c.grid.runs;
  j["evaluation"]["base_seed"] = c.grid.base_seed;
  j["evaluation"]["balance_ratio"] = c.balance_ratio;
  j["classify"]["labeled_fraction"] = c.classify_fraction;
  j["classify"]["seed"] = c.seed;
  return j;
}

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  const auto empty = nlohmann::json::object();
  auto section = [&](const char* name) -> const nlohmann::json& {
    auto it = j.find(name);
    if (it == j.end()) return empty;
    if (!it->is_object()) throw ConfigError(std::string("config: '") + name + "' must be an object");
    return *it;
  };

  const auto& f = section("features");
  detail::read_key(f, "features", "min_word_length", c.features.min_word_length);
  detail::read_key(f, "features", "freq_low_cut", c.features.freq_low_cut);
  detail::read_key(f, "features", "freq_high_cut", c.features.freq_high_cut);
  detail::read_key(f, "features", "high_freq_prune_threshold", c.features.high_freq_prune_threshold);
  detail::read_key(f, "features", "stopword_list", c.features.stopword_list);
  if (c.features.stopword_list != kStopwordListName)
    throw ConfigError("config: unknown stopword_list '" + c.features.stopword_list + "'");
  detail::read_key(f, "features", "extra_stopwords", c.extra_stopwords);
  for (const auto& w : c.extra_stopwords) c.features.stopwords.insert(text::to_lower(w));

  const auto& g = section("graph");
  detail::read_key(g, "graph", "sigma", c.graph.sigma);
  detail::read_key(g, "graph", "k", c.graph.k);
  std::string metric(to_string(c.graph.metric));
  detail::read_key(g, "graph", "metric", metric);
  const auto parsed = parse_distance_metric(metric);
  if (!parsed) throw ConfigError("config: graph.metric must be euclidean or hamming");
  c.graph.metric = *parsed;

  const auto& s = section("spread");
  detail::read_key(s, "spread", "alpha", c.spread.alpha);
  detail::read_key(s, "spread", "max_iterations", c.spread.max_iterations);
  detail::read_key(s, "spread", "tolerance", c.spread.tolerance);

  const auto& e = section("evaluation");
  detail::read_key(e, "evaluation", "k_values", c.grid.k_values);
  detail::read_key(e, "evaluation", "fractions", c.grid.fractions);
  detail::read_key(e, "evaluation", "runs", c.grid.runs);
  detail::read_key(e, "evaluation", "base_seed", c.grid.base_seed);
  detail::read_key(e, "evaluation", "balance_ratio", c.balance_ratio);

  const auto& cl = section("classify");
  detail::read_key(cl, "classify", "labeled_fraction", c.classify_fraction);
  detail::read_key(cl, "classify", "seed", c.seed);

  c.validate();
  return c;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return pipeline_config_from_json(j);
}

/// Parses "1-20", "1,5,10" or mixtures such as "1-5,10".
inline std::vector<std::size_t> parse_k_list(std::string_view list) {
  std::vector<std::size_t> out;
  std::stringstream in{std::string(list)};
  for (std::string part; std::getline(in, part, ',');) {
    if (part.empty()) continue;
    try {
      std::size_t used = 0;
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoul(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
        continue;
      }
      const auto lo = std::stoul(part.substr(0, dash));
      const auto hi = std::stoul(part.substr(dash + 1), &used);
      if (used != part.size() - dash - 1 || lo > hi) throw std::invalid_argument(part);
      for (auto k = lo; k <= hi; ++k) out.push_back(k);
    } catch (const std::logic_error&) {
      throw ConfigError("bad k list element '" + part + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty k list");
  return out;
}

inline std::vector<double> parse_fraction_list(std::string_view list) {
  std::vector<double> out;
  std::stringstream in{std::string(list)};
  for (std::string part; std::getline(in, part, ',');) {
    if (part.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw ConfigError("bad fraction '" + part + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty fraction list");
  return out;
}

}  // namespace aspectra
