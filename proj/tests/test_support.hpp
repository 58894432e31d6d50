#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aspectra/aspectra.hpp"

namespace aspectra::testing {

inline std::string data_path(const std::string& name) { return std::string(ASPECTRA_TEST_DATA_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline Corpus load_fixture(const std::string& name) {
  return load_corpus(data_path(name), CorpusFormat::jsonl, {}, name);
}

struct Tok {
  std::string text;
  std::string lemma;
  Pos pos;
  int head;  // -1 for the root
  std::string rel;
};

/// Builds a sentence with space-joined text; `aspects` are half-open token ranges.
inline Sentence make_sentence(std::string id, const std::vector<Tok>& toks,
                              std::optional<std::vector<TokenSpan>> aspects = std::nullopt) {
  Sentence s;
  s.id = std::move(id);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) s.text += ' ';
    const auto start = text::utf8_length(s.text);
    s.text += toks[i].text;
    s.tokens.push_back({toks[i].text, toks[i].lemma, toks[i].pos, i, start, text::utf8_length(s.text)});
    if (toks[i].head >= 0)
      s.dependencies.push_back({static_cast<std::size_t>(toks[i].head), i, toks[i].rel});
  }
  if (aspects) {
    std::vector<CharSpan> spans;
    for (const auto& a : *aspects) spans.push_back({s.tokens[a.begin].start, s.tokens[a.end - 1].end});
    s.gold_aspects = spans;
    s.gold_token_spans = detail::token_spans_for(s);
  }
  return s;
}

inline std::vector<FeatureRow> random_rows(Rng& rng, std::size_t m) {
  std::vector<FeatureRow> rows(m);
  for (auto& r : rows)
    for (auto& bit : r) bit = rng.below(2) == 1;
  return rows;
}

/// Labels with at least one of each class among the first entries.
inline std::vector<Label> random_labels(Rng& rng, std::size_t m, double labeled_share) {
  std::vector<Label> labels(m, Label::unlabeled);
  for (std::size_t i = 0; i < m; ++i)
    if (rng.uniform() < labeled_share) labels[i] = rng.below(2) ? Label::aspect : Label::non_aspect;
  labels[0] = Label::aspect;
  labels[1] = Label::non_aspect;
  return labels;
}

/// Full-sort kNN oracle: for each row, sort every other column by
/// (affinity desc, index asc) and keep the first k.
inline std::vector<std::vector<std::size_t>> brute_force_knn(const AffinityMatrix& a, std::size_t k) {
  std::vector<std::vector<std::size_t>> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (j != i) order.push_back(j);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (a(i, x) != a(i, y)) return a(i, x) > a(i, y);
      return x < y;
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    out[i] = order;
  }
  return out;
}

/// Affinity matrix with values drawn from a small set so ties are common.
inline AffinityMatrix random_affinity(Rng& rng, std::size_t m) {
  AffinityMatrix a(m, 1.0, DistanceMetric::euclidean);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = static_cast<double>(rng.below(8) + 1) / 8.0;
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

}  // namespace aspectra::testing
