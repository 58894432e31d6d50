#pragma once

// Candidate terms and their six boolean features.
//
// Tokens are pruned (non-words and over-frequent lemmas), noun compounds are
// merged into multi-word terms, and the remainder is deduplicated by lemma so
// each candidate is a term type with a list of occurrences. Every candidate
// is encoded as a row of six bits and carries a label in {-1, 0, 1}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aspectra/corpus.hpp"
#include "aspectra/error.hpp"
#include "aspectra/random.hpp"
#include "aspectra/stopwords.hpp"
#include "aspectra/text.hpp"

namespace aspectra {

enum class Feature : std::size_t {
  word_length,
  pos_noun,
  freq_band,
  head_word,
  orthographic,
  stopword,
};

inline constexpr std::size_t kFeatureCount = 6;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "word_length", "pos_noun", "freq_band", "head_word", "orthographic", "stopword"};

using FeatureRow = std::array<bool, kFeatureCount>;

constexpr bool get(const FeatureRow& row, Feature f) noexcept {
  return row[static_cast<std::size_t>(f)];
}

enum class Label : std::int8_t { unlabeled = -1, non_aspect = 0, aspect = 1 };

inline int to_int(Label l) noexcept { return static_cast<int>(l); }

struct FeatureConfig {
  std::size_t min_word_length = 3;           // word_length fires when length > this
  std::size_t freq_low_cut = 2;              // absolute count
  double freq_high_cut = 0.02;               // fraction of corpus word tokens
  double high_freq_prune_threshold = 0.05;   // fraction; lemmas above are dropped
  std::set<std::string> stopwords = default_stopwords();
  std::string stopword_list = std::string(kStopwordListName);

  void validate() const {
    if (freq_low_cut < 1) throw ConfigError("freq_low_cut must be >= 1");
    if (!(freq_high_cut > 0.0 && freq_high_cut <= 1.0))
      throw ConfigError("freq_high_cut must be in (0, 1]");
    if (!(high_freq_prune_threshold > 0.0 && high_freq_prune_threshold <= 1.0))
      throw ConfigError("high_freq_prune_threshold must be in (0, 1]");
  }
};

struct Occurrence {
  std::size_t sentence = 0;  // index into Corpus::sentences()
  TokenSpan span;

  bool operator==(const Occurrence&) const = default;
  auto operator<=>(const Occurrence&) const = default;
};

struct Candidate {
  std::string surface;  // lower-cased lemmas joined by single spaces
  std::vector<Occurrence> occurrences;
  std::size_t corpus_frequency = 0;
  std::optional<bool> is_gold_aspect;

  std::size_t word_count() const {
    return static_cast<std::size_t>(std::count(surface.begin(), surface.end(), ' ')) + 1;
  }
  bool operator==(const Candidate&) const = default;
};

struct FeatureMatrix {
  std::vector<Candidate> candidates;
  std::vector<FeatureRow> rows;
  std::vector<Label> labels;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return candidates.size(); }
  static constexpr std::size_t width() noexcept { return kFeatureCount; }

  /// Gold labels as Label values; throws if any candidate lacks gold.
  std::vector<Label> gold_labels() const {
    std::vector<Label> gold;
    gold.reserve(size());
    for (const auto& c : candidates) {
      if (!c.is_gold_aspect) throw ValidationError("candidate '" + c.surface + "' has no gold label");
      gold.push_back(*c.is_gold_aspect ? Label::aspect : Label::non_aspect);
    }
    return gold;
  }
};

namespace detail {

inline std::string lemma_key(const Token& t) {
  return text::to_lower(t.lemma.empty() ? t.text : t.lemma);
}

inline std::string surface_of(const Sentence& s, const TokenSpan& span) {
  std::string out;
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (i > span.begin) out += ' ';
    out += lemma_key(s.tokens[i]);
  }
  return out;
}

inline std::string occurrence_text(const Sentence& s, const TokenSpan& span) {
  std::string out;
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (i > span.begin) out += ' ';
    out += s.tokens[i].text;
  }
  return out;
}

inline bool majority(std::size_t yes, std::size_t total) { return total > 0 && 2 * yes >= total; }

}  // namespace detail

/// Lemmas whose share of the corpus word tokens is strictly above
/// `high_freq_prune_threshold`.
inline std::set<std::string> over_frequent_lemmas(const Corpus& corpus, const FeatureConfig& config) {
  std::set<std::string> out;
  const auto total = static_cast<double>(corpus.stats().word_count());
  for (const auto& [lemma, count] : corpus.stats().term_frequency)
    if (static_cast<double>(count) > config.high_freq_prune_threshold * total) out.insert(lemma);
  return out;
}

inline std::vector<Candidate> prune_and_merge(const Corpus& corpus, const FeatureConfig& config) {
  config.validate();
  const auto pruned = over_frequent_lemmas(corpus, config);
  std::map<std::string, Candidate> by_surface;
  const auto& sentences = corpus.sentences();

  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const Sentence& s = sentences[si];
    const std::size_t n = s.tokens.size();
    std::vector<bool> keep(n);
    for (std::size_t i = 0; i < n; ++i)
      keep[i] = text::is_word(s.tokens[i].text) && !pruned.contains(detail::lemma_key(s.tokens[i]));

    // Union kept noun tokens joined by compound edges.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& e : s.dependencies) {
      if (e.relation != "compound") continue;
      const auto h = e.head_index, d = e.dependent_index;
      if (!keep[h] || !keep[d] || s.tokens[h].pos != Pos::noun || s.tokens[d].pos != Pos::noun)
        continue;
      parent[find(h)] = find(d);
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i)
      if (keep[i]) groups[find(i)].push_back(i);

    for (const auto& [root, members] : groups) {
      std::vector<TokenSpan> spans;
      const bool contiguous = members.back() - members.front() + 1 == members.size();
      if (contiguous) {
        spans.push_back({members.front(), members.back() + 1});
      } else {
        for (auto i : members) spans.push_back({i, i + 1});
      }
      for (const auto& span : spans) {
        Candidate& c = by_surface[detail::surface_of(s, span)];
        c.occurrences.push_back({si, span});
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(by_surface.size());
  for (auto& [surface, c] : by_surface) {
    c.surface = surface;
    std::sort(c.occurrences.begin(), c.occurrences.end());
    c.corpus_frequency = c.occurrences.size();
    std::size_t known = 0, aspect = 0;
    for (const auto& occ : c.occurrences) {
      const Sentence& s = sentences[occ.sentence];
      if (!s.has_gold()) continue;
      ++known;
      if (std::any_of(s.gold_token_spans.begin(), s.gold_token_spans.end(),
                      [&](const TokenSpan& g) { return g.contains(occ.span); }))
        ++aspect;
    }
    if (known > 0) c.is_gold_aspect = detail::majority(aspect, known);
    out.push_back(std::move(c));
  }
  return out;
}

inline FeatureRow extract_features(const Candidate& candidate, const Corpus& corpus,
                                   const FeatureConfig& config) {
  FeatureRow row{};
  const auto& sentences = corpus.sentences();
  auto set = [&](Feature f, bool v) { row[static_cast<std::size_t>(f)] = v; };

  std::size_t letters = 0;
  for (unsigned char c : candidate.surface)
    if (c != ' ' && (c & 0xC0) != 0x80) ++letters;
  set(Feature::word_length, letters > config.min_word_length);

  std::size_t noun_occurrences = 0;
  bool head = false, ortho = false;
  for (const auto& occ : candidate.occurrences) {
    const Sentence& s = sentences[occ.sentence];
    const bool all_noun = std::all_of(s.tokens.begin() + occ.span.begin, s.tokens.begin() + occ.span.end,
                                      [](const Token& t) { return t.pos == Pos::noun; });
    if (all_noun) ++noun_occurrences;

    const std::size_t last = occ.span.end - 1;
    const bool last_is_noun = s.tokens[last].pos == Pos::noun;
    const bool run_ends = last + 1 == s.tokens.size() || s.tokens[last + 1].pos != Pos::noun;
    const bool compound_head = std::any_of(s.dependencies.begin(), s.dependencies.end(), [&](const DependencyEdge& e) {
      return e.relation == "compound" && e.head_index == last;
    });
    if ((last_is_noun && run_ends) || compound_head) head = true;

    const auto surface_text = detail::occurrence_text(s, occ.span);
    if (text::starts_upper(surface_text) || text::all_upper(surface_text)) ortho = true;
  }
  const bool noun = detail::majority(noun_occurrences, candidate.occurrences.size());
  set(Feature::pos_noun, noun);

  const double high = config.freq_high_cut * static_cast<double>(corpus.stats().word_count());
  const auto f = candidate.corpus_frequency;
  set(Feature::freq_band, noun && f >= config.freq_low_cut && static_cast<double>(f) <= high);
  set(Feature::head_word, head);
  set(Feature::orthographic, ortho);

  bool all_stop = true;
  std::size_t pos = 0;
  const std::string_view surface = candidate.surface;
  while (pos <= surface.size()) {
    const auto next = std::min(surface.find(' ', pos), surface.size());
    if (!config.stopwords.contains(std::string(surface.substr(pos, next - pos)))) all_stop = false;
    pos = next + 1;
  }
  set(Feature::stopword, all_stop);
  return row;
}

/// Rows are ordered lexicographically by surface; all labels start at -1.
inline FeatureMatrix build_feature_matrix(const Corpus& corpus, const FeatureConfig& config) {
  FeatureMatrix m;
  m.candidates = prune_and_merge(corpus, config);
  if (m.candidates.empty()) throw Error("empty candidate set");
  m.rows.reserve(m.candidates.size());
  for (const auto& c : m.candidates) {
    m.rows.push_back(extract_features(c, corpus, config));
    if (c.is_gold_aspect.value_or(false) && get(m.rows.back(), Feature::stopword))
      m.warnings.push_back("gold aspect '" + c.surface + "' is a stop-word");
  }
  m.labels.assign(m.candidates.size(), Label::unlabeled);
  return m;
}

namespace detail {

inline std::size_t rounded_share(double fraction, std::size_t count) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(count) + 0.5));
}

inline FeatureMatrix subset(const FeatureMatrix& m, const std::vector<std::size_t>& keep) {
  FeatureMatrix out;
  out.warnings = m.warnings;
  for (auto i : keep) {
    out.candidates.push_back(m.candidates[i]);
    out.rows.push_back(m.rows[i]);
    out.labels.push_back(m.labels[i]);
  }
  return out;
}

}  // namespace detail

/// Labels a stratified random share of each gold class; everything else is
/// reset to unlabeled. Stop-word candidates are never labeled as aspects.
inline FeatureMatrix select_labeled(const FeatureMatrix& matrix, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("labeled fraction must be in (0, 1)");
  std::vector<std::size_t> aspects, others;
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const auto& gold = matrix.candidates[i].is_gold_aspect;
    if (!gold) continue;
    if (*gold && !get(matrix.rows[i], Feature::stopword))
      aspects.push_back(i);
    else if (!*gold)
      others.push_back(i);
  }
  const auto n_aspect = detail::rounded_share(fraction, aspects.size());
  const auto n_other = detail::rounded_share(fraction, others.size());
  if (n_aspect == 0 || n_other == 0)
    throw ConfigError("labeled fraction " + text::format_double(fraction) + " selects " +
                      std::to_string(n_aspect) + " aspect and " + std::to_string(n_other) +
                      " non-aspect candidates; both classes need at least one");

  FeatureMatrix out = matrix;
  out.labels.assign(matrix.size(), Label::unlabeled);
  Rng rng(seed, 0x5e1ec7);
  rng.shuffle(std::span(aspects));
  rng.shuffle(std::span(others));
  for (std::size_t i = 0; i < n_aspect; ++i) out.labels[aspects[i]] = Label::aspect;
  for (std::size_t i = 0; i < n_other; ++i) out.labels[others[i]] = Label::non_aspect;
  return out;
}

/// Downsamples non-aspect candidates to `ratio` times the aspect count.
/// Candidates without gold information are kept. Row order is preserved.
inline FeatureMatrix balance_classes(const FeatureMatrix& matrix, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0)) throw ConfigError("class ratio must be positive");
  std::vector<std::size_t> others;
  std::size_t aspects = 0;
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const auto& gold = matrix.candidates[i].is_gold_aspect;
    if (!gold) continue;
    if (*gold)
      ++aspects;
    else
      others.push_back(i);
  }
  const auto target = detail::rounded_share(ratio, aspects);
  if (others.size() <= target) return matrix;

  Rng rng(seed, 0xba1a2ce);
  rng.shuffle(std::span(others));
  std::vector<bool> dropped(matrix.size(), false);
  for (std::size_t i = target; i < others.size(); ++i) dropped[others[i]] = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < matrix.size(); ++i)
    if (!dropped[i]) keep.push_back(i);
  return detail::subset(matrix, keep);
}

/// Debug CSV: surface, six feature bits, label, gold (empty when unknown).
inline void write_feature_csv(const FeatureMatrix& m, std::ostream& out) {
  out << "surface";
  for (auto name : kFeatureNames) out << ',' << name;
  out << ",label,gold\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << text::csv_field(m.candidates[i].surface);
    for (bool bit : m.rows[i]) out << ',' << (bit ? 1 : 0);
    out << ',' << to_int(m.labels[i]) << ',';
    if (const auto& g = m.candidates[i].is_gold_aspect) out << (*g ? 1 : 0);
    out << '\n';
  }
}

}  // namespace aspectra
