#pragma once

// Opinion summary of detected aspects. Each aspect occurrence is paired with
// an adjective reached through an nsubj edge (directly, or through one
// complement hop from a verb head), plus an optional adverbial/adjectival
// modifier of that adjective. Opinion words are scored on the 0-4 scale
// (0 very negative .. 4 very positive) from a lexicon; an intensifier moves
// the score one step away from neutral, a diminisher one step toward it.

#include <algorithm>
#include <array>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aspectra/corpus.hpp"
#include "aspectra/error.hpp"
#include "aspectra/text.hpp"

namespace aspectra {

inline constexpr int kNeutralScore = 2;
inline constexpr int kMaxScore = 4;
inline constexpr std::array<std::string_view, 5> kPolarityNames = {
    "very_negative", "negative", "neutral", "positive", "very_positive"};

struct OpinionLexicon {
  std::map<std::string, int> base_scores;
  std::set<std::string> intensifiers;
  std::set<std::string> diminishers;

  int score_of(const std::string& lemma) const {
    auto it = base_scores.find(lemma);
    return it == base_scores.end() ? kNeutralScore : it->second;
  }
};

/// Lexicon text format:
///
///   # comment
///   [scores]          (default section)
///   good 3
///   [intensifiers]
///   very
///   [diminishers]
///   slightly
inline OpinionLexicon parse_lexicon(std::istream& in) {
  enum class Section { scores, intensifiers, diminishers } section = Section::scores;
  OpinionLexicon lex;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::string word;
    if (!(fields >> word)) continue;
    if (word == "[scores]") { section = Section::scores; continue; }
    if (word == "[intensifiers]") { section = Section::intensifiers; continue; }
    if (word == "[diminishers]") { section = Section::diminishers; continue; }
    if (word.front() == '[') throw ParseError(line, "unknown lexicon section " + word);
    word = text::to_lower(word);
    std::string extra;
    switch (section) {
      case Section::scores: {
        int score = -1;
        if (!(fields >> score) || score < 0 || score > kMaxScore || (fields >> extra))
          throw ParseError(line, "expected '<lemma> <score 0-4>'");
        lex.base_scores[word] = score;
        break;
      }
      case Section::intensifiers:
        if (fields >> extra) throw ParseError(line, "expected one lemma per line");
        lex.intensifiers.insert(word);
        break;
      case Section::diminishers:
        if (fields >> extra) throw ParseError(line, "expected one lemma per line");
        lex.diminishers.insert(word);
        break;
    }
  }
  return lex;
}

inline OpinionLexicon parse_lexicon(std::string_view data) {
  std::istringstream in{std::string(data)};
  return parse_lexicon(in);
}

inline OpinionLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon '" + path + "'");
  return parse_lexicon(in);
}

inline constexpr std::string_view kDefaultLexicon = R"(# aspectra bundled opinion lexicon, 0 very negative .. 4 very positive
[scores]
excellent 4
amazing 4
perfect 4
outstanding 4
fantastic 4
superb 4
wonderful 4
awesome 4
incredible 4
exceptional 4
phenomenal 4
best 4
heavenly 4
good 3
great 3
delicious 3
nice 3
fresh 3
friendly 3
tasty 3
pleasant 3
attentive 3
helpful 3
clean 3
cozy 3
reasonable 3
fast 3
quick 3
generous 3
solid 3
lovely 3
impressive 3
fun 3
beautiful 3
comfortable 3
polite 3
authentic 3
flavorful 3
yummy 3
affordable 3
okay 2
ok 2
average 2
decent 2
fine 2
standard 2
normal 2
typical 2
ordinary 2
acceptable 2
bad 1
slow 1
rude 1
cold 1
bland 1
overpriced 1
poor 1
expensive 1
noisy 1
loud 1
dirty 1
greasy 1
salty 1
stale 1
soggy 1
dry 1
mediocre 1
disappointing 1
unfriendly 1
crowded 1
pricey 1
boring 1
tough 1
burnt 1
tiny 1
terrible 0
awful 0
horrible 0
disgusting 0
worst 0
inedible 0
atrocious 0
gross 0
appalling 0
dreadful 0
pathetic 0
nasty 0
[intensifiers]
very
really
extremely
incredibly
so
super
truly
absolutely
totally
highly
exceptionally
especially
too
most
remarkably
[diminishers]
slightly
somewhat
fairly
rather
little
bit
barely
hardly
mildly
moderately
relatively
)";

inline OpinionLexicon default_lexicon() { return parse_lexicon(kDefaultLexicon); }

struct OpinionTuple {
  std::string aspect;
  std::string opinion_word;
  std::optional<std::string> modifier;
  std::string sentence_id;
  std::optional<int> score;  // set by score_opinion

  bool operator==(const OpinionTuple&) const = default;
};

struct AspectMatch {
  std::string aspect;
  TokenSpan span;
};

namespace detail {

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) words.push_back(text::to_lower(w));
  return words;
}

inline std::string token_key(const Token& t) { return text::to_lower(t.lemma.empty() ? t.text : t.lemma); }

inline bool is_nsubj(std::string_view rel) { return rel == "nsubj" || rel.starts_with("nsubj:"); }

inline bool is_complement(std::string_view rel) {
  return rel == "acomp" || rel == "xcomp" || rel == "attr" || rel == "oprd";
}

/// Token of the span whose governor lies outside it; the last token if none.
inline std::size_t span_head(const Sentence& s, const TokenSpan& span) {
  std::optional<std::size_t> head;
  for (const auto& e : s.dependencies) {
    const bool dep_in = e.dependent_index >= span.begin && e.dependent_index < span.end;
    const bool head_in = e.head_index >= span.begin && e.head_index < span.end;
    if (dep_in && !head_in) head = std::max(head.value_or(0), e.dependent_index);
  }
  return head.value_or(span.end - 1);
}

inline std::optional<std::size_t> opinion_for(const Sentence& s, std::size_t aspect_head) {
  for (const auto& e : s.dependencies) {
    if (!is_nsubj(e.relation) || e.dependent_index != aspect_head) continue;
    const std::size_t gov = e.head_index;
    if (s.tokens[gov].pos == Pos::adj) return gov;
    for (const auto& c : s.dependencies)
      if (c.head_index == gov && is_complement(c.relation) && s.tokens[c.dependent_index].pos == Pos::adj)
        return c.dependent_index;
  }
  return std::nullopt;
}

inline std::optional<std::size_t> modifier_for(const Sentence& s, std::size_t opinion) {
  std::optional<std::size_t> best;
  for (const auto& e : s.dependencies) {
    if (e.head_index != opinion || (e.relation != "amod" && e.relation != "advmod")) continue;
    if (!best || e.dependent_index < *best) best = e.dependent_index;
  }
  return best;
}

}  // namespace detail

/// Occurrences of aspect surfaces (lemma sequences) in a sentence. Longer
/// aspects win at a position; matches never overlap.
inline std::vector<AspectMatch> find_aspects(const Sentence& s, const std::vector<std::string>& aspects) {
  std::vector<std::pair<std::vector<std::string>, const std::string*>> patterns;
  for (const auto& a : aspects) {
    auto words = detail::split_words(a);
    if (!words.empty()) patterns.emplace_back(std::move(words), &a);
  }
  std::stable_sort(patterns.begin(), patterns.end(),
                   [](const auto& x, const auto& y) { return x.first.size() > y.first.size(); });

  std::vector<std::string> keys;
  for (const auto& t : s.tokens) keys.push_back(detail::token_key(t));
  std::vector<AspectMatch> out;
  for (std::size_t i = 0; i < keys.size();) {
    bool matched = false;
    for (const auto& [words, name] : patterns) {
      if (i + words.size() > keys.size()) continue;
      if (std::equal(words.begin(), words.end(), keys.begin() + static_cast<std::ptrdiff_t>(i))) {
        out.push_back({*name, {i, i + words.size()}});
        i += words.size();
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return out;
}

/// Unscored tuples for every aspect occurrence with a linked opinion word.
inline std::vector<OpinionTuple> extract_opinion_pairs(const Sentence& sentence,
                                                       const std::vector<std::string>& aspects) {
  std::vector<OpinionTuple> out;
  for (const auto& match : find_aspects(sentence, aspects)) {
    const auto opinion = detail::opinion_for(sentence, detail::span_head(sentence, match.span));
    if (!opinion) continue;
    OpinionTuple t;
    t.aspect = match.aspect;
    t.opinion_word = detail::token_key(sentence.tokens[*opinion]);
    if (auto mod = detail::modifier_for(sentence, *opinion))
      t.modifier = detail::token_key(sentence.tokens[*mod]);
    t.sentence_id = sentence.id;
    out.push_back(std::move(t));
  }
  return out;
}

inline int apply_modifier(int base, const std::optional<std::string>& modifier, const OpinionLexicon& lexicon) {
  if (!modifier || base == kNeutralScore) return base;
  if (lexicon.intensifiers.contains(*modifier))
    return std::clamp(base > kNeutralScore ? base + 1 : base - 1, 0, kMaxScore);
  if (lexicon.diminishers.contains(*modifier)) return base > kNeutralScore ? base - 1 : base + 1;
  return base;
}

inline OpinionTuple score_opinion(OpinionTuple tuple, const OpinionLexicon& lexicon) {
  tuple.score = apply_modifier(lexicon.score_of(tuple.opinion_word), tuple.modifier, lexicon);
  return tuple;
}

struct AspectEntry {
  std::string aspect;
  std::size_t frequency = 0;            // occurrences found in the corpus
  std::array<std::size_t, 5> counts{};  // indexed by score
  std::size_t score_sum = 0;

  std::size_t tuple_count() const noexcept {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
  std::optional<double> mean() const {
    const auto n = tuple_count();
    if (n == 0) return std::nullopt;
    return static_cast<double>(score_sum) / static_cast<double>(n);
  }
  bool operator==(const AspectEntry&) const = default;
};

struct AspectSummary {
  std::vector<AspectEntry> aspects;  // by frequency desc, then name
  std::vector<OpinionTuple> tuples;  // scored, in corpus order
};

inline AspectSummary summarize(const Corpus& corpus, const std::vector<std::string>& aspects,
                               const OpinionLexicon& lexicon) {
  AspectSummary summary;
  if (aspects.empty()) return summary;
  std::map<std::string, AspectEntry> entries;
  for (const auto& a : aspects) entries[a].aspect = a;
  for (const auto& s : corpus.sentences()) {
    for (const auto& m : find_aspects(s, aspects)) ++entries[m.aspect].frequency;
    for (auto& t : extract_opinion_pairs(s, aspects)) {
      t = score_opinion(std::move(t), lexicon);
      auto& e = entries[t.aspect];
      ++e.counts[static_cast<std::size_t>(*t.score)];
      e.score_sum += static_cast<std::size_t>(*t.score);
      summary.tuples.push_back(std::move(t));
    }
  }
  for (auto& [name, e] : entries) summary.aspects.push_back(std::move(e));
  std::stable_sort(summary.aspects.begin(), summary.aspects.end(),
                   [](const AspectEntry& a, const AspectEntry& b) { return a.frequency > b.frequency; });
  return summary;
}

/// Frequency CSV (all aspects): header "aspect,count".
inline void write_frequency_csv(const AspectSummary& summary, std::ostream& out) {
  out << "aspect,count\n";
  for (const auto& e : summary.aspects) out << text::csv_field(e.aspect) << ',' << e.frequency << '\n';
}

/// Polarity JSON for the top_n most frequent aspects:
/// [{"aspect": str, "counts": [5 ints, very negative first], "mean": number|null}]
inline nlohmann::ordered_json polarity_json(const AspectSummary& summary, std::size_t top_n) {
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < summary.aspects.size() && i < top_n; ++i) {
    const auto& e = summary.aspects[i];
    nlohmann::ordered_json j;
    j["aspect"] = e.aspect;
    j["counts"] = e.counts;
    if (auto m = e.mean())
      j["mean"] = *m;
    else
      j["mean"] = nullptr;
    arr.push_back(std::move(j));
  }
  return arr;
}

struct SummaryPaths {
  std::string frequency_csv;
  std::string polarity_json;
};

inline void export_summary(const AspectSummary& summary, std::size_t top_n, const SummaryPaths& paths) {
  std::ofstream csv(paths.frequency_csv, std::ios::binary);
  if (!csv) throw Error("cannot open '" + paths.frequency_csv + "' for writing");
  write_frequency_csv(summary, csv);
  std::ofstream json(paths.polarity_json, std::ios::binary);
  if (!json) throw Error("cannot open '" + paths.polarity_json + "' for writing");
  json << polarity_json(summary, top_n).dump(2) << '\n';
  csv.flush();
  json.flush();
  if (!csv || !json) throw Error("failed writing summary files");
}

}  // namespace aspectra
