#pragma once

// Annotated review corpora: tokens with coarse POS tags, dependency edges and
// optional gold aspect spans. Two input formats are supported:
//
//   * SemEval-style XML (sentences/sentence/text + aspectTerms/aspectTerm
//     with from/to offsets; the later Opinions/Opinion layout is also read).
//     XML carries only text and gold spans, annotations are attached later.
//   * Annotated JSONL, one sentence per line:
//       {"id", "text", "tokens": [{"text","lemma","pos","start","end"}],
//        "deps": [{"head","dep","rel"}], "aspects": [{"start","end"}]}
//     "aspects" is optional; when absent the sentence has no gold information.
//
// Character offsets in both formats count Unicode code points and are
// half-open.

#include <algorithm>
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
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "aspectra/error.hpp"
#include "aspectra/text.hpp"

namespace aspectra {

enum class Pos { noun, adj, adv, verb, other };

inline std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::noun: return "NOUN";
    case Pos::adj: return "ADJ";
    case Pos::adv: return "ADV";
    case Pos::verb: return "VERB";
    case Pos::other: return "OTHER";
  }
  return "OTHER";
}

inline std::optional<Pos> parse_pos(std::string_view s) {
  if (s == "NOUN") return Pos::noun;
  if (s == "ADJ") return Pos::adj;
  if (s == "ADV") return Pos::adv;
  if (s == "VERB") return Pos::verb;
  if (s == "OTHER") return Pos::other;
  return std::nullopt;
}

struct Token {
  std::string text;
  std::string lemma;
  Pos pos = Pos::other;
  std::size_t index = 0;
  std::size_t start = 0;  // code-point offset into the sentence text
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

struct DependencyEdge {
  std::size_t head_index = 0;
  std::size_t dependent_index = 0;
  std::string relation;

  bool operator==(const DependencyEdge&) const = default;
};

/// Half-open range of code points.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
  auto operator<=>(const CharSpan&) const = default;
};

/// Half-open range of token indices.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool contains(const TokenSpan& other) const noexcept {
    return begin <= other.begin && other.end <= end;
  }
  bool operator==(const TokenSpan&) const = default;
  auto operator<=>(const TokenSpan&) const = default;
};

struct Sentence {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<DependencyEdge> dependencies;
  /// nullopt when the source carries no gold annotation for this sentence.
  std::optional<std::vector<CharSpan>> gold_aspects;
  /// Gold spans re-expressed over tokens; empty until tokens are present.
  std::vector<TokenSpan> gold_token_spans;

  bool has_gold() const noexcept { return gold_aspects.has_value(); }
  bool operator==(const Sentence&) const = default;
};

struct CorpusStats {
  std::size_t sentence_count = 0;
  std::size_t aspect_word_count = 0;
  std::size_t non_aspect_word_count = 0;
  std::map<std::string, std::size_t> term_frequency;  // lower-cased lemma -> count

  std::size_t word_count() const noexcept { return aspect_word_count + non_aspect_word_count; }
  bool operator==(const CorpusStats&) const = default;
};

/// Word tokens (tokens with a letter or digit) are counted; punctuation is
/// not. A word is an aspect word when it lies inside a gold token span.
inline CorpusStats compute_stats(const std::vector<Sentence>& sentences) {
  CorpusStats stats;
  stats.sentence_count = sentences.size();
  for (const auto& s : sentences) {
    for (const auto& tok : s.tokens) {
      if (!text::is_word(tok.text)) continue;
      const bool aspect = std::any_of(
          s.gold_token_spans.begin(), s.gold_token_spans.end(),
          [&](const TokenSpan& g) { return g.begin <= tok.index && tok.index < g.end; });
      (aspect ? stats.aspect_word_count : stats.non_aspect_word_count) += 1;
      ++stats.term_frequency[text::to_lower(tok.lemma.empty() ? tok.text : tok.lemma)];
    }
  }
  return stats;
}

/// Immutable collection of sentences with unique ids.
class Corpus {
 public:
  Corpus() = default;

  Corpus(std::string domain_name, std::vector<Sentence> sentences)
      : domain_name_(std::move(domain_name)), sentences_(std::move(sentences)) {
    std::set<std::string_view> seen;
    for (const auto& s : sentences_) {
      if (!seen.insert(s.id).second)
        throw ValidationError("duplicate sentence id '" + s.id + "'");
    }
    stats_ = aspectra::compute_stats(sentences_);
  }

  const std::string& domain_name() const noexcept { return domain_name_; }
  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  const CorpusStats& stats() const noexcept { return stats_; }
  std::size_t size() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }

  bool operator==(const Corpus&) const = default;

 private:
  std::string domain_name_;
  std::vector<Sentence> sentences_;
  CorpusStats stats_;
};

inline CorpusStats compute_stats(const Corpus& corpus) {
  return compute_stats(corpus.sentences());
}

namespace detail {

/// Token span covering every token that overlaps `span`. Partial overlaps
/// round outward to whole tokens.
inline std::optional<TokenSpan> char_to_token_span(const std::vector<Token>& tokens,
                                                   const CharSpan& span) {
  std::optional<TokenSpan> out;
  for (const auto& tok : tokens) {
    if (tok.start < span.end && tok.end > span.begin) {
      if (!out) out = TokenSpan{tok.index, tok.index + 1};
      out->end = tok.index + 1;
    }
  }
  return out;
}

inline std::vector<TokenSpan> token_spans_for(const Sentence& s) {
  std::vector<TokenSpan> spans;
  if (!s.gold_aspects || s.tokens.empty()) return spans;
  for (const auto& g : *s.gold_aspects) {
    auto ts = char_to_token_span(s.tokens, g);
    if (!ts)
      throw ValidationError("sentence '" + s.id + "': aspect span [" + std::to_string(g.begin) +
                            ", " + std::to_string(g.end) + ") covers no token");
    spans.push_back(*ts);
  }
  return spans;
}

inline void check_span(const Sentence& s, const CharSpan& g) {
  const auto len = text::utf8_length(s.text);
  if (g.begin >= g.end || g.end > len)
    throw ValidationError("sentence '" + s.id + "': aspect span [" + std::to_string(g.begin) +
                          ", " + std::to_string(g.end) + ") outside text of length " +
                          std::to_string(len));
}

using Json = nlohmann::json;

inline const Json& require(const Json& obj, const char* field, std::size_t line,
                           const std::string& where = {}) {
  auto it = obj.find(field);
  if (it == obj.end())
    throw ParseError(line, "missing field '" + where + field + "'");
  return *it;
}

inline std::size_t require_index(const Json& obj, const char* field, std::size_t line,
                                 const std::string& where) {
  const Json& v = require(obj, field, line, where);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ParseError(line, "field '" + where + field + "': expected non-negative integer");
  return v.get<std::size_t>();
}

inline std::string require_string(const Json& obj, const char* field, std::size_t line,
                                  const std::string& where) {
  const Json& v = require(obj, field, line, where);
  if (!v.is_string()) throw ParseError(line, "field '" + where + field + "': expected string");
  return v.get<std::string>();
}

inline const Json& require_array(const Json& obj, const char* field, std::size_t line) {
  const Json& v = require(obj, field, line);
  if (!v.is_array()) throw ParseError(line, std::string("field '") + field + "': expected array");
  return v;
}

inline Sentence sentence_from_json(const Json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError(line, "expected a JSON object");
  Sentence s;
  s.id = require_string(obj, "id", line, "");
  s.text = require_string(obj, "text", line, "");
  const auto text_len = text::utf8_length(s.text);

  const Json& tokens = require_array(obj, "tokens", line);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string where = "tokens[" + std::to_string(i) + "].";
    const Json& t = tokens[i];
    if (!t.is_object()) throw ParseError(line, "field 'tokens[" + std::to_string(i) + "]': expected object");
    Token tok;
    tok.index = i;
    tok.text = require_string(t, "text", line, where);
    if (tok.text.empty()) throw ParseError(line, "field '" + where + "text': empty token");
    tok.lemma = require_string(t, "lemma", line, where);
    const auto pos = parse_pos(require_string(t, "pos", line, where));
    if (!pos)
      throw ParseError(line, "field '" + where + "pos': expected NOUN|ADJ|ADV|VERB|OTHER");
    tok.pos = *pos;
    tok.start = require_index(t, "start", line, where);
    tok.end = require_index(t, "end", line, where);
    if (tok.start >= tok.end || tok.end > text_len)
      throw ParseError(line, "field '" + where + "start/end': offsets outside text");
    s.tokens.push_back(std::move(tok));
  }

  const Json& deps = require_array(obj, "deps", line);
  for (std::size_t i = 0; i < deps.size(); ++i) {
    const std::string where = "deps[" + std::to_string(i) + "].";
    const Json& d = deps[i];
    if (!d.is_object()) throw ParseError(line, "field 'deps[" + std::to_string(i) + "]': expected object");
    DependencyEdge e;
    e.head_index = require_index(d, "head", line, where);
    e.dependent_index = require_index(d, "dep", line, where);
    e.relation = require_string(d, "rel", line, where);
    const auto n = s.tokens.size();
    if (e.head_index >= n)
      throw ParseError(line, "field '" + where + "head': index " + std::to_string(e.head_index) +
                                 " out of range for " + std::to_string(n) + " tokens");
    if (e.dependent_index >= n)
      throw ParseError(line, "field '" + where + "dep': index " +
                                 std::to_string(e.dependent_index) + " out of range for " +
                                 std::to_string(n) + " tokens");
    if (e.head_index == e.dependent_index)
      throw ParseError(line, "field '" + where + "head': self-loop on token " +
                                 std::to_string(e.head_index));
    s.dependencies.push_back(std::move(e));
  }

  if (auto it = obj.find("aspects"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(line, "field 'aspects': expected array");
    std::vector<CharSpan> spans;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "aspects[" + std::to_string(i) + "].";
      CharSpan g{require_index((*it)[i], "start", line, where),
                 require_index((*it)[i], "end", line, where)};
      if (g.begin >= g.end || g.end > text_len)
        throw ParseError(line, "field '" + where + "start/end': span outside text");
      spans.push_back(g);
    }
    s.gold_aspects = std::move(spans);
  }
  try {
    s.gold_token_spans = token_spans_for(s);
  } catch (const ValidationError& e) {
    throw ParseError(line, e.what());
  }
  return s;
}

}  // namespace detail

/// Reads the annotated JSONL format. Blank lines and lines starting with '#'
/// (annotator provenance headers) are skipped.
inline Corpus parse_annotated_jsonl(std::istream& in, std::string domain_name = {}) {
  std::vector<Sentence> sentences;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;
    detail::Json obj;
    try {
      obj = detail::Json::parse(raw);
    } catch (const detail::Json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    Sentence s = detail::sentence_from_json(obj, line);
    if (auto [it, inserted] = first_line.emplace(s.id, line); !inserted)
      throw ParseError(line, "duplicate sentence id '" + s.id + "' (first seen on line " +
                                 std::to_string(it->second) + ")");
    sentences.push_back(std::move(s));
  }
  return Corpus(std::move(domain_name), std::move(sentences));
}

inline Corpus parse_annotated_jsonl(std::string_view data, std::string domain_name = {}) {
  std::istringstream in{std::string(data)};
  return parse_annotated_jsonl(in, std::move(domain_name));
}

/// Canonical JSONL: fixed key order, compact separators, one sentence per line.
inline void write_annotated_jsonl(const Corpus& corpus, std::ostream& out) {
  using Ordered = nlohmann::ordered_json;
  for (const auto& s : corpus.sentences()) {
    Ordered obj;
    obj["id"] = s.id;
    obj["text"] = s.text;
    Ordered tokens = Ordered::array();
    for (const auto& t : s.tokens) {
      Ordered jt;
      jt["text"] = t.text;
      jt["lemma"] = t.lemma;
      jt["pos"] = std::string(to_string(t.pos));
      jt["start"] = t.start;
      jt["end"] = t.end;
      tokens.push_back(std::move(jt));
    }
    obj["tokens"] = std::move(tokens);
    Ordered deps = Ordered::array();
    for (const auto& d : s.dependencies) {
      Ordered jd;
      jd["head"] = d.head_index;
      jd["dep"] = d.dependent_index;
      jd["rel"] = d.relation;
      deps.push_back(std::move(jd));
    }
    obj["deps"] = std::move(deps);
    if (s.gold_aspects) {
      Ordered aspects = Ordered::array();
      for (const auto& g : *s.gold_aspects) {
        Ordered ja;
        ja["start"] = g.begin;
        ja["end"] = g.end;
        aspects.push_back(std::move(ja));
      }
      obj["aspects"] = std::move(aspects);
    }
    out << obj.dump() << '\n';
  }
}

inline std::string serialize_jsonl(const Corpus& corpus) {
  std::ostringstream out;
  write_annotated_jsonl(corpus, out);
  return out.str();
}

/// Reads SemEval-style XML. Sentences get text and gold character spans only;
/// tokens and dependencies come from `attach_annotations`.
inline Corpus parse_semeval_xml(std::istream& in, std::string domain_name = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(e.line(), "malformed XML: " + e.message());
  }

  std::vector<Sentence> sentences;
  auto read_sentence = [&](const pt::ptree& node) {
    Sentence s;
    s.id = node.get<std::string>("<xmlattr>.id", "");
    if (s.id.empty()) throw ValidationError("sentence element without id attribute");
    s.text = node.get<std::string>("text", "");
    std::vector<CharSpan> spans;
    auto add_span = [&](const pt::ptree& term, const char* target_attr) {
      if (term.get<std::string>(target_attr, "") == "NULL") return;
      const auto from = term.get_optional<long long>("<xmlattr>.from");
      const auto to = term.get_optional<long long>("<xmlattr>.to");
      if (!from || !to || *from < 0 || *to < 0)
        throw ValidationError("sentence '" + s.id + "': aspect term without valid from/to");
      CharSpan g{static_cast<std::size_t>(*from), static_cast<std::size_t>(*to)};
      if (g.begin == g.end) return;
      detail::check_span(s, g);
      if (std::find(spans.begin(), spans.end(), g) == spans.end()) spans.push_back(g);
    };
    if (auto terms = node.get_child_optional("aspectTerms")) {
      for (const auto& [name, term] : *terms)
        if (name == "aspectTerm") add_span(term, "<xmlattr>.term");
    }
    if (auto opinions = node.get_child_optional("Opinions")) {
      for (const auto& [name, op] : *opinions)
        if (name == "Opinion") add_span(op, "<xmlattr>.target");
    }
    std::sort(spans.begin(), spans.end());
    s.gold_aspects = std::move(spans);
    sentences.push_back(std::move(s));
  };

  // Sentences may sit directly under <sentences> or under Reviews/Review.
  auto walk = [&](auto&& self, const pt::ptree& node) -> void {
    for (const auto& [name, child] : node) {
      if (name == "sentence")
        read_sentence(child);
      else if (name != "<xmlattr>" && name != "<xmlcomment>")
        self(self, child);
    }
  };
  walk(walk, tree);
  return Corpus(std::move(domain_name), std::move(sentences));
}

inline Corpus parse_semeval_xml(std::string_view data, std::string domain_name = {}) {
  std::istringstream in{std::string(data)};
  return parse_semeval_xml(in, std::move(domain_name));
}

/// Gives each corpus sentence the tokens and dependencies of the annotation
/// with the same id. Gold spans of `corpus` are kept and re-expressed over the
/// annotation's tokens.
inline Corpus attach_annotations(const Corpus& corpus, const Corpus& annotations) {
  std::unordered_map<std::string_view, const Sentence*> by_id;
  for (const auto& a : annotations.sentences()) by_id.emplace(a.id, &a);

  std::vector<std::string> missing;
  for (const auto& s : corpus.sentences())
    if (!by_id.contains(s.id)) missing.push_back(s.id);
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw ValidationError("annotations missing for sentence ids: " + list);
  }

  std::vector<Sentence> merged;
  merged.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) {
    const Sentence& a = *by_id.at(s.id);
    if (a.text != s.text)
      throw ValidationError("sentence '" + s.id + "': annotation text differs from corpus text");
    Sentence out = s;
    out.tokens = a.tokens;
    out.dependencies = a.dependencies;
    if (!out.gold_aspects) out.gold_aspects = a.gold_aspects;
    out.gold_token_spans = detail::token_spans_for(out);
    merged.push_back(std::move(out));
  }
  return Corpus(corpus.domain_name(), std::move(merged));
}

enum class CorpusFormat { semeval_xml, jsonl };

inline std::optional<CorpusFormat> parse_corpus_format(std::string_view s) {
  if (s == "semeval-xml" || s == "xml") return CorpusFormat::semeval_xml;
  if (s == "jsonl") return CorpusFormat::jsonl;
  return std::nullopt;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

/// Loads an annotated corpus from disk; XML input needs an annotations file.
inline Corpus load_corpus(const std::string& path, CorpusFormat format,
                          const std::string& annotations_path = {},
                          std::string domain_name = {}) {
  auto in = open_input(path);
  if (format == CorpusFormat::jsonl) return parse_annotated_jsonl(in, std::move(domain_name));
  Corpus xml = parse_semeval_xml(in, std::move(domain_name));
  if (annotations_path.empty()) return xml;
  auto ain = open_input(annotations_path);
  return attach_annotations(xml, parse_annotated_jsonl(ain));
}

}  // namespace aspectra
