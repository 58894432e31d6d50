#include <gtest/gtest.h>

#include <string>

#include "aspectra/corpus.hpp"
#include "test_support.hpp"

namespace aspectra {
namespace {

using testing::data_path;
using testing::read_file;

constexpr const char* kTwoLine =
    R"({"id":"a","text":"Battery is good","tokens":[{"text":"Battery","lemma":"battery","pos":"NOUN","start":0,"end":7},{"text":"is","lemma":"be","pos":"VERB","start":8,"end":10},{"text":"good","lemma":"good","pos":"ADJ","start":11,"end":15}],"deps":[{"head":2,"dep":0,"rel":"nsubj"},{"head":2,"dep":1,"rel":"cop"}],"aspects":[{"start":0,"end":7}]}
{"id":"b","text":"great food","tokens":[{"text":"great","lemma":"great","pos":"ADJ","start":0,"end":5},{"text":"food","lemma":"food","pos":"NOUN","start":6,"end":10}],"deps":[{"head":1,"dep":0,"rel":"amod"}]}
)";

TEST(ParseJsonl, TwoLineFixture) {
  const Corpus c = parse_annotated_jsonl(std::string_view(kTwoLine));
  ASSERT_EQ(c.size(), 2u);
  const auto& a = c.sentences()[0];
  EXPECT_EQ(a.tokens.size(), 3u);
  ASSERT_EQ(a.dependencies.size(), 2u);
  EXPECT_EQ(a.dependencies[0], (DependencyEdge{2, 0, "nsubj"}));
  EXPECT_EQ(a.dependencies[1], (DependencyEdge{2, 1, "cop"}));
  EXPECT_EQ(a.tokens[0].pos, Pos::noun);
  ASSERT_TRUE(a.has_gold());
  EXPECT_EQ(a.gold_token_spans, (std::vector<TokenSpan>{{0, 1}}));

  const auto& b = c.sentences()[1];
  EXPECT_FALSE(b.has_gold());
  EXPECT_EQ(b.dependencies, (std::vector<DependencyEdge>{{1, 0, "amod"}}));
}

TEST(ParseJsonl, EmptyInputGivesEmptyCorpus) {
  const Corpus c = parse_annotated_jsonl(std::string_view(""));
  EXPECT_TRUE(c.empty());
  EXPECT_EQ(c.stats(), CorpusStats{});
}

TEST(ParseJsonl, SkipsCommentAndBlankLines) {
  const std::string data = "# annotator model-x 1.0\n\n" + std::string(kTwoLine);
  EXPECT_EQ(parse_annotated_jsonl(std::string_view(data)).size(), 2u);
}

TEST(ParseJsonl, DependentOutOfRangeNamesLine) {
  const std::string bad =
      R"({"id":"x","text":"a b","tokens":[{"text":"a","lemma":"a","pos":"OTHER","start":0,"end":1},{"text":"b","lemma":"b","pos":"NOUN","start":2,"end":3}],"deps":[{"head":1,"dep":5,"rel":"det"}]})";
  const std::string data = std::string(kTwoLine) + bad + "\n";
  try {
    parse_annotated_jsonl(std::string_view(data));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("deps[0].dep"), std::string::npos) << e.what();
  }
}

TEST(ParseJsonl, SchemaViolationsNameField) {
  struct Case {
    const char* line;
    const char* field;
  };
  const Case cases[] = {
      {R"({"text":"a","tokens":[],"deps":[]})", "'id'"},
      {R"({"id":"x","text":"a","tokens":[{"text":"a","lemma":"a","pos":"PRON","start":0,"end":1}],"deps":[]})",
       "tokens[0].pos"},
      {R"({"id":"x","text":"a","tokens":[{"text":"a","lemma":"a","pos":"NOUN","start":0,"end":9}],"deps":[]})",
       "tokens[0].start/end"},
      {R"({"id":"x","text":"a","tokens":[{"text":"a","lemma":"a","pos":"NOUN","start":0,"end":1}],"deps":[{"head":0,"dep":0,"rel":"x"}]})",
       "deps[0].head"},
      {R"({"id":"x","text":"a","tokens":[],"deps":"no"})", "'deps'"},
      {R"({"id":"x","text":"ab","tokens":[{"text":"ab","lemma":"ab","pos":"NOUN","start":0,"end":2}],"deps":[],"aspects":[{"start":1,"end":7}]})",
       "aspects[0]"},
      {R"(not json)", "invalid JSON"},
  };
  for (const auto& c : cases) {
    try {
      parse_annotated_jsonl(std::string_view(c.line));
      ADD_FAILURE() << "accepted: " << c.line;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 1u);
      EXPECT_NE(std::string(e.what()).find(c.field), std::string::npos) << e.what();
    }
  }
}

TEST(ParseJsonl, DuplicateIdRejected) {
  const std::string line = std::string(kTwoLine).substr(0, std::string(kTwoLine).find('\n') + 1);
  EXPECT_THROW(parse_annotated_jsonl(std::string_view(line + line)), ParseError);
}

TEST(ParseJsonl, RoundTripIsStructurallyEqual) {
  for (const char* name : {"restaurant_fixture.jsonl", "ten_sentences.jsonl", "opinion_pair.jsonl"}) {
    const Corpus original = testing::load_fixture(name);
    const std::string once = serialize_jsonl(original);
    const Corpus again = parse_annotated_jsonl(std::string_view(once), name);
    EXPECT_EQ(again, original) << name;
    EXPECT_EQ(serialize_jsonl(again), once) << name;
  }
}

// Fuzzed edges: out-of-range or self-loop edges must be rejected, never dropped.
TEST(ParseJsonl, FuzzedDependencyIndicesAreCheckedNotDropped) {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    std::string text, tokens;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) {
        text += ' ';
        tokens += ',';
      }
      const auto start = text.size();
      text += 'w';
      tokens += R"({"text":"w","lemma":"w","pos":"NOUN","start":)" + std::to_string(start) +
                ",\"end\":" + std::to_string(start + 1) + "}";
    }
    const std::size_t head = rng.below(n + 3), dep = rng.below(n + 3);
    const std::string line = R"({"id":"f","text":")" + text + R"(","tokens":[)" + tokens +
                             R"(],"deps":[{"head":)" + std::to_string(head) + ",\"dep\":" +
                             std::to_string(dep) + R"(,"rel":"r"}]})";
    const bool valid = head < n && dep < n && head != dep;
    if (valid) {
      const Corpus c = parse_annotated_jsonl(std::string_view(line));
      ASSERT_EQ(c.sentences()[0].dependencies.size(), 1u);
    } else {
      EXPECT_THROW(parse_annotated_jsonl(std::string_view(line)), ParseError) << line;
    }
  }
}

TEST(ParseSemeval, MiniFileSpansAndEntities) {
  auto in = open_input(data_path("semeval_mini.xml"));
  const Corpus c = parse_semeval_xml(in, "mini");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.sentences()[0].gold_aspects, (std::vector<CharSpan>{{4, 16}}));
  EXPECT_EQ(c.sentences()[2].text, "Fish & chips rock!");
  EXPECT_EQ(c.sentences()[2].gold_aspects, (std::vector<CharSpan>{{0, 12}}));
  EXPECT_TRUE(c.sentences()[0].tokens.empty());
  EXPECT_TRUE(c.sentences()[0].dependencies.empty());
}

TEST(ParseSemeval, EmptyFile) {
  auto in = open_input(data_path("semeval_empty.xml"));
  const Corpus c = parse_semeval_xml(in);
  EXPECT_TRUE(c.empty());
  EXPECT_EQ(c.stats(), CorpusStats{});
}

TEST(ParseSemeval, MalformedReportsLine) {
  auto in = open_input(data_path("semeval_malformed.xml"));
  try {
    parse_semeval_xml(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 0u);
  }
}

TEST(ParseSemeval, SpanPastTextNamesSentence) {
  auto in = open_input(data_path("semeval_bad_span.xml"));
  try {
    parse_semeval_xml(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("bad7"), std::string::npos) << e.what();
  }
}

TEST(ParseSemeval, LaterOpinionLayoutIsRead) {
  const Corpus c = parse_semeval_xml(std::string_view(
      R"(<Reviews><Review rid="1"><sentences><sentence id="1:0"><text>Nice decor here</text>
         <Opinions><Opinion target="decor" from="5" to="10"/><Opinion target="NULL" from="0" to="0"/>
         <Opinion target="decor" from="5" to="10"/></Opinions></sentence></sentences></Review></Reviews>)"));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.sentences()[0].gold_aspects, (std::vector<CharSpan>{{5, 10}}));
}

TEST(AttachAnnotations, XmlPlusJsonl) {
  auto in = open_input(data_path("semeval_mini.xml"));
  const Corpus xml = parse_semeval_xml(in, "mini");
  const Corpus ann = testing::load_fixture("semeval_mini_annotations.jsonl");
  const Corpus merged = attach_annotations(xml, ann);
  ASSERT_EQ(merged.size(), 3u);
  EXPECT_EQ(merged.domain_name(), "mini");
  // battery life -> tokens 1..2; pizza is token 2; "Fish & chips" -> tokens 0..2
  EXPECT_EQ(merged.sentences()[0].gold_token_spans, (std::vector<TokenSpan>{{1, 3}}));
  EXPECT_EQ(merged.sentences()[1].gold_token_spans, (std::vector<TokenSpan>{{2, 3}}));
  EXPECT_EQ(merged.sentences()[2].gold_token_spans, (std::vector<TokenSpan>{{0, 3}}));
  EXPECT_EQ(merged.sentences()[0].dependencies, ann.sentences()[0].dependencies);
}

TEST(AttachAnnotations, PartialOverlapRoundsOutward) {
  const Corpus xml = parse_semeval_xml(std::string_view(
      R"(<sentences><sentence id="s"><text>The battery life is great.</text>
         <aspectTerms><aspectTerm term="ttery li" from="6" to="14"/></aspectTerms></sentence></sentences>)"));
  Corpus ann = testing::load_fixture("semeval_mini_annotations.jsonl");
  std::vector<Sentence> one{ann.sentences()[0]};
  one[0].id = "s";
  const Corpus merged = attach_annotations(xml, Corpus("", one));
  EXPECT_EQ(merged.sentences()[0].gold_token_spans, (std::vector<TokenSpan>{{1, 3}}));
}

TEST(AttachAnnotations, IdenticalAnnotationsAreIdempotent) {
  const Corpus c = testing::load_fixture("ten_sentences.jsonl");
  EXPECT_EQ(attach_annotations(c, c), c);
}

TEST(AttachAnnotations, MissingIdListed) {
  auto in = open_input(data_path("semeval_mini.xml"));
  const Corpus xml = parse_semeval_xml(in);
  const Corpus ann = testing::load_fixture("semeval_mini_annotations.jsonl");
  std::vector<Sentence> partial(ann.sentences().begin(), ann.sentences().begin() + 2);
  try {
    attach_annotations(xml, Corpus("", partial));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("s3"), std::string::npos) << e.what();
  }
}

TEST(ComputeStats, HandCount) {
  const Corpus c = parse_annotated_jsonl(std::string_view(
      R"({"id":"1","text":"battery is good","tokens":[{"text":"battery","lemma":"battery","pos":"NOUN","start":0,"end":7},{"text":"is","lemma":"is","pos":"VERB","start":8,"end":10},{"text":"good","lemma":"good","pos":"ADJ","start":11,"end":15}],"deps":[],"aspects":[{"start":0,"end":7}]})"));
  const CorpusStats s = compute_stats(c);
  EXPECT_EQ(s.sentence_count, 1u);
  EXPECT_EQ(s.aspect_word_count, 1u);
  EXPECT_EQ(s.non_aspect_word_count, 2u);
  EXPECT_EQ(s.term_frequency, (std::map<std::string, std::size_t>{{"battery", 1}, {"is", 1}, {"good", 1}}));
}

TEST(ComputeStats, PureAndConsistent) {
  const Corpus c = testing::load_fixture("restaurant_fixture.jsonl");
  const CorpusStats a = compute_stats(c), b = compute_stats(c);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c.stats());
  std::size_t total = 0;
  for (const auto& [lemma, n] : a.term_frequency) total += n;
  EXPECT_EQ(total, a.word_count());
  EXPECT_EQ(a.sentence_count, 300u);
}

TEST(ComputeStats, MiniSemevalAfterAttach) {
  auto in = open_input(data_path("semeval_mini.xml"));
  const Corpus merged = attach_annotations(parse_semeval_xml(in), testing::load_fixture("semeval_mini_annotations.jsonl"));
  // Words: 5 + 4 + 3 ("&" and "!" are not words); aspect words: 2 + 1 + 2.
  EXPECT_EQ(merged.stats().aspect_word_count, 5u);
  EXPECT_EQ(merged.stats().non_aspect_word_count, 7u);
}

TEST(Corpus, DuplicateIdsRejected) {
  Sentence s;
  s.id = "dup";
  EXPECT_THROW(Corpus("d", std::vector<Sentence>{s, s}), ValidationError);
}

}  // namespace
}  // namespace aspectra
