#include <gtest/gtest.h>

#include <filesystem>

#include "aspectra/summary.hpp"
#include "test_support.hpp"

namespace aspectra {
namespace {

using testing::make_sentence;
constexpr Pos N = Pos::noun, A = Pos::adj, V = Pos::verb, D = Pos::adv;

Sentence simple(const std::string& id, const std::string& noun, const std::string& adj,
                std::optional<std::string> modifier = std::nullopt) {
  std::vector<testing::Tok> toks{{noun, noun, N, 2, "nsubj"}, {"is", "be", V, 2, "cop"}};
  if (modifier) {
    toks[0].head = 3;
    toks[1].head = 3;
    toks.push_back({*modifier, *modifier, D, 3, "advmod"});
  }
  toks.push_back({adj, adj, A, -1, "root"});
  return make_sentence(id, toks);
}

TEST(ExtractOpinionPairs, BatterySentence) {
  const Corpus c = testing::load_fixture("opinion_pair.jsonl");
  const auto tuples = extract_opinion_pairs(c.sentences()[0], {"battery", "screen quality"});
  ASSERT_EQ(tuples.size(), 2u);
  EXPECT_EQ(tuples[0], (OpinionTuple{"battery", "good", "very", "op1", std::nullopt}));
  EXPECT_EQ(tuples[1], (OpinionTuple{"screen quality", "poor", std::nullopt, "op1", std::nullopt}));
  const auto lex = default_lexicon();
  EXPECT_EQ(score_opinion(tuples[0], lex).score, 4);
  EXPECT_EQ(score_opinion(tuples[1], lex).score, 1);
}

TEST(ExtractOpinionPairs, NoAdjectivalLinkGivesNothing) {
  const Corpus c = testing::load_fixture("opinion_pair.jsonl");
  EXPECT_TRUE(extract_opinion_pairs(c.sentences()[1], {"staff", "food"}).empty());
  EXPECT_EQ(find_aspects(c.sentences()[1], {"staff", "food"}).size(), 2u);
}

TEST(ExtractOpinionPairs, ComplementHop) {
  // "service seems slow": nsubj -> seems (VERB), xcomp -> slow (ADJ)
  const Sentence s = make_sentence("c", {{"service", "service", N, 1, "nsubj"},
                                         {"seems", "seem", V, -1, "root"},
                                         {"slow", "slow", A, 1, "xcomp"}});
  const auto tuples = extract_opinion_pairs(s, {"service"});
  ASSERT_EQ(tuples.size(), 1u);
  EXPECT_EQ(tuples[0].opinion_word, "slow");
}

TEST(FindAspects, LongestMatchWithoutOverlap) {
  const Sentence s = make_sentence("f", {{"wine", "wine", N, 1, "compound"},
                                         {"list", "list", N, -1, "root"},
                                         {"wine", "wine", N, 1, "dep"}});
  const auto m = find_aspects(s, {"wine", "wine list", "list"});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].aspect, "wine list");
  EXPECT_EQ(m[0].span, (TokenSpan{0, 2}));
  EXPECT_EQ(m[1].aspect, "wine");
}

TEST(FindAspects, MatchesLemmasCaseInsensitively) {
  const Sentence s = make_sentence("g", {{"Pizzas", "pizza", N, -1, "root"}});
  EXPECT_EQ(find_aspects(s, {"pizza"}).size(), 1u);
  EXPECT_TRUE(find_aspects(s, {"pizzas"}).empty());
}

TEST(ScoreOpinion, ModifierRules) {
  const auto lex = default_lexicon();
  auto score = [&](const char* word, std::optional<std::string> mod) {
    return *score_opinion({"a", word, std::move(mod), "s", std::nullopt}, lex).score;
  };
  EXPECT_EQ(score("good", std::nullopt), 3);
  EXPECT_EQ(score("good", "very"), 4);
  EXPECT_EQ(score("excellent", "very"), 4);
  EXPECT_EQ(score("poor", "very"), 0);
  EXPECT_EQ(score("terrible", "very"), 0);
  EXPECT_EQ(score("good", "slightly"), 2);
  EXPECT_EQ(score("poor", "slightly"), 2);
  EXPECT_EQ(score("okay", "very"), 2);
  EXPECT_EQ(score("zorbish", std::nullopt), 2);
  EXPECT_EQ(score("good", "here"), 3);
}

TEST(ScoreOpinion, AlwaysInRange) {
  const auto lex = default_lexicon();
  std::vector<std::optional<std::string>> mods{std::nullopt};
  for (const auto& m : lex.intensifiers) mods.push_back(m);
  for (const auto& m : lex.diminishers) mods.push_back(m);
  for (const auto& [word, base] : lex.base_scores)
    for (const auto& m : mods) {
      const int s = apply_modifier(base, m, lex);
      EXPECT_GE(s, 0);
      EXPECT_LE(s, kMaxScore);
    }
}

TEST(Summarize, FoodAggregation) {
  const Corpus c("d", {simple("1", "food", "good"), simple("2", "food", "good", "very"), simple("3", "food", "great"),
                       simple("4", "staff", "friendly")});
  const AspectSummary s = summarize(c, {"food", "staff", "decor"}, default_lexicon());
  ASSERT_EQ(s.aspects.size(), 3u);
  const AspectEntry& food = s.aspects[0];
  EXPECT_EQ(food.aspect, "food");
  EXPECT_EQ(food.frequency, 3u);
  EXPECT_EQ(food.tuple_count(), 3u);
  EXPECT_EQ(food.counts, (std::array<std::size_t, 5>{0, 0, 0, 2, 1}));
  EXPECT_NEAR(*food.mean(), 10.0 / 3.0, 1e-12);
  EXPECT_EQ(s.aspects[1].aspect, "staff");
  // Never matched: still listed, zero frequency, no mean.
  EXPECT_EQ(s.aspects[2].aspect, "decor");
  EXPECT_EQ(s.aspects[2].frequency, 0u);
  EXPECT_FALSE(s.aspects[2].mean());
}

TEST(Summarize, EveryTupleIsCountedExactlyOnce) {
  const Corpus c = testing::load_fixture("restaurant_fixture.jsonl");
  const std::vector<std::string> aspects{"food", "service", "staff", "pizza", "wine list", "price", "waiter"};
  const AspectSummary s = summarize(c, aspects, default_lexicon());
  std::size_t total = 0;
  for (const auto& e : s.aspects) {
    total += e.tuple_count();
    EXPECT_LE(e.tuple_count(), e.frequency);
  }
  EXPECT_EQ(total, s.tuples.size());
  EXPECT_EQ(s.aspects.size(), aspects.size());
  for (std::size_t i = 1; i < s.aspects.size(); ++i) EXPECT_GE(s.aspects[i - 1].frequency, s.aspects[i].frequency);
  for (const auto& t : s.tuples) ASSERT_TRUE(t.score.has_value());
}

TEST(Summarize, EmptyInputs) {
  EXPECT_TRUE(summarize(Corpus("d", {}), {"food"}, default_lexicon()).tuples.empty());
  EXPECT_TRUE(summarize(testing::load_fixture("opinion_pair.jsonl"), {}, default_lexicon()).aspects.empty());
}

TEST(Export, TopNAndNullMean) {
  const Corpus c("d", {simple("1", "food", "good"), simple("2", "food", "bad"), simple("3", "decor", "nice")});
  const AspectSummary s = summarize(c, {"food", "decor", "view"}, default_lexicon());
  const auto j = polarity_json(s, 2);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["aspect"], "food");
  EXPECT_EQ(j[0]["counts"], nlohmann::json::parse("[0,1,0,1,0]"));
  EXPECT_EQ(j[0]["mean"], 2.0);
  EXPECT_EQ(polarity_json(s, 10)[2]["mean"], nullptr);

  const auto dir = std::filesystem::temp_directory_path() / "aspectra_summary_test";
  std::filesystem::create_directories(dir);
  const SummaryPaths paths{(dir / "f.csv").string(), (dir / "p.json").string()};
  export_summary(s, 10, paths);
  EXPECT_EQ(testing::read_file(paths.frequency_csv), "aspect,count\nfood,2\ndecor,1\nview,0\n");
  EXPECT_EQ(nlohmann::json::parse(testing::read_file(paths.polarity_json)).size(), 3u);
  std::filesystem::remove_all(dir);
}

TEST(Lexicon, ParseFormatAndErrors) {
  const auto lex = parse_lexicon(std::string_view("# c\n[scores]\nyummy 4\nmeh 1\n[intensifiers]\nsuper\n[diminishers]\nkinda\n"));
  EXPECT_EQ(lex.score_of("yummy"), 4);
  EXPECT_EQ(lex.score_of("unknown"), kNeutralScore);
  EXPECT_TRUE(lex.intensifiers.contains("super"));
  EXPECT_TRUE(lex.diminishers.contains("kinda"));
  EXPECT_THROW(parse_lexicon(std::string_view("[scores]\nbad 7\n")), ParseError);
  EXPECT_THROW(parse_lexicon(std::string_view("[colors]\n")), ParseError);
  EXPECT_THROW(load_lexicon("/nonexistent/lexicon.txt"), ValidationError);
}

TEST(Lexicon, ShippedFileEqualsBundledDefault) {
  const auto shipped = load_lexicon(std::string(ASPECTRA_TEST_DATA_DIR) + "/../../data/opinion_lexicon.txt");
  const auto bundled = default_lexicon();
  EXPECT_EQ(shipped.base_scores, bundled.base_scores);
  EXPECT_EQ(shipped.intensifiers, bundled.intensifiers);
  EXPECT_EQ(shipped.diminishers, bundled.diminishers);
}

}  // namespace
}  // namespace aspectra
