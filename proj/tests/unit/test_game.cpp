#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "lbt/core/error.hpp"
#include "lbt/core/rng.hpp"
#include "lbt/game/content_pack.hpp"
#include "lbt/game/knowledge_test.hpp"
#include "lbt/game/schedule.hpp"

using namespace lbt;
using namespace lbt::game;

namespace {

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  if (pos != std::string::npos) text.replace(pos, from.size(), to);
  return text;
}

int line_of(const std::string& text, const std::string& needle) {
  const auto pos = text.find(needle);
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::vector<std::size_t> all_correct(const TestSpec& t) {
  std::vector<std::size_t> r;
  for (const auto& round : t.rounds) {
    for (const auto& item : round.items) r.push_back(item.correct);
  }
  return r;
}

}  // namespace

TEST(BodyParts, Dimensions) {
  const auto g = builtin_body_parts();
  EXPECT_EQ(g.n_states(), 5u);
  EXPECT_EQ(g.n_actions, 3u);
  EXPECT_EQ(g.iteration_count, 15u);
  for (const auto& q : g.questions) {
    ASSERT_TRUE(q.gesture_cue);
    EXPECT_TRUE(g.has_gesture(*q.gesture_cue));
  }
  const auto hand = g.find_state("hand");
  ASSERT_TRUE(hand);
  const auto& q = g.question(*hand);
  EXPECT_EQ(q.options[q.correct.value], "la main");
}

TEST(Grammar, DimensionsAndKey) {
  const auto g = builtin_grammar();
  EXPECT_EQ(g.n_states(), 6u);
  EXPECT_EQ(g.n_actions, 3u);
  const std::map<std::string, std::string> expected{{"la", "feminine"}, {"le", "masculine"}, {"une", "feminine"},
                                                    {"un", "masculine"}, {"les", "plural"},   {"des", "plural"}};
  for (const auto& [det, category] : expected) {
    const auto s = g.find_state(det);
    ASSERT_TRUE(s) << det;
    const auto& q = g.question(*s);
    EXPECT_EQ(q.options[q.correct.value], category) << det;
  }
}

TEST(ContentPack, BuiltinsRoundTrip) {
  for (const auto& g : {builtin_body_parts(), builtin_grammar()}) {
    EXPECT_TRUE(validate(g).empty());
    EXPECT_EQ(parse_content_pack(emit_content_pack(g), "emitted"), g);
  }
}

TEST(ContentPack, WrongOptionCountNamesTheState) {
  const std::string pack(builtin_body_parts_pack());
  const auto bad = replace_once(pack, "options: [la main, le pied, la tête]", "options: [la main, le pied]");
  try {
    parse_content_pack(bad, "bad.yaml");
    FAIL() << "expected ContentPackError";
  } catch (const ContentPackError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("question 'hand'"), std::string::npos) << what;
    EXPECT_NE(what.find("2 options"), std::string::npos) << what;
    ASSERT_EQ(e.diagnostics().size(), 1u);
    const int line = e.diagnostics()[0].line;
    EXPECT_GE(line, line_of(bad, "- id: hand"));
    EXPECT_LE(line, line_of(bad, "- id: head"));
    EXPECT_NE(what.find("bad.yaml:"), std::string::npos);
  }
}

TEST(ContentPack, DuplicateStateId) {
  const auto bad = replace_once(std::string(builtin_body_parts_pack()), "- id: head", "- id: hand");
  try {
    parse_content_pack(bad, "dup.yaml");
    FAIL() << "expected ContentPackError";
  } catch (const ContentPackError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate state_id 'hand'"), std::string::npos) << e.what();
  }
}

TEST(ContentPack, UndeclaredGestureAndMalformedYaml) {
  const auto bad = replace_once(std::string(builtin_body_parts_pack()), "gesture: foot", "gesture: knee");
  EXPECT_THROW(parse_content_pack(bad), ContentPackError);
  try {
    parse_content_pack("game: [unclosed", "broken.yaml");
    FAIL();
  } catch (const ContentPackError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.yaml:1:"), std::string::npos) << e.what();
  }
}

TEST(ContentPack, GrammarTestNounsMustBeUnseen) {
  const auto g = builtin_grammar();
  std::set<std::string> training;
  for (const auto& q : g.questions) training.insert(*q.noun);
  for (const auto& round : g.test_rounds) {
    for (const auto& item : round.items) {
      ASSERT_TRUE(item.noun);
      EXPECT_FALSE(training.count(*item.noun)) << *item.noun;
    }
  }
  auto bad = g;
  bad.test_rounds[0].items[0].noun = g.questions[0].noun;
  const auto diags = validate(bad);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].path, "tests.rounds[0].items[0]");
}

TEST(ContentPack, ResolveNames) {
  EXPECT_EQ(resolve_game("body").id, "body_parts");
  EXPECT_EQ(resolve_game("body_parts").id, "body_parts");
  EXPECT_EQ(resolve_game("grammar").id, "grammar");
  EXPECT_THROW(resolve_game("chess"), DomainError);
  const auto catalog = GameCatalog::with_builtins();
  EXPECT_EQ(catalog.ids(), (std::vector<std::string>{"body_parts", "grammar"}));
  EXPECT_EQ(catalog.find("nope"), nullptr);
}

TEST(Schedule, VisitCounts) {
  const auto body = builtin_body_parts();
  const auto grammar = builtin_grammar();
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    std::map<std::size_t, int> b, g;
    for (auto s : make_schedule(body, seed).order) ++b[s.value];
    for (auto s : make_schedule(grammar, seed).order) ++g[s.value];
    ASSERT_EQ(b.size(), 5u);
    for (auto& [s, c] : b) ASSERT_EQ(c, 3);
    std::multiset<int> counts;
    for (std::size_t s = 0; s < 6; ++s) counts.insert(g[s]);
    ASSERT_EQ(counts, (std::multiset<int>{2, 2, 2, 3, 3, 3}));
  }
  EXPECT_EQ(make_schedule(body, 4), make_schedule(body, 4));
  EXPECT_NE(make_schedule(body, 4).order, make_schedule(body, 5).order);
}

TEST(KnowledgeTest, BodyPartsHasFifteenItems) {
  const auto body = builtin_body_parts();
  const auto t = make_test(body, TestKind::pre, 1);
  EXPECT_EQ(t.rounds.size(), 3u);
  EXPECT_EQ(t.item_count(), 15u);
  EXPECT_EQ(body.test_item_count(), 15u);
  EXPECT_NE(make_test(body, TestKind::pre, 1), make_test(body, TestKind::post, 1));
}

TEST(KnowledgeTest, Scoring) {
  const auto t = make_test(builtin_body_parts(), TestKind::post, 3);
  auto responses = all_correct(t);
  EXPECT_EQ(score_test(t, responses).total, 15);
  std::vector<std::size_t> wrong;
  for (std::size_t i = 0; i < responses.size(); ++i) wrong.push_back((responses[i] + 1) % 3);
  EXPECT_EQ(score_test(t, wrong).total, 0);

  auto half = wrong;
  const std::size_t k = t.rounds[0].items.size();
  for (std::size_t i = 0; i < k / 2; ++i) half[i] = responses[i];
  const auto r = score_test(t, half, 1234);
  EXPECT_EQ(r.per_round_scores, (std::vector<int>{static_cast<int>(k / 2), 0, 0}));
  EXPECT_EQ(r.timestamp_ms, 1234);
  EXPECT_EQ(r.item_count, 15u);

  EXPECT_THROW(score_test(t, std::vector<std::size_t>(14, 0)), DomainError);
  EXPECT_THROW(score_test(t, std::vector<std::size_t>(15, 7)), DomainError);
}

TEST(KnowledgeTest, ScoreDoesNotDependOnPresentationOrder) {
  const auto body = builtin_body_parts();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = make_test(body, TestKind::pre, seed);
    const auto b = make_test(body, TestKind::retention, seed + 100);
    // Answer by prompt so both orders receive the same answers.
    std::map<std::string, std::size_t> pick;
    Rng rng(seed);
    for (const auto& round : a.rounds) {
      for (const auto& item : round.items) pick[round.name + item.prompt] = rng.uniform_index(2);
    }
    auto respond = [&](const TestSpec& t) {
      std::vector<std::size_t> r;
      for (const auto& round : t.rounds) {
        for (const auto& item : round.items) {
          r.push_back(pick[round.name + item.prompt] ? item.correct : (item.correct + 1) % item.options.size());
        }
      }
      return r;
    };
    EXPECT_EQ(score_test(a, respond(a)).per_round_scores, score_test(b, respond(b)).per_round_scores);
  }
}

TEST(TestKind, ParseAndPrint) {
  for (auto k : {TestKind::pre, TestKind::post, TestKind::retention}) EXPECT_EQ(parse_test_kind(to_string(k)), k);
  EXPECT_THROW(parse_test_kind("mid"), DomainError);
}
