#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "lbt/analysis/report.hpp"
#include "lbt/analysis/scores.hpp"
#include "lbt/core/error.hpp"
#include "lbt/game/content_pack.hpp"
#include "lbt/sim/tutor_sim.hpp"

using namespace lbt;
using namespace lbt::analysis;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Rows that are not comments, header excluded.
std::vector<std::vector<std::string>> table(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  bool header = false;
  for (const auto& line : lines_of(csv)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    out.push_back(csv_split(line));
  }
  return out;
}

struct Dataset {
  std::vector<session::SessionLog> logs;
  std::vector<ScoreRow> scores;
};

const Dataset& two_condition_dataset() {
  static const Dataset d = [] {
    Dataset d;
    sim::BatchOptions opt;
    opt.keep_logs = true;
    std::uint64_t seed = 40;
    for (const auto& game : {game::builtin_body_parts(), game::builtin_grammar()}) {
      for (auto c : {session::Condition::learning_by_teaching, session::Condition::self_practice}) {
        opt.condition = c;
        auto b = sim::run_batch(game, {}, {}, 12, ++seed, opt);
        d.logs.insert(d.logs.end(), b.logs.begin(), b.logs.end());
        d.scores.insert(d.scores.end(), b.scores.begin(), b.scores.end());
      }
    }
    return d;
  }();
  return d;
}

const Provenance kProv{"9.9.9", 77, "abc123"};

}  // namespace

TEST(Csv, FieldQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_split("\"a,b\",\"say \"\"hi\"\"\",,x"), (std::vector<std::string>{"a,b", "say \"hi\"", "", "x"}));
  EXPECT_THROW(csv_split("\"open"), DataError);
}

TEST(Scores, RoundTrip) {
  const std::vector<ScoreRow> rows{{"3B-07", "s1", "learning_by_teaching", "body_parts", 5, 9, 7, 15},
                                   {"4A,12", "s2", "self_practice", "body_parts", 6, 6, std::nullopt, 15},
                                   {"quote\"d", "s3", "self_practice", "grammar", 0, 15, 15, 15}};
  const std::vector<std::string> comment{"tool_version=1 seed=3 input_digest=ff"};
  const auto text = write_scores_csv(rows, comment);
  EXPECT_EQ(lines_of(text).at(0), "# tool_version=1 seed=3 input_digest=ff");
  EXPECT_EQ(lines_of(text).at(1), kScoresHeader);
  std::istringstream in(text);
  EXPECT_EQ(read_scores_csv(in, "scores.csv"), rows);
}

TEST(Scores, SimulatedScoresRoundTrip) {
  const auto& d = two_condition_dataset();
  const auto text = write_scores_csv(d.scores);
  std::istringstream in(text);
  EXPECT_EQ(read_scores_csv(in, "x"), d.scores);
  EXPECT_EQ(d.scores.size(), 48u);
}

TEST(Scores, ErrorsNameTheLine) {
  const auto fails = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      read_scores_csv(in, "s.csv");
      ADD_FAILURE() << "accepted: " << text;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  const std::string h = std::string(kScoresHeader) + "\n";
  fails("", "missing header");
  fails("a,b\n", "s.csv:1:");
  fails(h + "p,s,c,g,1,2,,15\np,s,c,g,1\n", "s.csv:3: expected 8 fields");
  fails(h + "p,s,c,g,x,2,,15\n", "s.csv:2: column 'pre'");
  fails(h + "p,s,c,g,1,16,,15\n", "outside");
  fails("# note\n" + h + "p,s,c,g,1,2,-1,15\n", "s.csv:3:");
}

TEST(Scores, FromLogsMatchTests) {
  const auto& d = two_condition_dataset();
  const auto rows = scores_from_logs(d.logs);
  ASSERT_EQ(rows.size(), d.logs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].session_id, d.logs[i].session_id());
    EXPECT_EQ(rows[i].pre, d.logs[i].test(game::TestKind::pre)->result.total);
    EXPECT_EQ(rows[i].post, d.logs[i].test(game::TestKind::post)->result.total);
    EXPECT_FALSE(rows[i].retention);
  }
  const auto g = gain_records(d.scores);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(g[i].knowledge_gain, d.scores[i].post - d.scores[i].pre);
    ASSERT_TRUE(g[i].retention_gain);
    EXPECT_EQ(*g[i].retention_gain, *d.scores[i].retention - d.scores[i].pre);
  }
}

TEST(Report, OneMetricRowPerMetricGameCondition) {
  const auto& d = two_condition_dataset();
  const auto r = build_report(d.logs, d.scores, kProv);
  std::set<std::vector<std::string>> keys;
  std::set<std::string> metrics;
  for (const auto& row : table(r.metrics_csv)) {
    ASSERT_EQ(row.size(), 10u);
    EXPECT_TRUE(keys.insert({row[0], row[1], row[2]}).second) << row[0] << row[1] << row[2];
    metrics.insert(row[0]);
  }
  // Accuracy metrics exist only where the robot answers.
  EXPECT_EQ(keys.size(), 2u * 2u * 2u + 2u * 2u);
  EXPECT_EQ(metrics, (std::set<std::string>{"feedback_accuracy", "final_greedy_accuracy", "time_ms", "hint_ms"}));
  for (const auto& game : {"body_parts", "grammar"}) {
    for (const auto& cond : {"learning_by_teaching", "self_practice"}) {
      EXPECT_TRUE(keys.count({"time_ms", game, cond}));
      EXPECT_TRUE(keys.count({"hint_ms", game, cond}));
    }
    EXPECT_TRUE(keys.count({"feedback_accuracy", game, "learning_by_teaching"}));
    EXPECT_FALSE(keys.count({"feedback_accuracy", game, "self_practice"}));
  }
}

TEST(Report, SectionsAndProvenance) {
  const auto& d = two_condition_dataset();
  const auto r = build_report(d.logs, d.scores, kProv);
  for (const auto* heading : {"## Behavioral metrics", "## First vs last 5 iterations", "## Knowledge and retention gains",
                              "## Median split on pre-test score", "## Between-condition comparisons"}) {
    EXPECT_NE(r.markdown.find(heading), std::string::npos) << heading;
  }
  EXPECT_NE(r.markdown.find("tool version: 9.9.9"), std::string::npos);
  EXPECT_NE(r.markdown.find("seed: 77"), std::string::npos);
  EXPECT_NE(r.markdown.find("abc123"), std::string::npos);
  for (const auto* csv : {&r.metrics_csv, &r.windows_csv, &r.gains_csv, &r.comparisons_csv, &r.median_split_csv}) {
    EXPECT_EQ(lines_of(*csv).at(0), "# tool_version=9.9.9 seed=77 input_digest=abc123");
  }
}

TEST(Report, FirstVersusLastFiveForLbtLogs) {
  const auto& d = two_condition_dataset();
  const auto r = build_report(d.logs, d.scores, kProv);
  std::size_t lbt_rows = 0;
  for (const auto& row : table(r.windows_csv)) {
    if (row[1] != "learning_by_teaching") continue;
    ++lbt_rows;
    EXPECT_EQ(row[4], "5");
    EXPECT_EQ(row[5], "12");
    EXPECT_EQ(row[6], "0");
    EXPECT_FALSE(row[11].empty());
  }
  EXPECT_EQ(lbt_rows, 2u * 2u * 2u);  // game x metric x mode
}

TEST(Report, GainsAndMedianSplitRows) {
  const auto& d = two_condition_dataset();
  const auto r = build_report(d.logs, d.scores, kProv);
  EXPECT_EQ(table(r.gains_csv).size(), d.scores.size());
  const auto split = table(r.median_split_csv);
  EXPECT_EQ(split.size(), d.scores.size());
  for (const auto& row : split) EXPECT_TRUE(row[5] == "low" || row[5] == "high") << row[5];
  EXPECT_FALSE(table(r.comparisons_csv).empty());
}

TEST(Report, OrderIndependentAndDeterministic) {
  const auto& d = two_condition_dataset();
  const auto a = build_report(d.logs, d.scores, kProv);
  auto logs = d.logs;
  auto scores = d.scores;
  std::reverse(logs.begin(), logs.end());
  std::reverse(scores.begin(), scores.end());
  const auto b = build_report(logs, scores, kProv);
  EXPECT_EQ(a.markdown, b.markdown);
  EXPECT_EQ(a.metrics_csv, b.metrics_csv);
  EXPECT_EQ(a.windows_csv, b.windows_csv);
  EXPECT_EQ(a.gains_csv, b.gains_csv);
  EXPECT_EQ(a.comparisons_csv, b.comparisons_csv);
  EXPECT_EQ(a.median_split_csv, b.median_split_csv);
}

TEST(Report, GainsFallBackToLogTests) {
  const auto& d = two_condition_dataset();
  const auto r = build_report(d.logs, {}, kProv);
  EXPECT_EQ(table(r.gains_csv).size(), d.logs.size());
  EXPECT_THROW(build_report({}, {}, kProv), DataError);
}
