#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lbt/core/version.hpp"
#include "lbt/session/session_log.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lbt-cli-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run hub_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const auto dir = scratch("run" + std::to_string(++counter));
  const auto cmd = env + " " + LBT_HUB_CLI + " " + args + " >" + (dir / "out").string() + " 2>" + (dir / "err").string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir / "out");
  r.err = slurp(dir / "err");
  return r;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

const char* kOutputs[] = {"sessions.jsonl", "scores.csv", "batch.json"};
const char* kReportFiles[] = {"report.md", "metrics.csv", "windows.csv", "gains.csv", "comparisons.csv",
                              "median_split.csv"};

}  // namespace

TEST(Cli, SimulatePerfectFeedbackExample) {
  const auto dir = scratch("sim-perfect");
  const auto r = hub_cli("simulate --game body --accuracy 1.0 --sessions 100 --seed 7 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "final accuracy 1.000")) << r.out;
  EXPECT_TRUE(contains(r.out, "100 sessions, seed 7")) << r.out;
  for (const auto* f : kOutputs) EXPECT_TRUE(fs::exists(dir / f)) << f;
  std::ifstream in(dir / "sessions.jsonl");
  EXPECT_EQ(lbt::session::read_session_logs(in, "sessions.jsonl").size(), 100u);
}

TEST(Cli, SimulateRerunIsByteIdentical) {
  const auto a = scratch("sim-a");
  const auto b = scratch("sim-b");
  const auto c = scratch("sim-c");
  const std::string args = "simulate --game grammar --accuracy 0.74 --sessions 30 --condition both --seed 21 --out ";
  const auto ra = hub_cli(args + a.string());
  const auto rb = hub_cli(args + b.string());
  const auto rc = hub_cli(args + c.string() + " --workers 3");
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(rb.code, 0) << rb.err;
  ASSERT_EQ(rc.code, 0) << rc.err;
  for (const auto* f : kOutputs) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(c / f)) << f;
  }
  EXPECT_FALSE(slurp(a / "sessions.jsonl").empty());
}

TEST(Cli, SimulateUsageErrors) {
  for (const std::string bad : {"--accuracy 1.2", "--accuracy -0.1", "--sessions 0", "--condition robots", "--alpha 2",
                                "--bogus"}) {
    const auto r = hub_cli("simulate " + bad + " --out " + scratch("bad").string());
    EXPECT_EQ(r.code, 2) << bad;
    EXPECT_FALSE(r.err.empty()) << bad;
  }
  EXPECT_EQ(hub_cli("").code, 2);
  EXPECT_EQ(hub_cli("simulate --game nosuch --out " + scratch("nogame").string()).code, 2);
  EXPECT_EQ(hub_cli("simulate --alpha 0 --out " + scratch("alpha0").string()).code, 2);
}

TEST(Cli, ProvenanceInEveryOutput) {
  const auto dir = scratch("prov");
  ASSERT_EQ(hub_cli("simulate --sessions 12 --condition both --seed 314 --out " + dir.string()).code, 0);
  const std::string version = std::string("tool_version=") + std::string(lbt::kToolVersion) + " seed=314 input_digest=";
  EXPECT_TRUE(contains(slurp(dir / "scores.csv"), version));
  const auto batch = slurp(dir / "batch.json");
  EXPECT_TRUE(contains(batch, "\"seed\": 314"));
  EXPECT_TRUE(contains(batch, "\"input_digest\""));
  EXPECT_TRUE(contains(slurp(dir / "sessions.jsonl"), std::string(lbt::kToolVersion)));

  const auto rep = scratch("prov-report");
  ASSERT_EQ(hub_cli("--seed 314 analyze " + dir.string() + " --report " + (rep / "report.md").string()).code, 0);
  EXPECT_TRUE(contains(slurp(rep / "report.md"), "seed: 314"));
  for (const auto* f : kReportFiles) {
    if (std::string(f) == "report.md") continue;
    EXPECT_EQ(slurp(rep / f).rfind("# " + version, 0), 0u) << f;
  }
}

TEST(Cli, AnalyzeSimulateOutput) {
  const auto dir = scratch("an-in");
  ASSERT_EQ(hub_cli("simulate --sessions 20 --condition both --seed 5 --out " + dir.string()).code, 0);
  const auto rep = scratch("an-out");
  const auto r = hub_cli("analyze " + dir.string() + " --report " + (rep / "report.md").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "40 session log(s), 40 score row(s)")) << r.out;
  for (const auto* f : kReportFiles) EXPECT_TRUE(fs::exists(rep / f)) << f;
  const auto md = slurp(rep / "report.md");
  for (const auto* s : {"feedback_accuracy", "time_ms", "hint_ms", "First vs last 5", "gains", "Median split"}) {
    EXPECT_TRUE(contains(md, s)) << s;
  }

  const auto rep2 = scratch("an-out2");
  ASSERT_EQ(hub_cli("analyze " + dir.string() + " --report " + (rep2 / "report.md").string()).code, 0);
  for (const auto* f : kReportFiles) EXPECT_EQ(slurp(rep / f), slurp(rep2 / f)) << f;
}

TEST(Cli, AnalyzeTruncatedLineNamesTheLine) {
  const auto dir = scratch("trunc");
  ASSERT_EQ(hub_cli("simulate --sessions 2 --condition lbt --seed 9 --out " + dir.string()).code, 0);
  const auto text = slurp(dir / "sessions.jsonl");
  std::size_t pos = 0;
  for (int line = 1; line < 7; ++line) pos = text.find('\n', pos) + 1;
  const auto end = text.find('\n', pos);
  std::ofstream(dir / "sessions.jsonl", std::ios::binary) << text.substr(0, pos + (end - pos) / 2) << '\n'
                                                          << text.substr(end + 1);
  const auto r = hub_cli("analyze " + dir.string() + " --report " + (scratch("trunc-out") / "r.md").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(contains(r.err, "sessions.jsonl:7")) << r.err;
}

TEST(Cli, AnalyzeEmptyDirectoryIsNoData) {
  const auto empty = scratch("empty");
  const auto r = hub_cli("analyze " + empty.string() + " --report " + (scratch("empty-out") / "r.md").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(contains(r.err, "no data")) << r.err;
  const auto missing = hub_cli("analyze " + (empty / "nope").string() + " --report r.md");
  EXPECT_EQ(missing.code, 3);
}

TEST(Cli, AnalyzeBadScoresCsv) {
  const auto dir = scratch("badcsv");
  std::ofstream(dir / "scores.csv") << "pseudonym,session_id,condition,game,pre,post,retention,item_count\n"
                                    << "a,b,c,d,1,2,,15\n"
                                    << "a,b,c,d,one,2,,15\n";
  const auto r = hub_cli("analyze " + dir.string() + " --report " + (scratch("badcsv-out") / "r.md").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(contains(r.err, "scores.csv:3")) << r.err;
}

TEST(Cli, ExportCsvMatchesSimulatedScores) {
  const auto dir = scratch("export");
  ASSERT_EQ(hub_cli("simulate --sessions 6 --condition both --seed 3 --out " + dir.string()).code, 0);
  const auto out = scratch("export-out") / "scores.csv";
  const auto r = hub_cli("export-csv " + (dir / "sessions.jsonl").string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "12 row(s)")) << r.out;
  std::istringstream lines(slurp(out));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("# tool_version=", 0), 0u);
  EXPECT_EQ(hub_cli("export-csv " + scratch("export-empty").string() + " --out x.csv").code, 3);
}

TEST(Cli, ContentValidate) {
  auto r = hub_cli("content validate body_parts grammar");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "body_parts: ok (body_parts, 5 questions, 3 options)")) << r.out;
  r = hub_cli(std::string("content-validate ") + LBT_SOURCE_DIR + "/content/grammar.yaml");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "grammar, 6 questions, 3 options")) << r.out;

  const auto dir = scratch("pack");
  auto text = slurp(fs::path(LBT_SOURCE_DIR) / "content/body_parts.yaml");
  text.replace(text.find("n_actions: 3"), 12, "n_actions: 4");
  std::ofstream(dir / "broken.yaml") << text;
  r = hub_cli("content validate " + (dir / "broken.yaml").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(contains(r.err, "broken.yaml")) << r.err;
  EXPECT_EQ(hub_cli("content validate").code, 2);
}

TEST(Cli, LogDirFromEnvironment) {
  const auto dir = scratch("envlogs");
  const auto r = hub_cli("simulate --sessions 2", "LBT_LOG_DIR=" + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "sessions.jsonl"));
}

TEST(Cli, VersionAndHelp) {
  const auto v = hub_cli("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_TRUE(contains(v.out, std::string(lbt::kToolVersion)));
  const auto h = hub_cli("--help");
  EXPECT_EQ(h.code, 0);
  for (const auto* verb : {"serve", "simulate", "analyze", "export-csv", "content"}) EXPECT_TRUE(contains(h.out, verb));
}
