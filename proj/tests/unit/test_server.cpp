#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "lbt/core/error.hpp"
#include "lbt/server/http_server.hpp"
#include "lbt/session/hub.hpp"
#include "support.hpp"

using namespace lbt;
using namespace lbt::testing;
using protocol::json;

namespace {

struct Fixture {
  std::atomic<std::int64_t> now{0};
  session::Hub hub{game::GameCatalog::with_builtins()};
  server::HttpServer http{hub, [this] { return now.load(); }, 5};
  int port = http.start("127.0.0.1", 0);
  httplib::Client client{"127.0.0.1", port};

  json get(const std::string& path, int expect = 200) {
    auto res = client.Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }
  json post(const std::string& path, const json& body, int expect) {
    auto res = client.Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }
};

json create_body(const std::string& id) {
  return {{"session_id", id}, {"game_id", "body_parts"}, {"tutor_pseudonym", "3B-07"}, {"seed", 5}};
}

// Scripted tablet client: reads to_ui over HTTP, always answers truthfully
// from the content pack, rates every questionnaire item.
struct ScriptedClient {
  Fixture& f;
  std::string id;
  std::uint64_t seq = 0, seen = 0;

  void send(const protocol::EventBody& body) {
    const auto env = protocol::encode_event({id, ++seq, f.now.load(), body});
    f.post("/v1/sessions/" + id + "/events", protocol::to_json(env), 202);
  }

  void run() {
    const auto& game = *body_game();
    std::optional<protocol::ShowQuestion> question;
    std::optional<std::size_t> answer;
    for (int polls = 0; polls < 500; ++polls) {
      const auto page = f.get("/v1/sessions/" + id + "/messages?topic=to_ui&after=" + std::to_string(seen));
      for (const auto& m : page.at("messages")) {
        const auto env = protocol::parse_envelope(m);
        seen = env.seq;
        const auto effect = protocol::decode_effect(env.type, env.payload);
        f.now += 1500;
        if (const auto* t = std::get_if<protocol::ShowTest>(&effect)) {
          std::vector<std::size_t> r;
          for (const auto& round : t->test.rounds) {
            for (std::size_t i = 0; i < round.items.size(); ++i) r.push_back(0);
          }
          send(protocol::TestResponses{t->test.kind, r});
        } else if (const auto* q = std::get_if<protocol::ShowQuestion>(&effect)) {
          question = *q;
        } else if (const auto* a = std::get_if<protocol::RobotAnswer>(&effect)) {
          answer = a->action;
        } else if (std::holds_alternative<protocol::ShowFeedbackButtons>(effect)) {
          const auto& asked = game.question(*game.find_state(question->state_id));
          send(protocol::HintOpened{});
          f.now += 700;
          send(protocol::HintClosed{});
          send(protocol::FeedbackGiven{*answer == asked.correct.value ? 1 : -1, question->iteration});
        } else if (std::holds_alternative<protocol::ShowReview>(effect)) {
          f.now += 4000;
          send(protocol::ClockTick{});
        } else if (const auto* qs = std::get_if<protocol::ShowQuestionnaire>(&effect)) {
          protocol::QuestionnaireResponses r;
          for (const auto& item : qs->items) r.ratings[item.id] = 5;
          send(r);
        } else if (std::holds_alternative<protocol::SessionEnd>(effect)) {
          return;
        }
      }
    }
    FAIL() << "client did not reach the end of the session";
  }
};

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lbt_server_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Http, HealthAndGames) {
  Fixture f;
  const auto health = f.get("/healthz");
  EXPECT_EQ(health.at("status"), "ok");
  EXPECT_FALSE(health.at("version").get<std::string>().empty());
  EXPECT_EQ(health.at("sessions"), 0);
  EXPECT_EQ(f.get("/v1/games").at("games"), json::parse(R"(["body_parts","grammar"])"));
}

TEST(Http, CreateThreeListThree) {
  Fixture f;
  for (const auto* id : {"a", "b", "c"}) EXPECT_EQ(f.post("/v1/sessions", create_body(id), 201).at("session_id"), id);
  const auto list = f.get("/v1/sessions").at("sessions");
  ASSERT_EQ(list.size(), 3u);
  for (const auto& s : list) EXPECT_EQ(s.at("phase"), "test");
  EXPECT_EQ(f.get("/healthz").at("sessions"), 3);
  const auto assigned = f.post("/v1/sessions", {{"game_id", "grammar"}, {"tutor_pseudonym", "x"}}, 201);
  EXPECT_EQ(f.get("/v1/sessions/" + assigned.at("session_id").get<std::string>()).at("game_id"), "grammar");
}

TEST(Http, CreateErrors) {
  Fixture f;
  f.post("/v1/sessions", create_body("dup"), 201);
  f.post("/v1/sessions", create_body("dup"), 409);
  auto bad_game = create_body("g");
  bad_game["game_id"] = "chess";
  f.post("/v1/sessions", bad_game, 400);
  auto no_name = create_body("n");
  no_name.erase("tutor_pseudonym");
  f.post("/v1/sessions", no_name, 400);
  auto res = f.client.Post("/v1/sessions", "{oops", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST(Http, EventsAndMessages) {
  Fixture f;
  f.post("/v1/sessions", create_body("e1"), 201);
  const auto robot = f.get("/v1/sessions/e1/messages?topic=to_robot").at("messages");
  ASSERT_EQ(robot.size(), 1u);
  EXPECT_EQ(robot[0].at("type"), "robot_say");
  const auto ui = f.get("/v1/sessions/e1/messages").at("messages");
  ASSERT_EQ(ui.size(), 1u);
  const auto test = std::get<protocol::ShowTest>(protocol::decode_effect("show_test", ui[0].at("payload"))).test;

  f.now = 1000;
  const auto env = protocol::encode_event({"e1", 1, 0, protocol::TestResponses{test.kind, std::vector<std::size_t>(15, 1)}});
  EXPECT_EQ(f.post("/v1/sessions/e1/events", protocol::to_json(env), 202).at("accepted"), 1);
  const auto after = f.get("/v1/sessions/e1/messages?topic=to_ui&after=" + std::to_string(ui[0].at("seq").get<int>()));
  std::vector<std::string> types;
  for (const auto& m : after.at("messages")) types.push_back(m.at("type"));
  EXPECT_EQ(types, (std::vector<std::string>{"show_question", "robot_answer", "show_feedback_buttons"}));
  EXPECT_EQ(after.at("topic"), "lbt/v1/e1/to_ui");
  EXPECT_EQ(f.get("/v1/sessions/e1").at("phase"), "await_feedback");

  auto wrong_id = protocol::to_json(protocol::encode_event({"other", 2, 0, protocol::HintOpened{}}));
  f.post("/v1/sessions/e1/events", wrong_id, 400);
  f.post("/v1/sessions/e1/events", {{"type", "teleport"}, {"session_id", "e1"}, {"seq", 2}, {"timestamp_ms", 0}}, 400);
  f.post("/v1/sessions/e1/events", json::array(), 400);
  f.post("/v1/sessions/nope/events", wrong_id, 404);
  f.get("/v1/sessions/nope", 404);
  f.get("/v1/sessions/nope/log", 404);
  f.get("/v1/sessions/e1/messages?topic=sideways", 400);
  f.get("/v1/sessions/e1/messages?after=x", 400);
  f.post("/v1/sessions/e1/advance", json::object(), 409);
  f.post("/v1/sessions/e1/finalize", json::object(), 409);

  auto log = f.client.Get("/v1/sessions/e1/log");
  ASSERT_TRUE(log);
  EXPECT_EQ(log->get_header_value("Content-Type"), "application/x-ndjson");
  EXPECT_EQ(log->body, *f.hub.log_jsonl("e1"));
  auto transcript = f.client.Get("/v1/sessions/e1/transcript");
  ASSERT_TRUE(transcript);
  EXPECT_NE(transcript->body.find("SAY I think the answer is"), std::string::npos);
}

TEST(Http, TickerFiresReminderOnHubClock) {
  Fixture f;
  f.post("/v1/sessions", create_body("t1"), 201);
  auto [ref, fx] = session::Session::create(session::session_config_from_json(create_body("t1")), body_game(), 0);
  f.hub.deliver(protocol::SessionEvent{"t1", 1, 0, answer_current_test(ref)}, 0);
  f.now = 10'000;
  bool seen = false;
  for (int i = 0; i < 200 && !seen; ++i) {
    const auto mm = f.get("/v1/sessions/t1/messages");
    for (const auto& m : mm.at("messages")) {
      if (m.at("type").get<std::string>() == "prompt_reminder") {
        seen = true;
        EXPECT_EQ(m.at("timestamp_ms"), 10'000);
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  EXPECT_TRUE(seen);
}

TEST(Http, ScriptedClientCompletesTruthfulSession) {
  Fixture f;
  f.post("/v1/sessions", create_body("full"), 201);
  ScriptedClient{f, "full"}.run();
  const auto log = *f.hub.log("full");
  ASSERT_TRUE(log.footer);
  EXPECT_EQ(log.footer->status, "completed");
  ASSERT_EQ(log.iterations.size(), 15u);
  for (const auto& r : log.iterations) {
    EXPECT_TRUE(*r.feedback_correct);
    EXPECT_EQ(r.hint_ms, 700);
  }
  ASSERT_TRUE(log.questionnaire);
  EXPECT_EQ(log.questionnaire->ratings.size(), body_game()->questionnaire.size());
  EXPECT_EQ(*log.footer->final_greedy_accuracy, 1.0);
}

// Wall-clock hub: a hint held open for one second is logged within 100 ms.
TEST(Http, HintTimeOnSteadyClock) {
  server::SteadyClock clock;
  session::Hub hub(game::GameCatalog::with_builtins());
  server::HttpServer http(hub, [&clock] { return clock.now_ms(); }, 20);
  httplib::Client c("127.0.0.1", http.start("127.0.0.1", 0));
  ASSERT_EQ(c.Post("/v1/sessions", create_body("w").dump(), "application/json")->status, 201);
  auto [ref, fx] = session::Session::create(session::session_config_from_json(create_body("w")), body_game(), 0);
  auto post = [&](std::uint64_t seq, protocol::EventBody b) {
    const auto env = protocol::encode_event({"w", seq, 0, std::move(b)});
    return c.Post("/v1/sessions/w/events", protocol::to_json(env).dump(), "application/json")->status;
  };
  EXPECT_EQ(post(1, answer_current_test(ref)), 202);
  EXPECT_EQ(post(2, protocol::HintOpened{}), 202);
  std::this_thread::sleep_for(std::chrono::milliseconds(1000));
  EXPECT_EQ(post(3, protocol::HintClosed{}), 202);
  EXPECT_EQ(post(4, protocol::FeedbackGiven{1, 0}), 202);
  const auto log = *hub.log("w");
  ASSERT_EQ(log.iterations.size(), 1u);
  EXPECT_NEAR(static_cast<double>(log.iterations[0].hint_ms), 1000.0, 100.0);
  http.stop();
  http.stop();
}

TEST(Http, StaticAssetsMounted) {
  const auto dir = temp_dir("static");
  std::ofstream(dir / "index.html") << "<html>tablet</html>";
  session::Hub hub(game::GameCatalog::with_builtins());
  server::HttpServer http(hub, [] { return 0; }, 50, dir);
  httplib::Client c("127.0.0.1", http.start("127.0.0.1", 0));
  auto res = c.Get("/ui/index.html");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body, "<html>tablet</html>");
}

TEST(Http, BindFailureThrows) {
  session::Hub hub(game::GameCatalog::with_builtins());
  server::HttpServer a(hub, [] { return 0; });
  const int port = a.start("127.0.0.1", 0);
  server::HttpServer b(hub, [] { return 0; });
  EXPECT_THROW(b.start("127.0.0.1", port), std::runtime_error);
}

TEST(ServeConfig, KeysDefaultsAndDiagnostics) {
  ::unsetenv("LBT_LOG_DIR");
  const auto d = server::parse_serve_config("", "empty.yaml");
  EXPECT_EQ(d.host, "127.0.0.1");
  EXPECT_EQ(d.port, 8080);
  EXPECT_EQ(d.log_dir, "logs");
  EXPECT_EQ(d.tick_ms, 50);
  EXPECT_TRUE(d.auto_finalize);

  ::setenv("LBT_LOG_DIR", "/tmp/elsewhere", 1);
  EXPECT_EQ(server::parse_serve_config("", "x").log_dir, "/tmp/elsewhere");
  ::unsetenv("LBT_LOG_DIR");

  const auto c = server::parse_serve_config(
      "host: 0.0.0.0\nport: 9000\nlog_dir: out\ntick_ms: 10\nauto_finalize: false\ncontent_packs: [a.yaml, b.yaml]\n",
      "hub.yaml");
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9000);
  EXPECT_EQ(c.log_dir, "out");
  EXPECT_EQ(c.tick_ms, 10);
  EXPECT_FALSE(c.auto_finalize);
  EXPECT_EQ(c.content_packs.size(), 2u);

  auto message = [](const std::string& text) {
    try {
      server::parse_serve_config(text, "hub.yaml");
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_EQ(message("host: a\nprot: 1\n"), "hub.yaml:2: unknown key 'prot'");
  EXPECT_EQ(message("port: eighty\n"), "hub.yaml:1: key 'port' has the wrong type");
  EXPECT_NE(message("port: 70000\n").find("out of range"), std::string::npos);
  EXPECT_NE(message("tick_ms: 0\n").find("tick_ms"), std::string::npos);
  EXPECT_NE(message("- a\n- b\n").find("mapping"), std::string::npos);
  EXPECT_NE(message("port: [1\n").find("hub.yaml:"), std::string::npos);
}

// hub-cli serve in a child process: sessions created over HTTP are flushed
// as valid, aborted logs when the process receives SIGTERM.
TEST(ServeProcess, SigtermFlushesValidLogs) {
  const auto dir = temp_dir("sigterm");
  int out_pipe[2];
  ASSERT_EQ(pipe(out_pipe), 0);
  const pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    const std::string log_dir = dir.string();
    execl(LBT_HUB_CLI, "hub-cli", "--log-dir", log_dir.c_str(), "serve", "--bind", "127.0.0.1:0",
          static_cast<char*>(nullptr));
    _exit(127);
  }
  close(out_pipe[1]);
  std::string line;
  char ch = 0;
  while (read(out_pipe[0], &ch, 1) == 1 && ch != '\n') line.push_back(ch);
  ASSERT_EQ(line.rfind("listening on http://127.0.0.1:", 0), 0u) << line;
  const int port = std::stoi(line.substr(std::string("listening on http://127.0.0.1:").size()));

  httplib::Client c("127.0.0.1", port);
  auto health = c.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(json::parse(health->body).at("status"), "ok");
  for (const auto* id : {"p1", "p2", "p3"}) {
    ASSERT_EQ(c.Post("/v1/sessions", create_body(id).dump(), "application/json")->status, 201);
  }
  EXPECT_EQ(json::parse(c.Get("/v1/sessions")->body).at("sessions").size(), 3u);
  const auto hint = protocol::encode_event({"p1", 1, 0, protocol::TestResponses{game::TestKind::pre,
                                                                                 std::vector<std::size_t>(15, 2)}});
  EXPECT_EQ(c.Post("/v1/sessions/p1/events", protocol::to_json(hint).dump(), "application/json")->status, 202);

  ASSERT_EQ(kill(pid, SIGTERM), 0);
  int status = 0;
  ASSERT_EQ(waitpid(pid, &status, 0), pid);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  std::string rest;
  while (read(out_pipe[0], &ch, 1) == 1) rest.push_back(ch);
  close(out_pipe[0]);
  EXPECT_NE(rest.find("stopped on signal"), std::string::npos) << rest;

  for (const auto* id : {"p1", "p2", "p3"}) {
    std::ifstream in(dir / (std::string(id) + ".jsonl"));
    ASSERT_TRUE(in) << id;
    const auto logs = session::read_session_logs(in, id);
    ASSERT_EQ(logs.size(), 1u);
    ASSERT_TRUE(logs[0].footer);
    EXPECT_EQ(logs[0].footer->status, "aborted");
    EXPECT_TRUE(std::filesystem::exists(dir / (std::string(id) + ".transcript.txt")));
  }
  std::ifstream p1(dir / "p1.jsonl");
  EXPECT_EQ(session::read_session_logs(p1, "p1")[0].tests.size(), 1u);
  std::filesystem::remove_all(dir);
}
