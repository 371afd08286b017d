#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lbt/game/knowledge_test.hpp"
#include "lbt/protocol/messages.hpp"
#include "lbt/session/config.hpp"

namespace lbt::session {

inline constexpr std::string_view kLogSchema = "lbt-session-log/1";

struct SessionHeader {
  std::string tool_version;
  std::string session_id;
  SessionConfig config;
  std::string game_title;
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t iteration_count = 0;
  std::vector<std::string> schedule;  // state ids in posing order
  std::int64_t created_at_ms = 0;
};

// One posed question and its outcome. `h_given` and `feedback_correct` are
// empty for self-practice iterations (the tutor answered) and for
// non-responses.
struct IterationRecord {
  std::string session_id;
  std::size_t index = 0;
  std::string state_id;
  std::size_t robot_action = 0;
  bool robot_correct = false;
  std::optional<int> h_given;
  std::optional<bool> feedback_correct;
  std::int64_t answered_at_ms = 0;
  std::int64_t time_ms = 0;  // robot's answer -> tutor's feedback
  std::int64_t hint_ms = 0;  // total time the hint panel was open
  int hint_opens = 0;
  bool prompted = false;
  bool hint_invited = false;
  bool responded = true;
  std::string answered_by = "robot";  // "robot" or "tutor"
  std::optional<double> greedy_accuracy;  // tutee's after the update

  bool operator==(const IterationRecord&) const = default;
};

struct TestRecord {
  std::string session_id;
  game::TestResult result;
  std::vector<std::size_t> responses;
};

struct QuestionnaireRecord {
  std::string session_id;
  std::int64_t at_ms = 0;
  std::vector<std::string> order;
  std::map<std::string, int> ratings;
};

struct ProtocolErrorRecord {
  std::string session_id;
  std::int64_t at_ms = 0;
  std::string call;
  std::string message;
};

// Inbound call as received: wire events plus the "advance", "finalize" and
// "abort" calls. Replaying the journal reproduces the session.
struct JournalRecord {
  std::string session_id;
  std::uint64_t seq = 0;
  std::int64_t at_ms = 0;
  std::string type;
  protocol::json payload = protocol::json::object();
};

struct EffectRecord {
  std::string session_id;
  std::uint64_t seq = 0;
  std::int64_t at_ms = 0;
  protocol::Effect effect;
};

struct SessionFooter {
  std::string session_id;
  std::string status;  // "completed" or "aborted"
  std::size_t iterations = 0;
  std::size_t non_responses = 0;
  std::size_t protocol_errors = 0;
  std::optional<double> final_greedy_accuracy;
  std::string q_table;  // QTable::to_text snapshot
  std::int64_t ended_at_ms = 0;
};

struct SessionLog {
  SessionHeader header;
  std::vector<JournalRecord> journal;
  std::vector<EffectRecord> effects;
  std::vector<IterationRecord> iterations;
  std::vector<TestRecord> tests;
  std::optional<QuestionnaireRecord> questionnaire;
  std::vector<ProtocolErrorRecord> errors;
  std::optional<SessionFooter> footer;

  const std::string& session_id() const { return header.session_id; }
  Condition condition() const { return header.config.condition; }
  const std::string& game_id() const { return header.config.game_id; }
  const TestRecord* test(game::TestKind kind) const;
};

// Line-delimited records: header, journal, effects, iterations, tests,
// questionnaire, protocol errors, footer. Every record carries "record" and
// "session_id".
std::string to_jsonl(const SessionLog& log);

// SHA-256 of to_jsonl(log).
std::string log_digest(const SessionLog& log);

// Reads one or more interleaved session logs. Throws DataError naming
// `source` and the line for malformed records.
std::vector<SessionLog> read_session_logs(std::istream& in, std::string_view source);

}  // namespace lbt::session
