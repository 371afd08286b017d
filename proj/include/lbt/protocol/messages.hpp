#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "lbt/game/knowledge_test.hpp"

namespace lbt::protocol {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Effects: pure data emitted by the session state machine and executed by
// UI clients and robot adapters.

enum class EyeColor { green, red, neutral };

std::string_view to_string(EyeColor c);
EyeColor parse_eye_color(std::string_view text);

struct ShowQuestion {
  std::size_t iteration = 0;  // zero-based
  std::size_t total = 0;
  std::string state_id;
  std::string prompt;
  std::vector<std::string> options;
  std::string hint;
  bool operator==(const ShowQuestion&) const = default;
};
struct RobotAnswer {
  std::size_t action = 0;
  std::string label;
  bool operator==(const RobotAnswer&) const = default;
};
struct ShowFeedbackButtons {
  bool operator==(const ShowFeedbackButtons&) const = default;
};
struct RobotSay {
  std::string text;
  bool operator==(const RobotSay&) const = default;
};
struct SetEyeColor {
  EyeColor color = EyeColor::neutral;
  bool operator==(const SetEyeColor&) const = default;
};
struct Gesture {
  std::string cue;
  bool operator==(const Gesture&) const = default;
};
struct ShowReview {
  std::size_t correct_action = 0;
  std::string label;
  bool operator==(const ShowReview&) const = default;
};
struct PromptReminder {
  bool operator==(const PromptReminder&) const = default;
};
struct InviteHint {
  bool operator==(const InviteHint&) const = default;
};
struct RobotSleep {
  bool operator==(const RobotSleep&) const = default;
};
struct ShowTest {
  game::TestSpec test;  // correct answers are stripped on the wire
  bool operator==(const ShowTest&) const = default;
};
struct ShowQuestionnaire {
  std::vector<game::QuestionnaireItem> items;  // presentation order
  bool operator==(const ShowQuestionnaire&) const = default;
};
struct SessionEnd {
  std::string status;  // "completed" or "aborted"
  bool operator==(const SessionEnd&) const = default;
};

using Effect = std::variant<ShowQuestion, RobotAnswer, ShowFeedbackButtons, RobotSay, SetEyeColor,
                            Gesture, ShowReview, PromptReminder, InviteHint, RobotSleep, ShowTest,
                            ShowQuestionnaire, SessionEnd>;
using Effects = std::vector<Effect>;

// Wire type name ("show_question", "robot_answer", ...).
std::string_view effect_type(const Effect& e);
json effect_payload(const Effect& e);
// Inverse of (effect_type, effect_payload). ShowTest decodes without answer keys.
Effect decode_effect(std::string_view type, const json& payload);

// True for effects that only a robot can perform (speech, eyes, gestures,
// sleep). These are suppressed in the self-practice condition.
bool is_robot_effect(const Effect& e);

// ---------------------------------------------------------------------------
// Events: inputs to a session.

struct FeedbackGiven {
  int h = 0;
  // Iteration the judgment refers to; when present, stale judgments for an
  // earlier iteration are rejected.
  std::optional<std::size_t> iteration;
  bool operator==(const FeedbackGiven&) const = default;
};
// Self-practice only: the tutor answers the question directly.
struct AnswerGiven {
  std::size_t action = 0;
  bool operator==(const AnswerGiven&) const = default;
};
struct HintOpened {
  bool operator==(const HintOpened&) const = default;
};
struct HintClosed {
  bool operator==(const HintClosed&) const = default;
};
struct TestResponses {
  game::TestKind kind = game::TestKind::pre;
  std::vector<std::size_t> responses;
  bool operator==(const TestResponses&) const = default;
};
struct QuestionnaireResponses {
  std::map<std::string, int> ratings;  // item id -> stars (1..5)
  bool operator==(const QuestionnaireResponses&) const = default;
};
struct ClockTick {
  bool operator==(const ClockTick&) const = default;
};

using EventBody = std::variant<FeedbackGiven, AnswerGiven, HintOpened, HintClosed, TestResponses,
                               QuestionnaireResponses, ClockTick>;

struct SessionEvent {
  std::string session_id;
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  EventBody body;
  bool operator==(const SessionEvent&) const = default;
};

std::string_view event_type(const EventBody& e);
json event_payload(const EventBody& e);
// Throws ProtocolError for unknown types or malformed payloads.
EventBody decode_event_body(std::string_view type, const json& payload);

// ---------------------------------------------------------------------------
// Envelope {type, session_id, seq, timestamp_ms, payload} and topics.

enum class Topic { to_ui, to_robot, from_client };

std::string_view to_string(Topic t);
// "lbt/v1/{session_id}/{to_ui|to_robot|from_client}"
std::string topic_name(std::string_view session_id, Topic t);

// Topics an outbound effect is published on.
std::vector<Topic> effect_topics(const Effect& e);

struct Envelope {
  std::string type;
  std::string session_id;
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  json payload = json::object();
  bool operator==(const Envelope&) const = default;
};

json to_json(const Envelope& env);
// Unknown top-level and payload fields are ignored; missing required fields
// raise ProtocolError.
Envelope parse_envelope(const json& j);
Envelope parse_envelope(std::string_view text);
inline Envelope parse_envelope(const std::string& text) { return parse_envelope(std::string_view(text)); }
inline Envelope parse_envelope(const char* text) { return parse_envelope(std::string_view(text)); }

Envelope encode_effect(std::string_view session_id, std::uint64_t seq, std::int64_t timestamp_ms,
                       const Effect& e);
Envelope encode_event(const SessionEvent& e);
SessionEvent decode_event(const Envelope& env);

}  // namespace lbt::protocol
