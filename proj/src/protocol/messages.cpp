#include "lbt/protocol/messages.hpp"

#include <fmt/format.h>

#include "lbt/core/error.hpp"

namespace lbt::protocol {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Payload field accessors that turn type/shape problems into ProtocolError.
const json& field(const json& obj, const char* key, std::string_view type) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ProtocolError(fmt::format("{}: missing field '{}'", type, key));
  }
  return obj.at(key);
}

template <class T>
T get_as(const json& obj, const char* key, std::string_view type) {
  const json& v = field(obj, key, type);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(fmt::format("{}: field '{}' has the wrong type", type, key));
  }
}

json test_to_json(const game::TestSpec& t) {
  json rounds = json::array();
  for (const auto& r : t.rounds) {
    json items = json::array();
    for (const auto& item : r.items) {
      items.push_back({{"prompt", item.prompt}, {"options", item.options}});
    }
    rounds.push_back({{"name", r.name}, {"items", std::move(items)}});
  }
  return {{"kind", game::to_string(t.kind)}, {"seed", t.seed}, {"rounds", std::move(rounds)}};
}

game::TestSpec test_from_json(const json& j, std::string_view type) {
  game::TestSpec t;
  t.kind = game::parse_test_kind(get_as<std::string>(j, "kind", type));
  t.seed = get_as<std::uint64_t>(j, "seed", type);
  for (const auto& r : field(j, "rounds", type)) {
    game::TestRound round;
    round.name = get_as<std::string>(r, "name", type);
    for (const auto& item : field(r, "items", type)) {
      game::TestItem ti;
      ti.prompt = get_as<std::string>(item, "prompt", type);
      ti.options = get_as<std::vector<std::string>>(item, "options", type);
      round.items.push_back(std::move(ti));
    }
    t.rounds.push_back(std::move(round));
  }
  return t;
}

}  // namespace

std::string_view to_string(EyeColor c) {
  switch (c) {
    case EyeColor::green: return "green";
    case EyeColor::red: return "red";
    case EyeColor::neutral: return "neutral";
  }
  return "neutral";
}

EyeColor parse_eye_color(std::string_view text) {
  if (text == "green") return EyeColor::green;
  if (text == "red") return EyeColor::red;
  if (text == "neutral") return EyeColor::neutral;
  throw ProtocolError(fmt::format("unknown eye colour '{}'", text));
}

std::string_view effect_type(const Effect& e) {
  return std::visit(
      overloaded{
          [](const ShowQuestion&) { return std::string_view("show_question"); },
          [](const RobotAnswer&) { return std::string_view("robot_answer"); },
          [](const ShowFeedbackButtons&) { return std::string_view("show_feedback_buttons"); },
          [](const RobotSay&) { return std::string_view("robot_say"); },
          [](const SetEyeColor&) { return std::string_view("eye_color"); },
          [](const Gesture&) { return std::string_view("gesture"); },
          [](const ShowReview&) { return std::string_view("show_review"); },
          [](const PromptReminder&) { return std::string_view("prompt_reminder"); },
          [](const InviteHint&) { return std::string_view("invite_hint"); },
          [](const RobotSleep&) { return std::string_view("robot_sleep"); },
          [](const ShowTest&) { return std::string_view("show_test"); },
          [](const ShowQuestionnaire&) { return std::string_view("show_questionnaire"); },
          [](const SessionEnd&) { return std::string_view("session_end"); },
      },
      e);
}

json effect_payload(const Effect& e) {
  return std::visit(
      overloaded{
          [](const ShowQuestion& q) -> json {
            return {{"iteration", q.iteration}, {"total", q.total},   {"state_id", q.state_id},
                    {"prompt", q.prompt},       {"options", q.options}, {"hint", q.hint}};
          },
          [](const RobotAnswer& a) -> json { return {{"action", a.action}, {"label", a.label}}; },
          [](const ShowFeedbackButtons&) -> json { return json::object(); },
          [](const RobotSay& s) -> json { return {{"text", s.text}}; },
          [](const SetEyeColor& c) -> json { return {{"color", to_string(c.color)}}; },
          [](const Gesture& g) -> json { return {{"cue", g.cue}}; },
          [](const ShowReview& r) -> json {
            return {{"correct_action", r.correct_action}, {"label", r.label}};
          },
          [](const PromptReminder&) -> json { return json::object(); },
          [](const InviteHint&) -> json { return json::object(); },
          [](const RobotSleep&) -> json { return json::object(); },
          [](const ShowTest& t) -> json { return test_to_json(t.test); },
          [](const ShowQuestionnaire& q) -> json {
            json items = json::array();
            for (const auto& i : q.items) {
              items.push_back({{"id", i.id}, {"subscale", i.subscale}, {"prompt", i.prompt}});
            }
            return {{"items", std::move(items)}};
          },
          [](const SessionEnd& s) -> json { return {{"status", s.status}}; },
      },
      e);
}

Effect decode_effect(std::string_view type, const json& p) {
  if (type == "show_question") {
    return ShowQuestion{get_as<std::size_t>(p, "iteration", type), get_as<std::size_t>(p, "total", type),
                        get_as<std::string>(p, "state_id", type), get_as<std::string>(p, "prompt", type),
                        get_as<std::vector<std::string>>(p, "options", type),
                        get_as<std::string>(p, "hint", type)};
  }
  if (type == "robot_answer") {
    return RobotAnswer{get_as<std::size_t>(p, "action", type), get_as<std::string>(p, "label", type)};
  }
  if (type == "show_feedback_buttons") return ShowFeedbackButtons{};
  if (type == "robot_say") return RobotSay{get_as<std::string>(p, "text", type)};
  if (type == "eye_color") return SetEyeColor{parse_eye_color(get_as<std::string>(p, "color", type))};
  if (type == "gesture") return Gesture{get_as<std::string>(p, "cue", type)};
  if (type == "show_review") {
    return ShowReview{get_as<std::size_t>(p, "correct_action", type), get_as<std::string>(p, "label", type)};
  }
  if (type == "prompt_reminder") return PromptReminder{};
  if (type == "invite_hint") return InviteHint{};
  if (type == "robot_sleep") return RobotSleep{};
  if (type == "show_test") return ShowTest{test_from_json(p, type)};
  if (type == "show_questionnaire") {
    ShowQuestionnaire q;
    for (const auto& i : field(p, "items", type)) {
      q.items.push_back({get_as<std::string>(i, "id", type), get_as<std::string>(i, "subscale", type),
                         get_as<std::string>(i, "prompt", type)});
    }
    return q;
  }
  if (type == "session_end") return SessionEnd{get_as<std::string>(p, "status", type)};
  throw ProtocolError(fmt::format("unknown effect type '{}'", type));
}

bool is_robot_effect(const Effect& e) {
  return std::holds_alternative<RobotAnswer>(e) || std::holds_alternative<RobotSay>(e) ||
         std::holds_alternative<SetEyeColor>(e) || std::holds_alternative<Gesture>(e) ||
         std::holds_alternative<RobotSleep>(e);
}

std::string_view event_type(const EventBody& e) {
  return std::visit(
      overloaded{
          [](const FeedbackGiven&) { return std::string_view("feedback_given"); },
          [](const AnswerGiven&) { return std::string_view("answer_given"); },
          [](const HintOpened&) { return std::string_view("hint_opened"); },
          [](const HintClosed&) { return std::string_view("hint_closed"); },
          [](const TestResponses&) { return std::string_view("test_responses"); },
          [](const QuestionnaireResponses&) { return std::string_view("questionnaire_responses"); },
          [](const ClockTick&) { return std::string_view("clock_tick"); },
      },
      e);
}

json event_payload(const EventBody& e) {
  return std::visit(
      overloaded{
          [](const FeedbackGiven& f) -> json {
            json j{{"h", f.h}};
            if (f.iteration) j["iteration"] = *f.iteration;
            return j;
          },
          [](const AnswerGiven& a) -> json { return {{"action", a.action}}; },
          [](const HintOpened&) -> json { return json::object(); },
          [](const HintClosed&) -> json { return json::object(); },
          [](const TestResponses& t) -> json {
            return {{"kind", game::to_string(t.kind)}, {"responses", t.responses}};
          },
          [](const QuestionnaireResponses& q) -> json {
            json ratings = json::object();
            for (const auto& [id, stars] : q.ratings) ratings[id] = stars;
            return {{"ratings", std::move(ratings)}};
          },
          [](const ClockTick&) -> json { return json::object(); },
      },
      e);
}

EventBody decode_event_body(std::string_view type, const json& p) {
  if (type == "feedback_given") {
    FeedbackGiven f{get_as<int>(p, "h", type), std::nullopt};
    if (p.contains("iteration") && !p.at("iteration").is_null()) {
      f.iteration = get_as<std::size_t>(p, "iteration", type);
    }
    return f;
  }
  if (type == "answer_given") return AnswerGiven{get_as<std::size_t>(p, "action", type)};
  if (type == "hint_opened") return HintOpened{};
  if (type == "hint_closed") return HintClosed{};
  if (type == "test_responses") {
    game::TestKind kind;
    try {
      kind = game::parse_test_kind(get_as<std::string>(p, "kind", type));
    } catch (const DomainError& e) {
      throw ProtocolError(e.what());
    }
    return TestResponses{kind, get_as<std::vector<std::size_t>>(p, "responses", type)};
  }
  if (type == "questionnaire_responses") {
    QuestionnaireResponses q;
    const json& ratings = field(p, "ratings", type);
    if (!ratings.is_object()) throw ProtocolError("questionnaire_responses: 'ratings' must be an object");
    for (const auto& [id, stars] : ratings.items()) {
      if (!stars.is_number_integer()) {
        throw ProtocolError(fmt::format("questionnaire_responses: rating for '{}' must be an integer", id));
      }
      q.ratings[id] = stars.get<int>();
    }
    return q;
  }
  if (type == "clock_tick") return ClockTick{};
  throw ProtocolError(fmt::format("unknown event type '{}'", type));
}

std::string_view to_string(Topic t) {
  switch (t) {
    case Topic::to_ui: return "to_ui";
    case Topic::to_robot: return "to_robot";
    case Topic::from_client: return "from_client";
  }
  return "to_ui";
}

std::string topic_name(std::string_view session_id, Topic t) {
  return fmt::format("lbt/v1/{}/{}", session_id, to_string(t));
}

std::vector<Topic> effect_topics(const Effect& e) {
  if (std::holds_alternative<RobotAnswer>(e) || std::holds_alternative<SessionEnd>(e)) {
    return {Topic::to_ui, Topic::to_robot};
  }
  if (is_robot_effect(e)) return {Topic::to_robot};
  return {Topic::to_ui};
}

json to_json(const Envelope& env) {
  return {{"type", env.type},
          {"session_id", env.session_id},
          {"seq", env.seq},
          {"timestamp_ms", env.timestamp_ms},
          {"payload", env.payload}};
}

Envelope parse_envelope(const json& j) {
  if (!j.is_object()) throw ProtocolError("envelope must be a JSON object");
  Envelope env;
  env.type = get_as<std::string>(j, "type", "envelope");
  env.session_id = get_as<std::string>(j, "session_id", "envelope");
  env.seq = get_as<std::uint64_t>(j, "seq", "envelope");
  env.timestamp_ms = get_as<std::int64_t>(j, "timestamp_ms", "envelope");
  env.payload = j.contains("payload") ? j.at("payload") : json::object();
  if (!env.payload.is_object()) throw ProtocolError("envelope: 'payload' must be an object");
  return env;
}

Envelope parse_envelope(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ProtocolError(fmt::format("envelope is not valid JSON: {}", e.what()));
  }
  return parse_envelope(j);
}

Envelope encode_effect(std::string_view session_id, std::uint64_t seq, std::int64_t timestamp_ms,
                       const Effect& e) {
  return Envelope{std::string(effect_type(e)), std::string(session_id), seq, timestamp_ms, effect_payload(e)};
}

Envelope encode_event(const SessionEvent& e) {
  return Envelope{std::string(event_type(e.body)), e.session_id, e.seq, e.timestamp_ms, event_payload(e.body)};
}

SessionEvent decode_event(const Envelope& env) {
  return SessionEvent{env.session_id, env.seq, env.timestamp_ms, decode_event_body(env.type, env.payload)};
}

}  // namespace lbt::protocol
