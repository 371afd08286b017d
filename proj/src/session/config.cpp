#include "lbt/session/config.hpp"

#include <fmt/format.h>

#include "lbt/core/error.hpp"

namespace lbt::session {

std::string_view to_string(Condition c) {
  return c == Condition::self_practice ? "self_practice" : "learning_by_teaching";
}

Condition parse_condition(std::string_view text) {
  if (text == "learning_by_teaching" || text == "lbt") return Condition::learning_by_teaching;
  if (text == "self_practice" || text == "self") return Condition::self_practice;
  throw DomainError(fmt::format("unknown condition '{}'", text));
}

void SessionConfig::validate() const {
  learner.validate();
  if (game_id.empty()) throw DomainError("session config: game_id is empty");
  if (tutor_pseudonym.empty()) throw DomainError("session config: tutor pseudonym is empty");
  if (timeouts.prompt_after_ms <= 0 || timeouts.hint_invite_extra_ms <= 0 ||
      timeouts.abandon_after_ms <= 0 || timeouts.review_ms < 0) {
    throw DomainError("session config: timeouts must be positive");
  }
  if (timeouts.abandon_after_ms <= timeouts.prompt_after_ms + timeouts.hint_invite_extra_ms) {
    throw DomainError("session config: abandon_after_ms must exceed the hint invitation time");
  }
}

json to_json(const SessionConfig& c) {
  return {{"session_id", c.session_id},
          {"game_id", c.game_id},
          {"tutor_pseudonym", c.tutor_pseudonym},
          {"condition", to_string(c.condition)},
          {"seed", c.seed},
          {"learner", {{"alpha", c.learner.alpha}, {"initial_q", c.learner.initial_q}, {"rng_seed", c.learner.rng_seed}}},
          {"timeouts",
           {{"prompt_after_ms", c.timeouts.prompt_after_ms},
            {"hint_invite_extra_ms", c.timeouts.hint_invite_extra_ms},
            {"abandon_after_ms", c.timeouts.abandon_after_ms},
            {"review_ms", c.timeouts.review_ms}}},
          {"gesture_on_every_feedback", c.gesture_on_every_feedback},
          {"questionnaire", c.questionnaire},
          {"auto_advance", c.auto_advance}};
}

SessionConfig session_config_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("session config must be a JSON object");
  SessionConfig c;
  try {
    c.session_id = j.value("session_id", c.session_id);
    c.game_id = j.value("game_id", c.game_id);
    c.tutor_pseudonym = j.value("tutor_pseudonym", c.tutor_pseudonym);
    if (j.contains("condition")) c.condition = parse_condition(j.at("condition").get<std::string>());
    c.seed = j.value("seed", c.seed);
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      c.learner.alpha = l.value("alpha", c.learner.alpha);
      c.learner.initial_q = l.value("initial_q", c.learner.initial_q);
      c.learner.rng_seed = l.value("rng_seed", c.learner.rng_seed);
    }
    if (j.contains("timeouts")) {
      const auto& t = j.at("timeouts");
      c.timeouts.prompt_after_ms = t.value("prompt_after_ms", c.timeouts.prompt_after_ms);
      c.timeouts.hint_invite_extra_ms = t.value("hint_invite_extra_ms", c.timeouts.hint_invite_extra_ms);
      c.timeouts.abandon_after_ms = t.value("abandon_after_ms", c.timeouts.abandon_after_ms);
      c.timeouts.review_ms = t.value("review_ms", c.timeouts.review_ms);
    }
    c.gesture_on_every_feedback = j.value("gesture_on_every_feedback", c.gesture_on_every_feedback);
    c.questionnaire = j.value("questionnaire", c.questionnaire);
    c.auto_advance = j.value("auto_advance", c.auto_advance);
  } catch (const json::exception& e) {
    throw DomainError(fmt::format("session config: {}", e.what()));
  }
  return c;
}

}  // namespace lbt::session
