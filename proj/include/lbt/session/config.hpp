#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

#include "lbt/tutee/q_table.hpp"

namespace lbt::session {

using json = nlohmann::ordered_json;

enum class Condition { learning_by_teaching, self_practice };

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view text);

// All durations in milliseconds, measured from the robot's answer.
struct Timeouts {
  std::int64_t prompt_after_ms = 10'000;
  // Extra wait after the reminder before the hint invitation (cumulative:
  // the invitation fires at prompt_after_ms + hint_invite_extra_ms).
  std::int64_t hint_invite_extra_ms = 15'000;
  // Iteration abandoned as a non-response after this long.
  std::int64_t abandon_after_ms = 120'000;
  // Length of the joint review after an "incorrect" judgment.
  std::int64_t review_ms = 4'000;

  bool operator==(const Timeouts&) const = default;
};

struct SessionConfig {
  std::string session_id;  // empty: the hub assigns one
  std::string game_id;
  tutee::LearnerConfig learner;
  std::string tutor_pseudonym;
  Timeouts timeouts;
  Condition condition = Condition::learning_by_teaching;
  std::uint64_t seed = 0;  // schedule, test order and questionnaire order
  bool gesture_on_every_feedback = true;
  bool questionnaire = true;
  // Pose the next question as soon as the session is ready for it.
  bool auto_advance = true;

  // Throws DomainError on an invalid configuration.
  void validate() const;
};

json to_json(const SessionConfig& c);
// Missing keys take their defaults; unknown keys are ignored.
SessionConfig session_config_from_json(const json& j);

}  // namespace lbt::session
