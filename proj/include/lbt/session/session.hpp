#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lbt/game/game_spec.hpp"
#include "lbt/game/knowledge_test.hpp"
#include "lbt/game/schedule.hpp"
#include "lbt/protocol/messages.hpp"
#include "lbt/robot/robot.hpp"
#include "lbt/session/config.hpp"
#include "lbt/session/session_log.hpp"
#include "lbt/tutee/q_table.hpp"

namespace lbt::session {

enum class PhaseKind { intro, test, posing, await_feedback, review, questionnaire, completed, finished };

std::string_view to_string(PhaseKind p);

// State of the question currently awaiting the tutor. In self-practice the
// clock starts when the question is shown.
struct AwaitFeedback {
  StateId state;
  ActionId action;  // robot's answer (unused in self-practice)
  std::int64_t answered_at_ms = 0;
  bool prompted = false;
  bool hint_invited = false;
  std::optional<std::int64_t> hint_open_since;
  std::int64_t hint_ms = 0;
  int hint_opens = 0;
};

struct Phase {
  PhaseKind kind = PhaseKind::intro;
  game::TestKind test = game::TestKind::pre;  // meaningful in PhaseKind::test
  AwaitFeedback await;                        // meaningful in PhaseKind::await_feedback
  std::int64_t review_until_ms = 0;           // meaningful in PhaseKind::review
};

/// One tutoring session: the interaction state machine around a tutee.
///
/// Every input takes the current virtual time; the session never reads a
/// host clock. Direct calls throw ProtocolError for inputs the current phase
/// does not accept (after journaling the call and logging the error);
/// handle() logs and drops them instead.
class Session {
 public:
  static std::pair<Session, protocol::Effects> create(SessionConfig config,
                                                      std::shared_ptr<const game::GameSpec> game,
                                                      std::int64_t now_ms);

  // Poses the next scheduled question, or starts the post-test once the
  // schedule is exhausted.
  protocol::Effects advance(std::int64_t now_ms);
  protocol::Effects handle_feedback(const protocol::FeedbackGiven& fb, std::int64_t now_ms);
  protocol::Effects handle_answer(const protocol::AnswerGiven& answer, std::int64_t now_ms);
  protocol::Effects tick(std::int64_t now_ms);
  void record_hint_opened(std::int64_t now_ms);
  void record_hint_closed(std::int64_t now_ms);
  protocol::Effects submit_test(const protocol::TestResponses& responses, std::int64_t now_ms);
  protocol::Effects submit_questionnaire(const protocol::QuestionnaireResponses& responses,
                                         std::int64_t now_ms);
  protocol::Effects finalize(std::int64_t now_ms);
  // Ends the session early (hub shutdown). No-op once finished.
  protocol::Effects abort(std::int64_t now_ms);

  // Dispatches a wire event at its timestamp; rejected events yield no effects.
  protocol::Effects handle(const protocol::SessionEvent& event);

  // Earliest time at which tick() would do something.
  std::optional<std::int64_t> next_deadline() const;

  const std::string& id() const { return config_.session_id; }
  const SessionConfig& config() const { return config_; }
  const game::GameSpec& game() const { return *game_; }
  const Phase& phase() const { return phase_; }
  const tutee::Tutee& tutee() const { return tutee_; }
  const game::Schedule& schedule() const { return schedule_; }
  std::size_t iteration() const { return iteration_; }
  // The test currently shown, if any.
  const std::optional<game::TestSpec>& current_test() const { return current_test_; }
  const std::vector<game::QuestionnaireItem>& questionnaire_order() const { return questionnaire_order_; }
  const SessionLog& log() const { return log_; }
  bool finished() const { return phase_.kind == PhaseKind::finished; }
  // True once finalize() is legal.
  bool can_finalize() const;

 private:
  Session(SessionConfig config, std::shared_ptr<const game::GameSpec> game, std::int64_t now_ms);

  template <class F>
  protocol::Effects call(std::string_view type, protocol::json payload, std::int64_t now_ms, F&& body);

  void emit(protocol::Effects& out, protocol::Effect e, std::int64_t now_ms);
  std::string phrase(robot::PhraseKind kind, std::string_view answer = {}, std::string_view correct = {}) const;

  void do_advance(protocol::Effects& out, std::int64_t now_ms);
  void do_feedback(protocol::Effects& out, const protocol::FeedbackGiven& fb, std::int64_t now_ms);
  void do_answer(protocol::Effects& out, const protocol::AnswerGiven& answer, std::int64_t now_ms);
  void do_tick(protocol::Effects& out, std::int64_t now_ms);
  void do_test(protocol::Effects& out, const protocol::TestResponses& r, std::int64_t now_ms);
  void do_questionnaire(protocol::Effects& out, const protocol::QuestionnaireResponses& r,
                        std::int64_t now_ms);
  void do_end(protocol::Effects& out, std::string_view status, std::int64_t now_ms);

  void show_test(protocol::Effects& out, game::TestKind kind, std::int64_t now_ms);
  void close_hint(std::int64_t now_ms);
  void finish_iteration(protocol::Effects& out, std::int64_t now_ms);
  void after_post_test(protocol::Effects& out, std::int64_t now_ms);
  void log_error(std::string_view call, std::string_view message, std::int64_t now_ms);
  [[noreturn]] void reject(std::string_view what) const;

  SessionConfig config_;
  std::shared_ptr<const game::GameSpec> game_;
  tutee::Tutee tutee_;
  game::Schedule schedule_;
  Phase phase_;
  std::size_t iteration_ = 0;
  std::optional<game::TestSpec> current_test_;
  std::vector<game::QuestionnaireItem> questionnaire_order_;
  std::vector<protocol::FeedbackGiven> queued_feedback_;
  std::size_t non_responses_ = 0;
  std::int64_t last_ms_ = 0;
  SessionLog log_;
};

// Re-runs a logged session from its header and journal. For any session,
// to_jsonl(replay(s.log(), game).log()) == to_jsonl(s.log()).
Session replay(const SessionLog& log, std::shared_ptr<const game::GameSpec> game);

// Calls tick() at every deadline up to and including `until_ms` and returns
// the collected effects. Deadlines are hit exactly, whatever the caller's
// tick granularity.
protocol::Effects advance_clock(Session& session, std::int64_t until_ms);

}  // namespace lbt::session
