#include "lbt/session/session.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "lbt/core/error.hpp"
#include "lbt/core/rng.hpp"
#include "lbt/core/version.hpp"

namespace lbt::session {

using protocol::Effect;
using protocol::Effects;
using protocol::json;
using robot::PhraseKind;

namespace {

constexpr std::uint64_t kQuestionnaireStream = 100;

}  // namespace

std::string_view to_string(PhaseKind p) {
  switch (p) {
    case PhaseKind::intro: return "intro";
    case PhaseKind::test: return "test";
    case PhaseKind::posing: return "posing";
    case PhaseKind::await_feedback: return "await_feedback";
    case PhaseKind::review: return "review";
    case PhaseKind::questionnaire: return "questionnaire";
    case PhaseKind::completed: return "completed";
    case PhaseKind::finished: return "finished";
  }
  return "intro";
}

Session::Session(SessionConfig config, std::shared_ptr<const game::GameSpec> game, std::int64_t now_ms)
    : config_(std::move(config)),
      game_(std::move(game)),
      tutee_(*game_, config_.learner),
      schedule_(game::make_schedule(*game_, config_.seed)),
      last_ms_(now_ms) {
  auto& h = log_.header;
  h.tool_version = std::string(kToolVersion);
  h.session_id = config_.session_id;
  h.config = config_;
  h.game_title = game_->title;
  h.n_states = game_->n_states();
  h.n_actions = game_->n_actions;
  h.iteration_count = game_->iteration_count;
  for (StateId s : schedule_.order) h.schedule.push_back(game_->question(s).id);
  h.created_at_ms = now_ms;
}

std::pair<Session, Effects> Session::create(SessionConfig config, std::shared_ptr<const game::GameSpec> game,
                                            std::int64_t now_ms) {
  if (!game) throw DomainError("session needs a game");
  if (config.game_id.empty()) config.game_id = game->id;
  if (config.game_id != game->id) {
    throw DomainError(fmt::format("session config names game '{}' but '{}' was supplied", config.game_id, game->id));
  }
  if (config.session_id.empty()) throw DomainError("session id is empty");
  config.validate();

  Session s(std::move(config), std::move(game), now_ms);
  Effects out;
  s.emit(out, protocol::RobotSay{s.phrase(PhraseKind::intro)}, now_ms);
  s.show_test(out, game::TestKind::pre, now_ms);
  return {std::move(s), std::move(out)};
}

// ---------------------------------------------------------------------------

template <class F>
Effects Session::call(std::string_view type, json payload, std::int64_t now_ms, F&& body) {
  log_.journal.push_back({id(), log_.journal.size(), now_ms, std::string(type), std::move(payload)});
  Effects out;
  try {
    if (phase_.kind == PhaseKind::finished) reject("session has ended");
    if (now_ms < last_ms_) reject(fmt::format("timestamp {} precedes {}", now_ms, last_ms_));
    last_ms_ = now_ms;
    body(out);
  } catch (const ProtocolError& e) {
    log_error(type, e.what(), now_ms);
    throw;
  }
  return out;
}

void Session::reject(std::string_view what) const {
  throw ProtocolError(fmt::format("{} (phase {})", what, to_string(phase_.kind)));
}

void Session::log_error(std::string_view call, std::string_view message, std::int64_t now_ms) {
  log_.errors.push_back({id(), now_ms, std::string(call), std::string(message)});
}

void Session::emit(Effects& out, Effect e, std::int64_t now_ms) {
  if (config_.condition == Condition::self_practice && protocol::is_robot_effect(e)) return;
  log_.effects.push_back({id(), log_.effects.size(), now_ms, e});
  out.push_back(std::move(e));
}

std::string Session::phrase(PhraseKind kind, std::string_view answer, std::string_view correct) const {
  if (config_.condition == Condition::self_practice) return {};
  return robot::script_phrase(*game_, kind,
                              {config_.tutor_pseudonym, std::string(answer), std::string(correct)});
}

bool Session::can_finalize() const {
  if (phase_.kind == PhaseKind::completed) return true;
  return config_.condition == Condition::self_practice && phase_.kind == PhaseKind::questionnaire;
}

std::optional<std::int64_t> Session::next_deadline() const {
  if (phase_.kind == PhaseKind::review) return phase_.review_until_ms;
  if (phase_.kind != PhaseKind::await_feedback) return std::nullopt;
  const auto& a = phase_.await;
  const auto& t = config_.timeouts;
  std::int64_t d = a.answered_at_ms + t.abandon_after_ms;
  if (!a.hint_invited) d = std::min(d, a.answered_at_ms + t.prompt_after_ms + t.hint_invite_extra_ms);
  if (!a.prompted) d = std::min(d, a.answered_at_ms + t.prompt_after_ms);
  return d;
}

// ---------------------------------------------------------------------------
// Public entry points

Effects Session::advance(std::int64_t now_ms) {
  return call("advance", json::object(), now_ms, [&](Effects& out) {
    if (phase_.kind != PhaseKind::posing) reject("advance is only possible between questions");
    do_advance(out, now_ms);
  });
}

Effects Session::handle_feedback(const protocol::FeedbackGiven& fb, std::int64_t now_ms) {
  return call("feedback_given", protocol::event_payload(fb), now_ms, [&](Effects& out) {
    do_feedback(out, fb, now_ms);
  });
}

Effects Session::handle_answer(const protocol::AnswerGiven& answer, std::int64_t now_ms) {
  return call("answer_given", protocol::event_payload(answer), now_ms, [&](Effects& out) {
    do_answer(out, answer, now_ms);
  });
}

Effects Session::tick(std::int64_t now_ms) {
  const auto deadline = next_deadline();
  if (!deadline || now_ms < *deadline || now_ms < last_ms_) return {};
  return call("clock_tick", json::object(), now_ms, [&](Effects& out) { do_tick(out, now_ms); });
}

void Session::record_hint_opened(std::int64_t now_ms) {
  call("hint_opened", json::object(), now_ms, [&](Effects&) {
    if (phase_.kind != PhaseKind::await_feedback) reject("hint panel is only available during a question");
    auto& a = phase_.await;
    if (a.hint_open_since) reject("hint panel is already open");
    a.hint_open_since = now_ms;
    ++a.hint_opens;
  });
}

void Session::record_hint_closed(std::int64_t now_ms) {
  call("hint_closed", json::object(), now_ms, [&](Effects&) {
    if (phase_.kind != PhaseKind::await_feedback || !phase_.await.hint_open_since) {
      reject("hint closed without being opened");
    }
    close_hint(now_ms);
  });
}

Effects Session::submit_test(const protocol::TestResponses& responses, std::int64_t now_ms) {
  return call("test_responses", protocol::event_payload(responses), now_ms,
              [&](Effects& out) { do_test(out, responses, now_ms); });
}

Effects Session::submit_questionnaire(const protocol::QuestionnaireResponses& responses, std::int64_t now_ms) {
  return call("questionnaire_responses", protocol::event_payload(responses), now_ms,
              [&](Effects& out) { do_questionnaire(out, responses, now_ms); });
}

Effects Session::finalize(std::int64_t now_ms) {
  return call("finalize", json::object(), now_ms, [&](Effects& out) {
    if (!can_finalize()) reject("finalize before the session's tests are done");
    do_end(out, "completed", now_ms);
  });
}

Effects Session::abort(std::int64_t now_ms) {
  if (finished()) return {};
  return call("abort", json::object(), std::max(now_ms, last_ms_), [&](Effects& out) {
    do_end(out, "aborted", std::max(now_ms, last_ms_));
  });
}

Effects Session::handle(const protocol::SessionEvent& event) {
  const auto now = event.timestamp_ms;
  try {
    return std::visit(
        [&](const auto& body) -> Effects {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, protocol::FeedbackGiven>) {
            return handle_feedback(body, now);
          } else if constexpr (std::is_same_v<T, protocol::AnswerGiven>) {
            return handle_answer(body, now);
          } else if constexpr (std::is_same_v<T, protocol::HintOpened>) {
            record_hint_opened(now);
            return {};
          } else if constexpr (std::is_same_v<T, protocol::HintClosed>) {
            record_hint_closed(now);
            return {};
          } else if constexpr (std::is_same_v<T, protocol::TestResponses>) {
            return submit_test(body, now);
          } else if constexpr (std::is_same_v<T, protocol::QuestionnaireResponses>) {
            return submit_questionnaire(body, now);
          } else {
            return tick(now);
          }
        },
        event.body);
  } catch (const ProtocolError&) {
    return {};
  }
}

// ---------------------------------------------------------------------------
// Transitions

void Session::show_test(Effects& out, game::TestKind kind, std::int64_t now_ms) {
  current_test_ = game::make_test(*game_, kind, config_.seed);
  phase_ = Phase{};
  phase_.kind = PhaseKind::test;
  phase_.test = kind;
  emit(out, protocol::ShowTest{*current_test_}, now_ms);
}

void Session::do_advance(Effects& out, std::int64_t now_ms) {
  if (iteration_ >= schedule_.order.size()) {
    show_test(out, game::TestKind::post, now_ms);
    return;
  }
  const StateId s = schedule_.order[iteration_];
  const auto& q = game_->question(s);
  emit(out, protocol::ShowQuestion{iteration_, schedule_.order.size(), q.id, q.prompt, q.options, q.hint}, now_ms);

  phase_ = Phase{};
  phase_.kind = PhaseKind::await_feedback;
  phase_.await.state = s;
  phase_.await.answered_at_ms = now_ms;
  if (config_.condition == Condition::learning_by_teaching) {
    const ActionId a = tutee_.act(s);
    phase_.await.action = a;
    emit(out, protocol::RobotAnswer{a.value, q.options[a.value]}, now_ms);
    emit(out, protocol::ShowFeedbackButtons{}, now_ms);
  }
}

void Session::close_hint(std::int64_t now_ms) {
  auto& a = phase_.await;
  if (!a.hint_open_since) return;
  a.hint_ms += now_ms - *a.hint_open_since;
  a.hint_open_since.reset();
}

void Session::do_feedback(Effects& out, const protocol::FeedbackGiven& fb, std::int64_t now_ms) {
  if (config_.condition == Condition::self_practice) reject("feedback is not part of self-practice");
  if (fb.h != 1 && fb.h != -1) reject(fmt::format("feedback h must be +1 or -1, got {}", fb.h));
  if (phase_.kind == PhaseKind::review) {
    queued_feedback_.push_back(fb);
    return;
  }
  if (phase_.kind != PhaseKind::await_feedback) reject("no answer is awaiting feedback");
  if (fb.iteration && *fb.iteration != iteration_) {
    reject(fmt::format("feedback for iteration {} arrived during iteration {}", *fb.iteration, iteration_));
  }

  close_hint(now_ms);
  const auto a = phase_.await;
  const auto& q = game_->question(a.state);
  const bool robot_correct = a.action == q.correct;
  tutee_.learn(a.state, a.action, tutee::FeedbackSignal(fb.h, tutee::FeedbackSource::human, now_ms));

  IterationRecord r;
  r.session_id = id();
  r.index = iteration_;
  r.state_id = q.id;
  r.robot_action = a.action.value;
  r.robot_correct = robot_correct;
  r.h_given = fb.h;
  r.feedback_correct = (fb.h == 1) == robot_correct;
  r.answered_at_ms = a.answered_at_ms;
  r.time_ms = now_ms - a.answered_at_ms;
  r.hint_ms = a.hint_ms;
  r.hint_opens = a.hint_opens;
  r.prompted = a.prompted;
  r.hint_invited = a.hint_invited;
  r.greedy_accuracy = tutee::greedy_accuracy(tutee_.table(), game_->answer_key());
  log_.iterations.push_back(std::move(r));

  const auto& answer = q.options[a.action.value];
  const auto& correct = q.options[q.correct.value];
  if (fb.h == 1) {
    emit(out, protocol::SetEyeColor{protocol::EyeColor::green}, now_ms);
    emit(out, protocol::RobotSay{phrase(PhraseKind::ack_correct, answer, correct)}, now_ms);
  } else {
    emit(out, protocol::SetEyeColor{protocol::EyeColor::red}, now_ms);
    emit(out, protocol::RobotSay{phrase(PhraseKind::ack_incorrect, answer, correct)}, now_ms);
    emit(out, protocol::ShowReview{q.correct.value, correct}, now_ms);
  }
  if (q.gesture_cue && (fb.h == -1 || config_.gesture_on_every_feedback)) {
    emit(out, protocol::Gesture{*q.gesture_cue}, now_ms);
  }

  if (fb.h == -1 && config_.timeouts.review_ms > 0) {
    phase_ = Phase{};
    phase_.kind = PhaseKind::review;
    phase_.review_until_ms = now_ms + config_.timeouts.review_ms;
    return;
  }
  if (fb.h == -1) emit(out, protocol::SetEyeColor{protocol::EyeColor::neutral}, now_ms);
  finish_iteration(out, now_ms);
}

void Session::do_answer(Effects& out, const protocol::AnswerGiven& answer, std::int64_t now_ms) {
  if (config_.condition != Condition::self_practice) reject("the tutor answers only in self-practice");
  if (phase_.kind != PhaseKind::await_feedback) reject("no question is awaiting an answer");
  const auto a = phase_.await;
  const auto& q = game_->question(a.state);
  if (answer.action >= q.options.size()) {
    reject(fmt::format("answer {} is out of range for {} options", answer.action, q.options.size()));
  }
  close_hint(now_ms);
  const auto& closed = phase_.await;

  IterationRecord r;
  r.session_id = id();
  r.index = iteration_;
  r.state_id = q.id;
  r.robot_action = answer.action;
  r.robot_correct = answer.action == q.correct.value;
  r.answered_at_ms = a.answered_at_ms;
  r.time_ms = now_ms - a.answered_at_ms;
  r.hint_ms = closed.hint_ms;
  r.hint_opens = closed.hint_opens;
  r.prompted = a.prompted;
  r.hint_invited = a.hint_invited;
  r.answered_by = "tutor";
  const bool correct = r.robot_correct;
  log_.iterations.push_back(std::move(r));

  if (!correct) {
    emit(out, protocol::ShowReview{q.correct.value, q.options[q.correct.value]}, now_ms);
    if (config_.timeouts.review_ms > 0) {
      phase_ = Phase{};
      phase_.kind = PhaseKind::review;
      phase_.review_until_ms = now_ms + config_.timeouts.review_ms;
      return;
    }
  }
  finish_iteration(out, now_ms);
}

void Session::do_tick(Effects& out, std::int64_t now_ms) {
  if (phase_.kind == PhaseKind::review) {
    if (now_ms < phase_.review_until_ms) return;
    emit(out, protocol::SetEyeColor{protocol::EyeColor::neutral}, now_ms);
    finish_iteration(out, now_ms);
    return;
  }
  if (phase_.kind != PhaseKind::await_feedback) return;

  auto& a = phase_.await;
  const auto& t = config_.timeouts;
  const std::int64_t elapsed = now_ms - a.answered_at_ms;
  if (!a.prompted && elapsed >= t.prompt_after_ms) {
    a.prompted = true;
    emit(out, protocol::PromptReminder{}, now_ms);
    emit(out, protocol::RobotSay{phrase(PhraseKind::reminder)}, now_ms);
  }
  if (!a.hint_invited && elapsed >= t.prompt_after_ms + t.hint_invite_extra_ms) {
    a.hint_invited = true;
    emit(out, protocol::InviteHint{}, now_ms);
    emit(out, protocol::RobotSay{phrase(PhraseKind::hint_invite)}, now_ms);
  }
  if (elapsed >= t.abandon_after_ms) {
    close_hint(now_ms);
    const auto& q = game_->question(a.state);
    IterationRecord r;
    r.session_id = id();
    r.index = iteration_;
    r.state_id = q.id;
    r.robot_action = a.action.value;
    r.robot_correct = config_.condition == Condition::learning_by_teaching && a.action == q.correct;
    r.answered_at_ms = a.answered_at_ms;
    r.time_ms = elapsed;
    r.hint_ms = a.hint_ms;
    r.hint_opens = a.hint_opens;
    r.prompted = a.prompted;
    r.hint_invited = a.hint_invited;
    r.responded = false;
    r.answered_by = config_.condition == Condition::learning_by_teaching ? "robot" : "tutor";
    if (config_.condition == Condition::learning_by_teaching) {
      r.greedy_accuracy = tutee::greedy_accuracy(tutee_.table(), game_->answer_key());
    }
    log_.iterations.push_back(std::move(r));
    ++non_responses_;
    finish_iteration(out, now_ms);
  }
}

void Session::finish_iteration(Effects& out, std::int64_t now_ms) {
  ++iteration_;
  phase_ = Phase{};
  phase_.kind = PhaseKind::posing;
  for (const auto& fb : queued_feedback_) {
    log_error("feedback_given",
              fmt::format("stale feedback h={} received during review; ignored", fb.h), now_ms);
  }
  queued_feedback_.clear();
  if (config_.auto_advance) do_advance(out, now_ms);
}

void Session::do_test(Effects& out, const protocol::TestResponses& r, std::int64_t now_ms) {
  if (phase_.kind != PhaseKind::test) reject("no test is being shown");
  if (r.kind != phase_.test) {
    reject(fmt::format("responses for the {} test while the {} test is shown", game::to_string(r.kind),
                       game::to_string(phase_.test)));
  }
  game::TestResult result;
  try {
    result = game::score_test(*current_test_, r.responses, now_ms);
  } catch (const DomainError& e) {
    reject(e.what());
  }
  log_.tests.push_back({id(), result, r.responses});
  current_test_.reset();

  if (r.kind == game::TestKind::pre) {
    phase_ = Phase{};
    phase_.kind = PhaseKind::posing;
    if (config_.auto_advance) do_advance(out, now_ms);
  } else {
    after_post_test(out, now_ms);
  }
}

void Session::after_post_test(Effects& out, std::int64_t now_ms) {
  phase_ = Phase{};
  if (!config_.questionnaire || game_->questionnaire.empty()) {
    phase_.kind = PhaseKind::completed;
    return;
  }
  questionnaire_order_ = game_->questionnaire;
  Rng rng(derive_seed(config_.seed, kQuestionnaireStream));
  for (std::size_t i = questionnaire_order_.size(); i > 1; --i) {
    std::swap(questionnaire_order_[i - 1], questionnaire_order_[rng.uniform_index(i)]);
  }
  phase_.kind = PhaseKind::questionnaire;
  emit(out, protocol::ShowQuestionnaire{questionnaire_order_}, now_ms);
}

void Session::do_questionnaire(Effects&, const protocol::QuestionnaireResponses& r, std::int64_t now_ms) {
  if (phase_.kind != PhaseKind::questionnaire) reject("no questionnaire is being shown");
  std::set<std::string> expected;
  for (const auto& item : questionnaire_order_) expected.insert(item.id);
  for (const auto& [item, stars] : r.ratings) {
    if (!expected.contains(item)) reject(fmt::format("unknown questionnaire item '{}'", item));
    if (stars < 1 || stars > 5) reject(fmt::format("rating for '{}' must be 1-5 stars, got {}", item, stars));
  }
  if (r.ratings.size() != expected.size()) {
    reject(fmt::format("questionnaire needs all {} items rated, got {}", expected.size(), r.ratings.size()));
  }
  QuestionnaireRecord q;
  q.session_id = id();
  q.at_ms = now_ms;
  for (const auto& item : questionnaire_order_) q.order.push_back(item.id);
  q.ratings = r.ratings;
  log_.questionnaire = std::move(q);
  phase_ = Phase{};
  phase_.kind = PhaseKind::completed;
}

void Session::do_end(Effects& out, std::string_view status, std::int64_t now_ms) {
  if (status == "completed") {
    emit(out, protocol::RobotSay{phrase(PhraseKind::outro)}, now_ms);
  }
  emit(out, protocol::RobotSleep{}, now_ms);
  emit(out, protocol::SessionEnd{std::string(status)}, now_ms);

  SessionFooter f;
  f.session_id = id();
  f.status = std::string(status);
  f.iterations = log_.iterations.size();
  f.non_responses = non_responses_;
  f.protocol_errors = log_.errors.size();
  if (config_.condition == Condition::learning_by_teaching) {
    f.final_greedy_accuracy = tutee::greedy_accuracy(tutee_.table(), game_->answer_key());
  }
  f.q_table = tutee_.table().to_text();
  f.ended_at_ms = now_ms;
  log_.footer = std::move(f);
  phase_ = Phase{};
  phase_.kind = PhaseKind::finished;
}

// ---------------------------------------------------------------------------

Session replay(const SessionLog& log, std::shared_ptr<const game::GameSpec> game) {
  auto [s, effects] = Session::create(log.header.config, std::move(game), log.header.created_at_ms);
  (void)effects;
  for (const auto& rec : log.journal) {
    try {
      if (rec.type == "advance") {
        s.advance(rec.at_ms);
      } else if (rec.type == "finalize") {
        s.finalize(rec.at_ms);
      } else if (rec.type == "abort") {
        s.abort(rec.at_ms);
      } else {
        s.handle({log.session_id(), rec.seq, rec.at_ms, protocol::decode_event_body(rec.type, rec.payload)});
      }
    } catch (const ProtocolError&) {
    }
  }
  return std::move(s);
}

Effects advance_clock(Session& session, std::int64_t until_ms) {
  Effects out;
  for (auto d = session.next_deadline(); d && *d <= until_ms; d = session.next_deadline()) {
    auto step = session.tick(*d);
    if (step.empty() && session.next_deadline() == d) break;
    out.insert(out.end(), std::make_move_iterator(step.begin()), std::make_move_iterator(step.end()));
  }
  return out;
}

}  // namespace lbt::session
