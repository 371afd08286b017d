#include "lbt/sim/wire_tutor.hpp"

#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "lbt/core/error.hpp"
#include "lbt/core/rng.hpp"

namespace lbt::sim {

using protocol::Topic;
using session::PhaseKind;

namespace {

constexpr int kMaxIdlePolls = 1000;

}  // namespace

WireTutorResult run_wire_tutor(session::Hub& hub, const std::string& session_id, const game::GameSpec& game,
                               const TutorProfile& profile, std::uint64_t seed, std::int64_t start_ms) {
  profile.validate();
  const auto summary = hub.summary(session_id);
  if (!summary) throw ProtocolError(fmt::format("unknown session '{}'", session_id));
  const bool self_practice = summary->condition == session::Condition::self_practice;

  Rng rng(seed);
  WireTutorResult result;
  std::uint64_t seq = 0, seen = 0;
  std::int64_t now = start_ms;
  std::optional<protocol::ShowQuestion> question;
  std::optional<std::size_t> robot_action;
  bool ended = false;
  int idle = 0;

  auto send = [&](protocol::EventBody body) {
    hub.deliver(protocol::encode_event({session_id, ++seq, now, std::move(body)}), now);
    ++result.events_sent;
  };

  // Hint use, then the judgment or answer, relative to when the question
  // became answerable.
  auto respond = [&](std::int64_t shown_at) {
    const auto state = game.find_state(question->state_id);
    if (!state) throw ProtocolError(fmt::format("question for unknown state '{}'", question->state_id));
    const auto& q = game.question(*state);

    double latency = rng.lognormal_median(profile.latency_median_ms, profile.latency_sigma);
    if (rng.bernoulli(profile.non_response_probability)) latency = 25'000.0 + 35'000.0 * rng.uniform01();
    const auto after = std::max<std::int64_t>(1, std::llround(latency));
    if (rng.bernoulli(profile.hint_probability)) {
      const auto duration =
          std::max<std::int64_t>(1, std::llround(rng.lognormal_median(profile.hint_median_ms, profile.hint_sigma)));
      if (duration < after) {
        now = std::max(now, shown_at + static_cast<std::int64_t>(rng.uniform_index(
                                           static_cast<std::size_t>(after - duration))));
        send(protocol::HintOpened{});
        now += duration;
        send(protocol::HintClosed{});
      }
    }
    now = std::max(now, shown_at + after);
    if (self_practice) {
      std::size_t pick = q.correct.value;
      if (!rng.bernoulli(profile.feedback_accuracy) && q.options.size() > 1) {
        pick = rng.uniform_index(q.options.size() - 1);
        if (pick >= q.correct.value) ++pick;
      }
      send(protocol::AnswerGiven{pick});
    } else {
      const auto fb = judge(robot_action == q.correct.value, profile, rng);
      send(protocol::FeedbackGiven{fb.h(), question->iteration});
    }
  };

  while (!ended) {
    const auto msgs = hub.messages(session_id, Topic::to_ui, seen);
    if (msgs.empty()) {
      if (++idle > kMaxIdlePolls) throw ProtocolError(fmt::format("session '{}' stalled", session_id));
      const auto s = hub.summary(session_id);
      if (s->phase == PhaseKind::completed) {
        hub.finalize(session_id, now);
      } else if (s->phase == PhaseKind::review || s->phase == PhaseKind::await_feedback) {
        now += 1'000;
        send(protocol::ClockTick{});
      } else {
        throw ProtocolError(fmt::format("session '{}' stalled in phase {}", session_id, to_string(s->phase)));
      }
      continue;
    }
    idle = 0;
    for (const auto& env : msgs) {
      seen = env.seq;
      ++result.messages_read;
      const auto effect = protocol::decode_effect(env.type, env.payload);
      if (const auto* t = std::get_if<protocol::ShowTest>(&effect)) {
        now += 60'000;
        std::vector<std::size_t> responses;
        for (const auto& round : t->test.rounds) {
          for (const auto& item : round.items) responses.push_back(rng.uniform_index(item.options.size()));
        }
        send(protocol::TestResponses{t->test.kind, std::move(responses)});
      } else if (const auto* q = std::get_if<protocol::ShowQuestion>(&effect)) {
        question = *q;
        robot_action.reset();
        if (self_practice) respond(env.timestamp_ms);
      } else if (const auto* a = std::get_if<protocol::RobotAnswer>(&effect)) {
        robot_action = a->action;
      } else if (std::holds_alternative<protocol::ShowFeedbackButtons>(effect)) {
        if (!question || !robot_action) throw ProtocolError("feedback buttons without a question and answer");
        respond(env.timestamp_ms);
      } else if (const auto* qs = std::get_if<protocol::ShowQuestionnaire>(&effect)) {
        now += 60'000;
        protocol::QuestionnaireResponses r;
        for (const auto& item : qs->items) r.ratings[item.id] = 1 + static_cast<int>(rng.uniform_index(5));
        send(std::move(r));
      } else if (std::holds_alternative<protocol::SessionEnd>(effect)) {
        ended = true;
      }
    }
  }
  result.ended_at_ms = now;
  return result;
}

}  // namespace lbt::sim
