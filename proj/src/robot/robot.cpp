#include "lbt/robot/robot.hpp"

#include <fstream>

#include <fmt/format.h>

#include "lbt/core/error.hpp"

namespace lbt::robot {

namespace {

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
  for (auto pos = text.find(slot); pos != std::string::npos; pos = text.find(slot, pos + value.size())) {
    text.replace(pos, slot.size(), value);
  }
}

}  // namespace

std::string transcript_text(const RobotCommand& cmd) {
  if (const auto* say = std::get_if<Say>(&cmd)) return "SAY " + say->text;
  if (const auto* eye = std::get_if<Eye>(&cmd)) return fmt::format("EYE {}", protocol::to_string(eye->color));
  if (const auto* point = std::get_if<Point>(&cmd)) return "GESTURE " + point->cue_id;
  return "SLEEP";
}

void TranscriptBackend::execute(const RobotCommand& cmd, std::int64_t at_ms) {
  lines_.push_back({at_ms, transcript_text(cmd)});
}

std::string TranscriptBackend::render() const {
  std::string out;
  for (const auto& l : lines_) out += fmt::format("{}\t{}\n", l.at_ms, l.text);
  return out;
}

void TranscriptBackend::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << render();
  if (!out) throw DataError(fmt::format("cannot write transcript {}", path.string()));
}

std::string_view to_string(PhraseKind kind) {
  switch (kind) {
    case PhraseKind::intro: return "intro";
    case PhraseKind::answer: return "answer";
    case PhraseKind::ack_correct: return "ack_correct";
    case PhraseKind::ack_incorrect: return "ack_incorrect";
    case PhraseKind::reminder: return "reminder";
    case PhraseKind::hint_invite: return "hint_invite";
    case PhraseKind::outro: return "outro";
  }
  return "intro";
}

std::string script_phrase(const game::GameSpec& game, PhraseKind kind, const PhraseSlots& slots) {
  const auto it = game.phrases.find(std::string(to_string(kind)));
  if (it == game.phrases.end()) {
    throw DomainError(fmt::format("game '{}' has no '{}' phrase template", game.id, to_string(kind)));
  }
  std::string text = it->second;
  replace_all(text, "{title}", game.title);
  replace_all(text, "{pseudonym}", slots.pseudonym);
  replace_all(text, "{answer}", slots.answer);
  replace_all(text, "{correct}", slots.correct);
  return text;
}

std::optional<RobotCommand> to_robot_command(const protocol::Effect& effect, const game::GameSpec& game,
                                             const PhraseSlots& slots) {
  using namespace protocol;
  if (const auto* say = std::get_if<RobotSay>(&effect)) return Say{say->text};
  if (const auto* eye = std::get_if<SetEyeColor>(&effect)) return Eye{eye->color};
  if (const auto* g = std::get_if<Gesture>(&effect)) return Point{g->cue};
  if (std::holds_alternative<RobotSleep>(effect)) return Sleep{};
  if (const auto* answer = std::get_if<RobotAnswer>(&effect)) {
    PhraseSlots s = slots;
    s.answer = answer->label;
    return Say{script_phrase(game, PhraseKind::answer, s)};
  }
  return std::nullopt;
}

RobotAdapter::RobotAdapter(std::shared_ptr<const game::GameSpec> game, std::unique_ptr<RobotBackend> backend,
                           std::string pseudonym)
    : game_(std::move(game)), backend_(std::move(backend)), pseudonym_(std::move(pseudonym)) {
  if (!game_ || !backend_) throw DomainError("robot adapter needs a game and a backend");
}

void RobotAdapter::execute(const RobotCommand& cmd, std::int64_t at_ms) {
  if (const auto* point = std::get_if<Point>(&cmd); point && !game_->has_gesture(point->cue_id)) {
    throw DomainError(fmt::format("unknown gesture cue '{}' for game '{}'", point->cue_id, game_->id));
  }
  backend_->execute(cmd, at_ms);
}

void RobotAdapter::execute_effects(const protocol::Effects& effects, std::int64_t at_ms) {
  for (const auto& e : effects) {
    if (auto cmd = to_robot_command(e, *game_, PhraseSlots{pseudonym_, {}, {}})) execute(*cmd, at_ms);
  }
}

}  // namespace lbt::robot
