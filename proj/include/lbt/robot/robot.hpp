#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lbt/game/game_spec.hpp"
#include "lbt/protocol/messages.hpp"

namespace lbt::robot {

struct Say {
  std::string text;
  bool operator==(const Say&) const = default;
};
struct Eye {
  protocol::EyeColor color = protocol::EyeColor::neutral;
  bool operator==(const Eye&) const = default;
};
struct Point {
  std::string cue_id;
  bool operator==(const Point&) const = default;
};
struct Sleep {
  bool operator==(const Sleep&) const = default;
};

using RobotCommand = std::variant<Say, Eye, Point, Sleep>;

/// Hardware-facing side of the adapter. A binding for a physical robot
/// implements execute(); commands arrive in emission order, one session per
/// backend instance.
class RobotBackend {
 public:
  virtual ~RobotBackend() = default;
  virtual void execute(const RobotCommand& cmd, std::int64_t at_ms) = 0;
};

struct TranscriptLine {
  std::int64_t at_ms = 0;
  std::string text;  // "SAY ...", "EYE green", "GESTURE head", "SLEEP"
  bool operator==(const TranscriptLine&) const = default;
};

// Headless stand-in for the robot: records every command as a line.
class TranscriptBackend : public RobotBackend {
 public:
  void execute(const RobotCommand& cmd, std::int64_t at_ms) override;

  const std::vector<TranscriptLine>& lines() const { return lines_; }

  // One "<at_ms>\t<text>" line per command.
  std::string render() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<TranscriptLine> lines_;
};

std::string transcript_text(const RobotCommand& cmd);

enum class PhraseKind { intro, answer, ack_correct, ack_incorrect, reminder, hint_invite, outro };

std::string_view to_string(PhraseKind kind);

struct PhraseSlots {
  std::string pseudonym;
  std::string answer;
  std::string correct;
};

// Fills the pack's template for `kind`. Slots: {title}, {pseudonym},
// {answer}, {correct}. Throws DomainError when the pack lacks the template.
std::string script_phrase(const game::GameSpec& game, PhraseKind kind, const PhraseSlots& slots = {});

/// Executes robot-directed effects of one session against a backend.
class RobotAdapter {
 public:
  RobotAdapter(std::shared_ptr<const game::GameSpec> game, std::unique_ptr<RobotBackend> backend,
               std::string pseudonym = {});

  // Throws DomainError for a gesture cue the game does not declare.
  void execute(const RobotCommand& cmd, std::int64_t at_ms);

  // Translates and executes the robot-directed subset of `effects`.
  void execute_effects(const protocol::Effects& effects, std::int64_t at_ms);

  RobotBackend& backend() { return *backend_; }

 private:
  std::shared_ptr<const game::GameSpec> game_;
  std::unique_ptr<RobotBackend> backend_;
  std::string pseudonym_;
};

// Robot command for an effect, if the effect is robot-directed.
std::optional<RobotCommand> to_robot_command(const protocol::Effect& effect, const game::GameSpec& game,
                                             const PhraseSlots& slots = {});

}  // namespace lbt::robot
