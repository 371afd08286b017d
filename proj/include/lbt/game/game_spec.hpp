#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lbt/core/ids.hpp"

namespace lbt::game {

// One quiz question; its position in GameSpec::questions is its StateId and
// each option's position is its ActionId.
struct QuestionSpec {
  std::string id;
  std::string prompt;
  std::vector<std::string> options;
  ActionId correct;
  std::string hint;
  std::optional<std::string> gesture_cue;
  // Noun carried by the prompt, used for the training/test disjointness check.
  std::optional<std::string> noun;

  bool operator==(const QuestionSpec&) const = default;
};

struct TestItem {
  std::string prompt;
  std::vector<std::string> options;
  std::size_t correct = 0;
  std::optional<std::string> noun;

  bool operator==(const TestItem&) const = default;
};

struct TestRound {
  std::string name;
  std::vector<TestItem> items;

  bool operator==(const TestRound&) const = default;
};

struct QuestionnaireItem {
  std::string id;
  std::string subscale;
  std::string prompt;

  bool operator==(const QuestionnaireItem&) const = default;
};

// Number of rounds every knowledge test has.
inline constexpr std::size_t kTestRounds = 3;

struct GameSpec {
  std::string id;
  std::string title;
  std::size_t n_actions = 0;
  std::size_t iteration_count = 15;
  // When set, no test item noun may appear among the training nouns.
  bool test_nouns_unseen = false;
  std::map<std::string, std::string> metadata;
  std::vector<std::string> gestures;
  std::map<std::string, std::string> phrases;
  std::vector<QuestionSpec> questions;
  std::vector<TestRound> test_rounds;
  std::vector<QuestionnaireItem> questionnaire;

  std::size_t n_states() const { return questions.size(); }

  const QuestionSpec& question(StateId s) const;

  // Index of the question with the given id, if any.
  std::optional<StateId> find_state(std::string_view id) const;

  bool has_gesture(std::string_view cue) const;

  // Correct action per state, in state order.
  std::vector<ActionId> answer_key() const;

  std::size_t test_item_count() const;

  bool operator==(const GameSpec&) const = default;
};

// A single invariant violation. `path` addresses the offending element
// ("questions[2]", "tests.rounds[0].items[4]", ...) so loaders can map it
// back to a source line.
struct Diagnostic {
  std::string path;
  std::string message;
  int line = 0;
};

// Checks every GameSpec invariant and returns all violations (empty when
// the game is valid).
std::vector<Diagnostic> validate(const GameSpec& game);

}  // namespace lbt::game
