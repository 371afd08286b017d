#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lbt/game/content_pack.hpp"
#include "lbt/session/session.hpp"

namespace lbt::testing {

inline std::shared_ptr<const game::GameSpec> body_game() {
  static const auto g = std::make_shared<const game::GameSpec>(game::builtin_body_parts());
  return g;
}

inline std::shared_ptr<const game::GameSpec> grammar_game() {
  static const auto g = std::make_shared<const game::GameSpec>(game::builtin_grammar());
  return g;
}

inline session::SessionConfig make_config(std::string id = "s-1",
                                          session::Condition c = session::Condition::learning_by_teaching,
                                          std::uint64_t seed = 1, std::string game = "body_parts") {
  session::SessionConfig cfg;
  cfg.session_id = std::move(id);
  cfg.game_id = std::move(game);
  cfg.tutor_pseudonym = "3B-07";
  cfg.condition = c;
  cfg.seed = seed;
  cfg.learner.rng_seed = seed + 1000;
  return cfg;
}

inline std::vector<std::size_t> key_responses(const game::TestSpec& t) {
  std::vector<std::size_t> r;
  for (const auto& round : t.rounds) {
    for (const auto& item : round.items) r.push_back(item.correct);
  }
  return r;
}

inline protocol::TestResponses answer_current_test(const session::Session& s) {
  return {s.phase().test, key_responses(*s.current_test())};
}

inline protocol::QuestionnaireResponses all_ratings(const session::Session& s, int stars = 4) {
  protocol::QuestionnaireResponses r;
  for (const auto& item : s.questionnaire_order()) r.ratings[item.id] = stars;
  return r;
}

inline bool robot_is_right(const session::Session& s) {
  const auto& a = s.phase().await;
  return a.action == s.game().question(a.state).correct;
}

inline std::vector<std::string> types(const protocol::Effects& effects) {
  std::vector<std::string> out;
  for (const auto& e : effects) out.emplace_back(protocol::effect_type(e));
  return out;
}

template <class T>
std::size_t count_of(const protocol::Effects& effects) {
  std::size_t n = 0;
  for (const auto& e : effects) n += std::holds_alternative<T>(e) ? 1 : 0;
  return n;
}

}  // namespace lbt::testing
