#include "lbt/tutee/q_table.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include <fmt/format.h>

#include "lbt/core/error.hpp"
#include "lbt/game/game_spec.hpp"

namespace lbt::tutee {

FeedbackSignal::FeedbackSignal(int h, FeedbackSource source, std::int64_t at_ms)
    : h_(h), source_(source), at_ms_(at_ms) {
  if (h != 1 && h != -1) throw DomainError(fmt::format("feedback h must be +1 or -1, got {}", h));
}

void LearnerConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError(fmt::format("learning rate alpha must be in (0, 1], got {}", alpha));
  }
}

QTable::QTable(std::size_t n_states, std::size_t n_actions, double initial_q)
    : n_states_(n_states), n_actions_(n_actions), values_(n_states * n_actions, initial_q) {
  if (n_states == 0 || n_actions == 0) throw DomainError("q-table dimensions must be positive");
}

std::size_t QTable::index(StateId s, ActionId a) const {
  if (s.value >= n_states_ || a.value >= n_actions_) {
    throw DomainError(fmt::format("(state {}, action {}) outside q-table of {}x{}", s.value, a.value,
                                  n_states_, n_actions_));
  }
  return s.value * n_actions_ + a.value;
}

double QTable::value(StateId s, ActionId a) const { return values_[index(s, a)]; }

void QTable::set_value(StateId s, ActionId a, double v) { values_[index(s, a)] = v; }

std::span<const double> QTable::row(StateId s) const {
  if (s.value >= n_states_) throw DomainError(fmt::format("unknown state {}", s.value));
  return std::span<const double>(values_).subspan(s.value * n_actions_, n_actions_);
}

std::string QTable::to_text() const {
  std::string out = fmt::format("# q-table states={} actions={}\nstate_id\taction_id\tvalue\n",
                                n_states_, n_actions_);
  for (std::size_t s = 0; s < n_states_; ++s) {
    for (std::size_t a = 0; a < n_actions_; ++a) {
      out += fmt::format("{}\t{}\t{}\n", s, a, values_[s * n_actions_ + a]);
    }
  }
  return out;
}

QTable QTable::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# q-table states=%zu actions=%zu", &n_states, &n_actions) != 2) {
    throw DataError("q-table snapshot: missing '# q-table states=N actions=M' line");
  }
  if (!std::getline(in, line) || line != "state_id\taction_id\tvalue") {
    throw DataError("q-table snapshot: missing column header");
  }
  QTable q(n_states, n_actions);
  std::vector<bool> seen(n_states * n_actions, false);
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t s = 0;
    std::size_t a = 0;
    std::istringstream fields(line);
    std::string value_text;
    if (!(fields >> s >> a >> value_text)) {
      throw DataError(fmt::format("q-table snapshot line {}: expected 3 fields", line_no));
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value_text.data(), value_text.data() + value_text.size(), v);
    if (ec != std::errc{} || ptr != value_text.data() + value_text.size() || s >= n_states ||
        a >= n_actions) {
      throw DataError(fmt::format("q-table snapshot line {}: bad entry '{}'", line_no, line));
    }
    q.values_[s * n_actions + a] = v;
    seen[s * n_actions + a] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw DataError("q-table snapshot does not cover every (state, action) pair");
  }
  return q;
}

QTable new_q_table(const game::GameSpec& game, const LearnerConfig& config) {
  config.validate();
  return QTable(game.n_states(), game.n_actions, config.initial_q);
}

std::vector<ActionId> greedy_actions(const QTable& q, StateId state) {
  const auto row = q.row(state);
  const double best = *std::max_element(row.begin(), row.end());
  std::vector<ActionId> out;
  for (std::size_t a = 0; a < row.size(); ++a) {
    if (row[a] == best) out.push_back(ActionId{a});
  }
  return out;
}

ActionId select_action(const QTable& q, StateId state, Rng& rng) {
  const auto ties = greedy_actions(q, state);
  if (ties.size() == 1) return ties.front();
  return ties[rng.uniform_index(ties.size())];
}

void apply_feedback_in_place(QTable& q, StateId state, ActionId action, const FeedbackSignal& fb,
                             const LearnerConfig& config) {
  const double old = q.value(state, action);
  q.set_value(state, action, old + config.alpha * (fb.h() - old));
}

QTable apply_feedback(QTable q, StateId state, ActionId action, const FeedbackSignal& fb,
                      const LearnerConfig& config) {
  apply_feedback_in_place(q, state, action, fb, config);
  return q;
}

double greedy_accuracy(const QTable& q, std::span<const ActionId> key) {
  if (key.size() != q.n_states()) {
    throw DomainError(fmt::format("answer key covers {} states, q-table has {}", key.size(), q.n_states()));
  }
  double total = 0.0;
  for (std::size_t s = 0; s < key.size(); ++s) {
    if (key[s].value >= q.n_actions()) {
      throw DomainError(fmt::format("answer key action {} outside {} actions", key[s].value, q.n_actions()));
    }
    const auto ties = greedy_actions(q, StateId{s});
    if (std::find(ties.begin(), ties.end(), key[s]) != ties.end()) {
      total += 1.0 / static_cast<double>(ties.size());
    }
  }
  return total / static_cast<double>(key.size());
}

Tutee::Tutee(const game::GameSpec& game, LearnerConfig config)
    : config_(config), table_(new_q_table(game, config)), rng_(config.rng_seed) {}

}  // namespace lbt::tutee
