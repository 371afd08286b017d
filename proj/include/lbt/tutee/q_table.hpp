#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lbt/core/ids.hpp"
#include "lbt/core/rng.hpp"

namespace lbt::game {
struct GameSpec;
}

namespace lbt::tutee {

enum class FeedbackSource { human, simulated };

/// Binary evaluative judgment of the tutee's last answer: +1 "correct",
/// -1 "incorrect". Construction rejects any other value.
class FeedbackSignal {
 public:
  FeedbackSignal(int h, FeedbackSource source = FeedbackSource::human, std::int64_t at_ms = 0);

  static FeedbackSignal correct(FeedbackSource source = FeedbackSource::human, std::int64_t at_ms = 0) {
    return FeedbackSignal(+1, source, at_ms);
  }
  static FeedbackSignal incorrect(FeedbackSource source = FeedbackSource::human, std::int64_t at_ms = 0) {
    return FeedbackSignal(-1, source, at_ms);
  }

  int h() const { return h_; }
  FeedbackSource source() const { return source_; }
  std::int64_t at_ms() const { return at_ms_; }

 private:
  int h_;
  FeedbackSource source_;
  std::int64_t at_ms_;
};

struct LearnerConfig {
  double alpha = 0.3;  // learning rate, in (0, 1]
  double initial_q = 0.0;
  std::uint64_t rng_seed = 0;  // tie-break stream

  // Throws DomainError when alpha is outside (0, 1].
  void validate() const;
};

/// Dense state x action value table. Every pair of the bound game has an
/// entry from construction on.
class QTable {
 public:
  QTable(std::size_t n_states, std::size_t n_actions, double initial_q = 0.0);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }

  double value(StateId s, ActionId a) const;
  void set_value(StateId s, ActionId a, double v);
  std::span<const double> row(StateId s) const;
  std::span<const double> values() const { return values_; }

  // Tab-separated snapshot: a "# q-table" comment line, a header line
  // "state_id\taction_id\tvalue", then one line per entry in row-major order.
  std::string to_text() const;
  static QTable from_text(std::string_view text);

  bool operator==(const QTable&) const = default;

 private:
  std::size_t index(StateId s, ActionId a) const;

  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> values_;
};

QTable new_q_table(const game::GameSpec& game, const LearnerConfig& config);

// Actions attaining the row maximum, in ascending order.
std::vector<ActionId> greedy_actions(const QTable& q, StateId state);

// Greedy choice with uniform seeded tie-breaking.
ActionId select_action(const QTable& q, StateId state, Rng& rng);

// Q'(s,a) = Q(s,a) + alpha * (h - Q(s,a)); only the (state, action) entry changes.
QTable apply_feedback(QTable q, StateId state, ActionId action, const FeedbackSignal& fb,
                      const LearnerConfig& config);
void apply_feedback_in_place(QTable& q, StateId state, ActionId action, const FeedbackSignal& fb,
                             const LearnerConfig& config);

// Mean over states of P(greedy pick is correct) under uniform tie-breaking.
double greedy_accuracy(const QTable& q, std::span<const ActionId> key);

/// The teachable agent: a Q-table plus its tie-break stream.
class Tutee {
 public:
  Tutee(const game::GameSpec& game, LearnerConfig config);

  ActionId act(StateId state) { return select_action(table_, state, rng_); }
  void learn(StateId state, ActionId action, const FeedbackSignal& fb) {
    apply_feedback_in_place(table_, state, action, fb, config_);
  }

  const QTable& table() const { return table_; }
  const LearnerConfig& config() const { return config_; }

 private:
  LearnerConfig config_;
  QTable table_;
  Rng rng_;
};

}  // namespace lbt::tutee
