#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "lbt/analysis/scores.hpp"
#include "lbt/core/rng.hpp"
#include "lbt/game/game_spec.hpp"
#include "lbt/protocol/messages.hpp"
#include "lbt/session/config.hpp"
#include "lbt/session/session_log.hpp"
#include "lbt/tutee/q_table.hpp"

namespace lbt::sim {

/// Parametric stand-in for a child tutor.
struct TutorProfile {
  double feedback_accuracy = 0.89;  // P(truthful judgment)
  double latency_median_ms = 11'000;
  double latency_sigma = 0.4;  // log-scale sd
  double hint_probability = 0.3;
  double hint_median_ms = 1'142.4;
  double hint_sigma = 0.5;
  // A non-response is a judgment delayed into [25 s, 60 s), past both
  // the reminder and the hint invitation.
  double non_response_probability = 0.05;
  // Per-item probability of a correct knowledge-test answer.
  double pre_test_accuracy = 0.45;
  double post_test_accuracy = 0.75;
  double retention_test_accuracy = 0.65;

  // Throws DomainError when a probability leaves [0, 1] or a latency
  // parameter is not positive.
  void validate() const;
};

protocol::json to_json(const TutorProfile& p);
TutorProfile tutor_profile_from_json(const protocol::json& j);

// Truthful (+1 iff the robot was right) with probability p, inverted otherwise.
tutee::FeedbackSignal judge(bool robot_correct, const TutorProfile& profile, Rng& rng);

struct Distribution {
  double mean = 0, sd = 0, q05 = 0, q25 = 0, median = 0, q75 = 0, q95 = 0;
};

struct BatchOptions {
  session::Condition condition = session::Condition::learning_by_teaching;
  session::Timeouts timeouts;
  bool questionnaire = true;
  bool keep_logs = false;
  std::size_t workers = 1;
};

struct BatchResult {
  std::string game_id;
  tutee::LearnerConfig learner;
  TutorProfile profile;
  session::Condition condition = session::Condition::learning_by_teaching;
  std::size_t n_sessions = 0;
  std::uint64_t seed = 0;
  // Mean greedy accuracy after each iteration; empty in self-practice.
  std::vector<double> accuracy_curve;
  std::vector<double> final_accuracy;     // per session (learning-by-teaching)
  std::vector<double> feedback_accuracy;  // per session (learning-by-teaching)
  Distribution final_summary;
  double final_se = 0;  // standard error of the mean final accuracy
  double mean_feedback_accuracy = 0;
  double mean_time_ms = 0;
  double mean_hint_ms = 0;
  double prompted_rate = 0;
  double hint_invited_rate = 0;
  std::vector<analysis::ScoreRow> scores;
  std::vector<std::string> log_digests;
  std::vector<session::SessionLog> logs;  // when BatchOptions::keep_logs
};

protocol::json to_json(const BatchResult& r);

// Plays one complete session (pre-test, all iterations, post-test,
// questionnaire) against the orchestrator on a virtual clock.
struct SimulatedSession {
  session::SessionLog log;
  std::optional<int> retention;
};
SimulatedSession simulate_session(std::shared_ptr<const game::GameSpec> game, const session::SessionConfig& config,
                                  const TutorProfile& profile, std::uint64_t tutor_seed);

// Session i uses seeds derived from (seed, i), so results do not depend on
// the worker count.
BatchResult run_batch(const game::GameSpec& game, const tutee::LearnerConfig& learner, const TutorProfile& profile,
                      std::size_t n_sessions, std::uint64_t seed, const BatchOptions& options = {});

struct OracleResult {
  double mean = 0;
  double sd = 0;
  double ci95_low = 0;
  double ci95_high = 0;
  std::size_t n_runs = 0;
};

// Learner, schedule and noisy judge only, with no orchestrator: statistics
// of the final greedy accuracy over n_runs independent runs.
OracleResult monte_carlo_oracle(const game::GameSpec& game, double alpha, double p, std::size_t n_iterations,
                                std::size_t n_runs, std::uint64_t seed);

}  // namespace lbt::sim
