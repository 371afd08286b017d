#include "lbt/sim/tutor_sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "lbt/analysis/metrics.hpp"
#include "lbt/analysis/stats.hpp"
#include "lbt/core/error.hpp"
#include "lbt/game/schedule.hpp"
#include "lbt/session/session.hpp"

namespace lbt::sim {

using protocol::json;
using session::PhaseKind;
using session::Session;

namespace {

constexpr std::uint64_t kOracleSalt = 0x6f7261636c65ULL;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::vector<std::size_t> answer_test(const game::TestSpec& test, double accuracy, Rng& rng) {
  std::vector<std::size_t> out;
  for (const auto& round : test.rounds) {
    for (const auto& item : round.items) {
      if (rng.bernoulli(accuracy) || item.options.size() < 2) {
        out.push_back(item.correct);
      } else {
        std::size_t pick = rng.uniform_index(item.options.size() - 1);
        if (pick >= item.correct) ++pick;
        out.push_back(pick);
      }
    }
  }
  return out;
}

int binomial_score(std::size_t items, double accuracy, Rng& rng) {
  int score = 0;
  for (std::size_t i = 0; i < items; ++i) score += rng.bernoulli(accuracy) ? 1 : 0;
  return score;
}

Distribution describe(const std::vector<double>& v) {
  Distribution d;
  if (v.empty()) return d;
  d.mean = analysis::mean(v);
  d.sd = v.size() >= 2 ? analysis::stdev(v) : 0.0;
  d.q05 = analysis::quantile(v, 0.05);
  d.q25 = analysis::quantile(v, 0.25);
  d.median = analysis::quantile(v, 0.5);
  d.q75 = analysis::quantile(v, 0.75);
  d.q95 = analysis::quantile(v, 0.95);
  return d;
}

}  // namespace

void TutorProfile::validate() const {
  for (const auto& [name, p] : {std::pair{"feedback_accuracy", feedback_accuracy},
                                std::pair{"hint_probability", hint_probability},
                                std::pair{"non_response_probability", non_response_probability},
                                std::pair{"pre_test_accuracy", pre_test_accuracy},
                                std::pair{"post_test_accuracy", post_test_accuracy},
                                std::pair{"retention_test_accuracy", retention_test_accuracy}}) {
    if (!is_probability(p)) throw DomainError(fmt::format("{} must be in [0, 1], got {}", name, p));
  }
  if (!(latency_median_ms > 0) || !(hint_median_ms > 0)) throw DomainError("latency medians must be positive");
  if (!(latency_sigma >= 0) || !(hint_sigma >= 0)) throw DomainError("latency sigmas must be non-negative");
}

json to_json(const TutorProfile& p) {
  return {{"feedback_accuracy", p.feedback_accuracy},
          {"latency_median_ms", p.latency_median_ms},
          {"latency_sigma", p.latency_sigma},
          {"hint_probability", p.hint_probability},
          {"hint_median_ms", p.hint_median_ms},
          {"hint_sigma", p.hint_sigma},
          {"non_response_probability", p.non_response_probability},
          {"pre_test_accuracy", p.pre_test_accuracy},
          {"post_test_accuracy", p.post_test_accuracy},
          {"retention_test_accuracy", p.retention_test_accuracy}};
}

TutorProfile tutor_profile_from_json(const json& j) {
  TutorProfile p;
  try {
    p.feedback_accuracy = j.value("feedback_accuracy", p.feedback_accuracy);
    p.latency_median_ms = j.value("latency_median_ms", p.latency_median_ms);
    p.latency_sigma = j.value("latency_sigma", p.latency_sigma);
    p.hint_probability = j.value("hint_probability", p.hint_probability);
    p.hint_median_ms = j.value("hint_median_ms", p.hint_median_ms);
    p.hint_sigma = j.value("hint_sigma", p.hint_sigma);
    p.non_response_probability = j.value("non_response_probability", p.non_response_probability);
    p.pre_test_accuracy = j.value("pre_test_accuracy", p.pre_test_accuracy);
    p.post_test_accuracy = j.value("post_test_accuracy", p.post_test_accuracy);
    p.retention_test_accuracy = j.value("retention_test_accuracy", p.retention_test_accuracy);
  } catch (const json::exception& e) {
    throw DomainError(fmt::format("tutor profile: {}", e.what()));
  }
  p.validate();
  return p;
}

tutee::FeedbackSignal judge(bool robot_correct, const TutorProfile& profile, Rng& rng) {
  const bool truthful = rng.bernoulli(profile.feedback_accuracy);
  const int h = (robot_correct == truthful) ? 1 : -1;
  return tutee::FeedbackSignal(h, tutee::FeedbackSource::simulated);
}

SimulatedSession simulate_session(std::shared_ptr<const game::GameSpec> game, const session::SessionConfig& config,
                                  const TutorProfile& profile, std::uint64_t tutor_seed) {
  Rng rng(tutor_seed);
  auto created = Session::create(config, game, 0);
  Session& s = created.first;
  std::int64_t now = 0;

  now += 90'000;
  s.submit_test({game::TestKind::pre, answer_test(*s.current_test(), profile.pre_test_accuracy, rng)}, now);

  while (true) {
    const auto kind = s.phase().kind;
    if (kind == PhaseKind::review) {
      now = *s.next_deadline();
      session::advance_clock(s, now);
      continue;
    }
    if (kind == PhaseKind::posing) {
      s.advance(now);
      continue;
    }
    if (kind != PhaseKind::await_feedback) break;

    const auto await = s.phase().await;
    double latency = rng.lognormal_median(profile.latency_median_ms, profile.latency_sigma);
    if (rng.bernoulli(profile.non_response_probability)) latency = 25'000.0 + 35'000.0 * rng.uniform01();
    const auto respond_after = std::max<std::int64_t>(1, std::llround(latency));
    const std::int64_t respond_at = await.answered_at_ms + respond_after;

    if (rng.bernoulli(profile.hint_probability)) {
      const auto duration = std::max<std::int64_t>(1, std::llround(rng.lognormal_median(profile.hint_median_ms,
                                                                                        profile.hint_sigma)));
      if (duration < respond_after) {
        const auto slack = static_cast<std::size_t>(respond_after - duration);
        const std::int64_t open_at = await.answered_at_ms + static_cast<std::int64_t>(rng.uniform_index(slack));
        session::advance_clock(s, open_at);
        s.record_hint_opened(open_at);
        session::advance_clock(s, open_at + duration);
        s.record_hint_closed(open_at + duration);
      }
    }

    session::advance_clock(s, respond_at);
    now = respond_at;
    if (s.phase().kind != PhaseKind::await_feedback) continue;  // abandoned meanwhile
    const auto& q = game->question(await.state);
    if (config.condition == session::Condition::learning_by_teaching) {
      const auto fb = judge(await.action == q.correct, profile, rng);
      s.handle_feedback({fb.h(), s.iteration()}, now);
    } else {
      std::size_t pick = q.correct.value;
      if (!rng.bernoulli(profile.feedback_accuracy) && q.options.size() > 1) {
        pick = rng.uniform_index(q.options.size() - 1);
        if (pick >= q.correct.value) ++pick;
      }
      s.handle_answer({pick}, now);
    }
  }

  if (s.phase().kind == PhaseKind::test) {
    now += 90'000;
    s.submit_test({game::TestKind::post, answer_test(*s.current_test(), profile.post_test_accuracy, rng)}, now);
  }
  if (s.phase().kind == PhaseKind::questionnaire) {
    now += 60'000;
    protocol::QuestionnaireResponses q;
    for (const auto& item : s.questionnaire_order()) q.ratings[item.id] = 1 + static_cast<int>(rng.uniform_index(5));
    s.submit_questionnaire(q, now);
  }
  s.finalize(now + 5'000);

  SimulatedSession out;
  out.retention = binomial_score(game->test_item_count(), profile.retention_test_accuracy, rng);
  out.log = s.log();
  return out;
}

namespace {

struct SessionOutcome {
  std::optional<double> final_accuracy;
  std::optional<double> feedback_accuracy;
  std::vector<double> curve;
  double time_sum = 0;
  double hint_sum = 0;
  std::size_t responded = 0;
  std::size_t iterations = 0;
  std::size_t prompted = 0;
  std::size_t invited = 0;
  analysis::ScoreRow score;
  std::string digest;
  std::optional<session::SessionLog> log;
};

}  // namespace

BatchResult run_batch(const game::GameSpec& game, const tutee::LearnerConfig& learner, const TutorProfile& profile,
                      std::size_t n_sessions, std::uint64_t seed, const BatchOptions& options) {
  if (n_sessions == 0) throw DomainError("run_batch needs at least one session");
  learner.validate();
  profile.validate();
  const auto shared = std::make_shared<const game::GameSpec>(game);
  const bool lbt = options.condition == session::Condition::learning_by_teaching;
  const std::string tag = lbt ? "lbt" : "self";

  std::vector<SessionOutcome> outcomes(n_sessions);
  const auto run_one = [&](std::size_t i) {
    const std::uint64_t sseed = derive_seed(seed, i);
    session::SessionConfig cfg;
    cfg.session_id = fmt::format("{}-{}-{:05d}", game.id, tag, i);
    cfg.game_id = game.id;
    cfg.learner = learner;
    cfg.learner.rng_seed = derive_seed(sseed, 2);
    cfg.tutor_pseudonym = fmt::format("sim-{}-{:05d}", tag, i);
    cfg.timeouts = options.timeouts;
    cfg.condition = options.condition;
    cfg.seed = derive_seed(sseed, 1);
    cfg.questionnaire = options.questionnaire;
    auto sim = simulate_session(shared, cfg, profile, derive_seed(sseed, 3));

    auto& o = outcomes[i];
    const auto& log = sim.log;
    if (log.footer) o.final_accuracy = log.footer->final_greedy_accuracy;
    if (lbt) o.feedback_accuracy = analysis::feedback_accuracy(log);
    for (const auto& r : log.iterations) {
      ++o.iterations;
      if (r.greedy_accuracy) o.curve.push_back(*r.greedy_accuracy);
      if (r.prompted) ++o.prompted;
      if (r.hint_invited) ++o.invited;
      if (!r.responded) continue;
      ++o.responded;
      o.time_sum += static_cast<double>(r.time_ms);
      o.hint_sum += static_cast<double>(r.hint_ms);
    }
    auto rows = analysis::scores_from_logs(std::span(&log, 1));
    if (!rows.empty()) {
      o.score = std::move(rows.front());
      o.score.retention = sim.retention;
    }
    o.digest = session::log_digest(log);
    if (options.keep_logs) o.log = std::move(sim.log);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, n_sessions));
  if (workers == 1) {
    for (std::size_t i = 0; i < n_sessions; ++i) run_one(i);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n_sessions; i += workers) run_one(i);
      });
    }
  }

  BatchResult r;
  r.game_id = game.id;
  r.learner = learner;
  r.profile = profile;
  r.condition = options.condition;
  r.n_sessions = n_sessions;
  r.seed = seed;
  if (lbt) r.accuracy_curve.assign(game.iteration_count, 0.0);
  std::vector<std::size_t> curve_n(r.accuracy_curve.size(), 0);
  double time_sum = 0, hint_sum = 0;
  std::size_t responded = 0, iterations = 0, prompted = 0, invited = 0;
  for (auto& o : outcomes) {
    if (o.final_accuracy) r.final_accuracy.push_back(*o.final_accuracy);
    if (o.feedback_accuracy) r.feedback_accuracy.push_back(*o.feedback_accuracy);
    for (std::size_t k = 0; k < o.curve.size() && k < r.accuracy_curve.size(); ++k) {
      r.accuracy_curve[k] += o.curve[k];
      ++curve_n[k];
    }
    time_sum += o.time_sum;
    hint_sum += o.hint_sum;
    responded += o.responded;
    iterations += o.iterations;
    prompted += o.prompted;
    invited += o.invited;
    r.scores.push_back(std::move(o.score));
    r.log_digests.push_back(std::move(o.digest));
    if (o.log) r.logs.push_back(std::move(*o.log));
  }
  for (std::size_t k = 0; k < r.accuracy_curve.size(); ++k) {
    if (curve_n[k] > 0) r.accuracy_curve[k] /= static_cast<double>(curve_n[k]);
  }
  r.final_summary = describe(r.final_accuracy);
  if (r.final_accuracy.size() >= 2) {
    r.final_se = r.final_summary.sd / std::sqrt(static_cast<double>(r.final_accuracy.size()));
  }
  if (!r.feedback_accuracy.empty()) r.mean_feedback_accuracy = analysis::mean(r.feedback_accuracy);
  if (responded > 0) {
    r.mean_time_ms = time_sum / static_cast<double>(responded);
    r.mean_hint_ms = hint_sum / static_cast<double>(responded);
  }
  if (iterations > 0) {
    r.prompted_rate = static_cast<double>(prompted) / static_cast<double>(iterations);
    r.hint_invited_rate = static_cast<double>(invited) / static_cast<double>(iterations);
  }
  return r;
}

json to_json(const BatchResult& r) {
  const auto dist = [](const Distribution& d) {
    return json{{"mean", d.mean}, {"sd", d.sd},         {"q05", d.q05}, {"q25", d.q25},
                {"median", d.median}, {"q75", d.q75}, {"q95", d.q95}};
  };
  return {{"game_id", r.game_id},
          {"condition", session::to_string(r.condition)},
          {"n_sessions", r.n_sessions},
          {"seed", r.seed},
          {"learner", {{"alpha", r.learner.alpha}, {"initial_q", r.learner.initial_q}}},
          {"profile", to_json(r.profile)},
          {"accuracy_curve", r.accuracy_curve},
          {"final_accuracy", dist(r.final_summary)},
          {"final_accuracy_se", r.final_se},
          {"mean_feedback_accuracy", r.mean_feedback_accuracy},
          {"mean_time_ms", r.mean_time_ms},
          {"mean_hint_ms", r.mean_hint_ms},
          {"prompted_rate", r.prompted_rate},
          {"hint_invited_rate", r.hint_invited_rate}};
}

OracleResult monte_carlo_oracle(const game::GameSpec& game, double alpha, double p, std::size_t n_iterations,
                                std::size_t n_runs, std::uint64_t seed) {
  if (n_runs < 1000) throw DomainError("monte_carlo_oracle needs at least 1000 runs");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in (0, 1]");
  if (!is_probability(p)) throw DomainError("p must be in [0, 1]");
  game::GameSpec g = game;
  g.iteration_count = n_iterations;
  const std::size_t ns = g.n_states();
  const std::size_t na = g.n_actions;
  std::vector<std::size_t> key(ns);
  for (std::size_t s = 0; s < ns; ++s) key[s] = g.questions[s].correct.value;

  const std::uint64_t base = derive_seed(seed, kOracleSalt);
  std::vector<double> finals(n_runs);
  std::vector<double> q(ns * na);
  std::vector<std::size_t> ties;
  for (std::size_t run = 0; run < n_runs; ++run) {
    const std::uint64_t rs = derive_seed(base, run);
    const auto schedule = game::make_schedule(g, derive_seed(rs, 1));
    Rng tie_rng(derive_seed(rs, 2));
    Rng judge_rng(derive_seed(rs, 3));
    std::fill(q.begin(), q.end(), 0.0);
    for (const auto st : schedule.order) {
      const std::size_t s = st.value;
      const double* row = &q[s * na];
      const double best = *std::max_element(row, row + na);
      ties.clear();
      for (std::size_t a = 0; a < na; ++a) {
        if (row[a] == best) ties.push_back(a);
      }
      const std::size_t a = ties[tie_rng.uniform_index(ties.size())];
      const bool truthful = judge_rng.bernoulli(p);
      const double h = ((a == key[s]) == truthful) ? 1.0 : -1.0;
      double& v = q[s * na + a];
      v += alpha * (h - v);
    }
    double acc = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      const double* row = &q[s * na];
      const double best = *std::max_element(row, row + na);
      std::size_t k = 0;
      bool hit = false;
      for (std::size_t a = 0; a < na; ++a) {
        if (row[a] == best) {
          ++k;
          hit = hit || a == key[s];
        }
      }
      if (hit) acc += 1.0 / static_cast<double>(k);
    }
    finals[run] = acc / static_cast<double>(ns);
  }
  OracleResult r;
  r.n_runs = n_runs;
  r.mean = analysis::mean(finals);
  r.sd = analysis::stdev(finals);
  const double half = 1.96 * r.sd / std::sqrt(static_cast<double>(n_runs));
  r.ci95_low = r.mean - half;
  r.ci95_high = r.mean + half;
  return r;
}

}  // namespace lbt::sim
