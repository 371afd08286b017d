#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "lbt/core/error.hpp"
#include "lbt/game/content_pack.hpp"
#include "lbt/game/schedule.hpp"
#include "lbt/tutee/q_table.hpp"

using namespace lbt;
using namespace lbt::tutee;

namespace {

QTable row_table(std::vector<double> row) {
  QTable q(1, row.size());
  for (std::size_t a = 0; a < row.size(); ++a) q.set_value(StateId{0}, ActionId{a}, row[a]);
  return q;
}

std::vector<std::size_t> tally(const QTable& q, std::uint64_t seed, int draws) {
  Rng rng(seed);
  std::vector<std::size_t> counts(q.n_actions(), 0);
  for (int i = 0; i < draws; ++i) ++counts[select_action(q, StateId{0}, rng).value];
  return counts;
}

}  // namespace

TEST(QTable, InitialisedEntries) {
  const auto body = game::builtin_body_parts();
  const auto q = new_q_table(body, {});
  EXPECT_EQ(q.values().size(), 15u);
  for (double v : q.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(new_q_table(game::builtin_grammar(), {}).values().size(), 18u);
  LearnerConfig half;
  half.initial_q = 0.5;
  const auto q_half = new_q_table(body, half);
  for (double v : q_half.values()) EXPECT_EQ(v, 0.5);
}

TEST(QTable, UnknownStateOrActionIsDomainError) {
  QTable q(5, 3);
  EXPECT_THROW(q.value(StateId{5}, ActionId{0}), DomainError);
  EXPECT_THROW(q.value(StateId{0}, ActionId{3}), DomainError);
  EXPECT_THROW(q.row(StateId{9}), DomainError);
  Rng rng(0);
  EXPECT_THROW(select_action(q, StateId{7}, rng), DomainError);
  EXPECT_THROW(apply_feedback(q, StateId{0}, ActionId{4}, FeedbackSignal::correct(), {}), DomainError);
}

TEST(QTable, TextSnapshotRoundTrips) {
  QTable q(2, 3);
  q.set_value(StateId{1}, ActionId{2}, -0.657);
  q.set_value(StateId{0}, ActionId{0}, 0.1 + 0.2);
  EXPECT_EQ(QTable::from_text(q.to_text()), q);
  EXPECT_THROW(QTable::from_text("garbage"), DataError);
}

TEST(Feedback, RejectsValuesOtherThanPlusMinusOne) {
  EXPECT_THROW(FeedbackSignal(0), DomainError);
  EXPECT_THROW(FeedbackSignal(2), DomainError);
  EXPECT_EQ(FeedbackSignal(-1).h(), -1);
}

TEST(Update, WorkedValues) {
  LearnerConfig c;
  c.alpha = 0.3;
  auto q = apply_feedback(QTable(1, 3), StateId{0}, ActionId{1}, FeedbackSignal::correct(), c);
  EXPECT_DOUBLE_EQ(q.value(StateId{0}, ActionId{1}), 0.3);

  for (double alpha : {0.1, 0.3, 0.77, 1.0}) {
    c.alpha = alpha;
    auto one = QTable(1, 3, 1.0);
    EXPECT_EQ(apply_feedback(one, StateId{0}, ActionId{0}, FeedbackSignal::correct(), c).value(StateId{0}, ActionId{0}),
              1.0);
  }
  c.alpha = 1.0;
  EXPECT_EQ(apply_feedback(QTable(1, 3), StateId{0}, ActionId{2}, FeedbackSignal::incorrect(), c)
                .value(StateId{0}, ActionId{2}),
            -1.0);
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), DomainError);
}

// 1,000 randomized update sequences: boundedness, locality and the exact
// contraction factor on every step.
TEST(Update, PropertiesOverRandomSequences) {
  std::mt19937_64 g(99);
  std::uniform_real_distribution<double> alpha_d(1e-3, 1.0), init_d(-1.0, 1.0);
  for (int seq = 0; seq < 1000; ++seq) {
    LearnerConfig c;
    c.alpha = seq % 10 == 0 ? 1.0 : alpha_d(g);
    const std::size_t ns = 1 + g() % 6, na = 2 + g() % 3;
    QTable q(ns, na, init_d(g));
    for (int step = 0; step < 60; ++step) {
      const StateId s{g() % ns};
      const ActionId a{g() % na};
      const FeedbackSignal fb(g() % 2 ? 1 : -1);
      const auto next = apply_feedback(q, s, a, fb, c);
      const double before = q.value(s, a), after = next.value(s, a);
      ASSERT_NEAR(std::abs(after - fb.h()), (1.0 - c.alpha) * std::abs(before - fb.h()), 1e-12);
      std::size_t changed = 0;
      for (std::size_t i = 0; i < q.values().size(); ++i) {
        if (q.values()[i] != next.values()[i]) ++changed;
        ASSERT_GE(next.values()[i], -1.0);
        ASSERT_LE(next.values()[i], 1.0);
      }
      ASSERT_LE(changed, 1u);
      if (before != fb.h()) {
        ASSERT_EQ(changed, 1u);
      }
      q = next;
    }
  }
}

TEST(Select, AllZeroTiesAreUniform) {
  const auto counts = tally(QTable(1, 3), 2024, 10'000);
  double chi2 = 0;
  for (auto c : counts) {
    EXPECT_NEAR(c / 10'000.0, 1.0 / 3.0, 0.02);
    chi2 += (c - 10'000 / 3.0) * (c - 10'000 / 3.0) / (10'000 / 3.0);
  }
  EXPECT_LT(chi2, boost::math::quantile(boost::math::chi_squared(2), 0.999));
}

TEST(Select, UniqueArgmaxAlwaysChosen) {
  const auto counts = tally(row_table({0.3, -0.3, 0.0}), 5, 1000);
  EXPECT_EQ(counts[0], 1000u);
}

TEST(Select, TwoWayTieWithinBinomialBounds) {
  const auto counts = tally(row_table({0.3, 0.3, -0.3}), 77, 10'000);
  EXPECT_EQ(counts[2], 0u);
  const boost::math::binomial b(10'000, 0.5);
  EXPECT_GE(counts[0], boost::math::quantile(b, 0.0005));
  EXPECT_LE(counts[0], boost::math::quantile(boost::math::complement(b, 0.0005)));
}

TEST(GreedyAccuracy, WorkedValues) {
  const std::vector<ActionId> key{ActionId{0}, ActionId{1}, ActionId{2}, ActionId{0}, ActionId{1}};
  QTable q(5, 3);
  EXPECT_DOUBLE_EQ(greedy_accuracy(q, key), 1.0 / 3.0);
  q.set_value(StateId{0}, ActionId{0}, 0.5);
  q.set_value(StateId{1}, ActionId{1}, 0.5);
  EXPECT_NEAR(greedy_accuracy(q, key), 0.6, 1e-12);
  for (std::size_t s = 0; s < 5; ++s) q.set_value(StateId{s}, key[s], 0.1);
  EXPECT_DOUBLE_EQ(greedy_accuracy(q, key), 1.0);
}

// Truthful feedback with n_actions visits per state ends with the correct
// greedy action everywhere, for every alpha and seed.
TEST(Tutee, PerfectFeedbackConverges) {
  const auto body = game::builtin_body_parts();
  const auto key = body.answer_key();
  for (double alpha : {0.1, 0.3, 1.0}) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Tutee t(body, {alpha, 0.0, seed});
      for (auto s : game::make_schedule(body, seed).order) {
        const auto a = t.act(s);
        t.learn(s, a, FeedbackSignal(a == key[s.value] ? 1 : -1));
      }
      ASSERT_EQ(greedy_accuracy(t.table(), key), 1.0) << "alpha " << alpha << " seed " << seed;
    }
  }
}

TEST(Tutee, DeterministicForSeed) {
  const auto body = game::builtin_body_parts();
  auto run = [&](std::uint64_t seed) {
    Tutee t(body, {0.3, 0.0, seed});
    Rng judge(seed + 1);
    for (auto s : game::make_schedule(body, seed).order) {
      const auto a = t.act(s);
      t.learn(s, a, FeedbackSignal(judge.bernoulli(0.5) ? 1 : -1));
    }
    return t.table();
  };
  EXPECT_EQ(run(8), run(8));
  EXPECT_NE(run(8), run(9));
}
