#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "smoothlearn/adversary.hpp"
#include "smoothlearn/bounds.hpp"
#include "smoothlearn/learner.hpp"

namespace smoothlearn {
namespace {

// Random piecewise-linear target scaled so that ||f'||_2 ≤ 1.
PiecewiseLinearFunction random_f2_target(std::mt19937_64& gen, int knots) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<Knot> pts{{0.0, value(gen)}, {1.0, value(gen)}};
  for (int i = 2; i < knots; ++i) pts.push_back(Knot{unit(gen), value(gen)});
  auto f = from_points(pts);
  const double norm = derivative_norm(f, 2.0);
  if (norm > 1.0) {
    for (Knot& k : pts) k.v /= norm * (1.0 + 1e-15);
    f = from_points(pts);
  }
  return f;
}

std::vector<double> distinct_inputs(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::set<double> seen;
  std::vector<double> xs;
  while (xs.size() < n) {
    const double x = unit(gen);
    if (seen.insert(x).second) xs.push_back(x);
  }
  return xs;
}

std::vector<Observation> label(const PiecewiseLinearFunction& f, const std::vector<double>& xs) {
  std::vector<Observation> seq;
  for (double x : xs) seq.push_back(Observation{x, f(x)});
  return seq;
}

TEST(LinintPredict, Examples) {
  EXPECT_EQ(linint_predict(KnotList{}, 0.3), 0.0);
  EXPECT_EQ(linint_predict(KnotList::from_sorted({{0.5, 0.3}}), 0.25), 0.3);
  EXPECT_EQ(linint_predict(KnotList::from_sorted({{0.0, 0.0}, {1.0, 1.0}}), 0.5), 0.5);
  EXPECT_THROW(linint_predict(KnotList{}, -0.2), DomainError);
}

TEST(MakeLearner, Baselines) {
  auto zero = make_learner(LearnerKind::zero);
  zero->observe(0.2, 5.0);
  EXPECT_EQ(zero->predict(0.7), 0.0);

  auto nearest = make_learner("nearest");
  nearest->observe(0.25, 5.0);
  nearest->observe(0.75, 1.0);
  EXPECT_EQ(nearest->predict(0.3), 5.0);
  EXPECT_EQ(nearest->predict(0.7), 1.0);
  EXPECT_EQ(nearest->predict(0.5), 5.0);  // tie goes to the smaller x
  EXPECT_EQ(nearest->predict(0.75), 1.0);

  auto linint = make_learner(LearnerKind::linint);
  linint->observe(0.25, 1.0);
  linint->observe(0.75, 3.0);
  EXPECT_EQ(linint->predict(0.5), 2.0);
  EXPECT_EQ(linint->name(), "linint");

  EXPECT_THROW(make_learner("oracle"), UnknownKind);
}

TEST(MakeLearner, ConflictingObservationsAreRejected) {
  for (LearnerKind kind : {LearnerKind::linint, LearnerKind::nearest}) {
    auto l = make_learner(kind);
    l->observe(0.5, 1.0);
    EXPECT_NO_THROW(l->observe(0.5, 1.0));
    EXPECT_THROW(l->observe(0.5, 2.0), DuplicateConflict);
  }
}

TEST(RunTrials, ZeroLearnerSingleError) {
  ZeroLearner learner;
  const std::vector<Observation> seq{{1.0, 0.0}, {0.5, 0.25}};
  const TrialRun run = run_trials(learner, seq, 2.0);
  ASSERT_EQ(run.records.size(), 2u);
  EXPECT_FALSE(run.records[0].y_hat);
  EXPECT_FALSE(run.records[0].e);
  EXPECT_FALSE(run.records[0].d);
  EXPECT_EQ(*run.records[1].e, 0.25);
  EXPECT_EQ(*run.records[1].d, 0.5);
  EXPECT_EQ(run.loss.total(), 0.0625);
}

TEST(RunTrials, LinintOnZeroTargetHasNoLoss) {
  std::mt19937_64 gen(1);
  LinintLearner learner;
  const auto run = run_trials(learner, label(from_points({}), distinct_inputs(gen, 200)), 1.5);
  EXPECT_EQ(run.loss.total(), 0.0);
}

TEST(RunTrials, RejectsBadInputs) {
  ZeroLearner learner;
  const std::vector<Observation> bad{{1.2, 0.0}};
  EXPECT_THROW(run_trials(learner, bad, 2.0), DomainError);
  const std::vector<Observation> ok{{0.2, 0.0}};
  EXPECT_THROW(run_trials(learner, ok, 1.0), DomainError);
}

TEST(RunTrials, RepeatedInputsAreAnsweredExactly) {
  LinintLearner learner;
  const std::vector<Observation> seq{{0.3, 1.0}, {0.7, 2.0}, {0.3, 1.0}};
  const auto run = run_trials(learner, seq, 2.0);
  EXPECT_EQ(*run.records[2].e, 0.0);
  EXPECT_EQ(*run.records[2].d, 0.0);
  EXPECT_THROW(trace_sums(run.records, 2.0), DegenerateInput);
}

// Reference loss: recompute predictions from scratch at each trial.
TEST(RunTrials, MatchesBruteForceRecomputation) {
  std::mt19937_64 gen(77);
  const auto target = random_f2_target(gen, 9);
  const auto seq = label(target, distinct_inputs(gen, 60));
  LinintLearner learner;
  const double p = 1.3;
  const auto run = run_trials(learner, seq, p);
  double expected = 0.0;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    std::vector<Knot> history;
    double d = 1.0;
    for (std::size_t s = 0; s < t; ++s) {
      history.push_back(Knot{seq[s].x, seq[s].y});
      d = std::min(d, std::abs(seq[s].x - seq[t].x));
    }
    const double y_hat = evaluate(from_points(history), seq[t].x);
    EXPECT_EQ(*run.records[t].y_hat, y_hat);
    EXPECT_EQ(*run.records[t].d, d);
    expected += std::pow(std::abs(y_hat - seq[t].y), p);
  }
  EXPECT_NEAR(run.loss.total(), expected, 1e-12 * (1 + expected));
}

TEST(TraceSums, SingleTrialArithmetic) {
  TrialRecord first;
  TrialRecord second;
  second.t = 1;
  second.e = 0.1;
  second.d = 0.5;
  const std::vector<TrialRecord> recs{first, second};
  const TraceSums sums = trace_sums(recs, 2.0);
  EXPECT_NEAR(sums.sum_e2_over_d, 0.02, 1e-17);
  EXPECT_EQ(sums.sum_d_pow_r, 0.25);
  EXPECT_THROW(trace_sums(recs, 1.0), DomainError);
}

TEST(LearnerProperties, LinintIsConsistentOnObservedPoints) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto target = random_f2_target(gen, 3 + trial % 7);
    const auto xs = distinct_inputs(gen, 100);
    LinintLearner learner;
    for (double x : xs) learner.observe(x, target(x));
    for (double x : xs) EXPECT_EQ(learner.predict(x), target(x));
  }
}

TEST(LearnerProperties, LinintKlSumsStayBounded) {
  std::mt19937_64 gen(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const auto target = random_f2_target(gen, 2 + trial % 20);
    const auto seq = label(target, distinct_inputs(gen, 1 + trial * 13));
    LinintLearner learner;
    const auto run = run_trials(learner, seq, 2.0);
    EXPECT_LE(run.loss.total(), 1.0 + 1e-9);
    for (double r : {1.2, 1.5, 2.0, 3.0}) {
      const TraceSums sums = trace_sums(run.records, r);
      EXPECT_LE(sums.sum_e2_over_d, 1.0 + 1e-9);
      EXPECT_LE(sums.sum_e2_over_d, energy(target) + 1e-9);
      EXPECT_LE(sums.sum_d_pow_r, distance_sum_bound(r) + 1e-9) << "r=" << r;
    }
  }
}

// The dyadic refinement order 0, 1, 1/2, 1/4, 3/4, ... attains the distance bound.
TEST(LearnerProperties, DyadicScheduleAttainsDistanceBound) {
  std::vector<Observation> seq{{0.0, 0.0}, {1.0, 0.0}};
  for (std::uint64_t t = 1; t < (1u << 16); ++t) seq.push_back(Observation{dyadic_x(t), 0.0});
  ZeroLearner learner;
  const auto run = run_trials(learner, seq, 2.0);
  const TraceSums sums = trace_sums(run.records, 2.0);
  EXPECT_LE(sums.sum_d_pow_r, distance_sum_bound(2.0));
  EXPECT_NEAR(sums.sum_d_pow_r, distance_sum_bound(2.0), 1e-4);
}

TEST(LearnerProperties, LossIsMonotone) {
  std::mt19937_64 gen(9);
  const auto target = random_f2_target(gen, 12);
  const auto seq = label(target, distinct_inputs(gen, 500));
  NearestLearner learner;
  const auto run = run_trials(learner, seq, 1.25);
  double last = 0.0;
  for (const auto& rec : run.records) {
    if (!rec.cum_loss) continue;
    EXPECT_GE(*rec.cum_loss, last);
    last = *rec.cum_loss;
  }
  EXPECT_EQ(last, run.loss.total());
}

TEST(LearnerProperties, LinintAgainstAdversaryIsSandwiched) {
  LinintLearner learner;
  const MatchResult m = run_match(learner, AdversaryConfig{0.25, 10});
  EXPECT_GE(m.loss.total(), lower_bound_partial(0.25, 10));
  EXPECT_LE(m.loss.total(), upper_bound_linint(0.25));
}

}  // namespace
}  // namespace smoothlearn
