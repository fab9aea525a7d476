#pragma once

// Online learners for real-valued functions on [0,1] and the L_p loss
// accounting of a predict-then-reveal trial sequence.

#include <cmath>
#include <cstddef>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smoothlearn/errors.hpp"
#include "smoothlearn/pwl.hpp"

namespace smoothlearn {

/// An online learner: predict(x) for the upcoming trial, then observe the
/// revealed value. predict never changes state.
class Learner {
 public:
  virtual ~Learner() = default;
  [[nodiscard]] virtual double predict(double x) const = 0;
  virtual void observe(double x, double y) = 0;
  [[nodiscard]] virtual std::string_view name() const = 0;
};

enum class LearnerKind { linint, zero, nearest };

inline LearnerKind parse_learner_kind(std::string_view text) {
  if (text == "linint") return LearnerKind::linint;
  if (text == "zero") return LearnerKind::zero;
  if (text == "nearest") return LearnerKind::nearest;
  throw UnknownKind("unknown learner kind '" + std::string(text) + "' (expected linint, zero or nearest)");
}

inline std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::linint: return "linint";
    case LearnerKind::zero: return "zero";
    case LearnerKind::nearest: return "nearest";
  }
  return "unknown";
}

/// LININT prediction from an explicit history: 0 with no history, otherwise
/// the interpolant of everything seen so far.
inline double linint_predict(const KnotList& history, double x) {
  detail::require_unit_coordinate(x, "prediction point");
  if (history.empty()) return 0.0;
  return PiecewiseLinearFunction(history)(x);
}

/// Interpolates all observed pairs, clamped outside their span.
class LinintLearner final : public Learner {
 public:
  [[nodiscard]] double predict(double x) const override { return history_(x); }
  void observe(double x, double y) override { history_.insert(x, y); }
  [[nodiscard]] std::string_view name() const override { return "linint"; }

  [[nodiscard]] KnotList history() const { return history_.knot_list(); }

 private:
  GrowingInterpolant history_;
};

class ZeroLearner final : public Learner {
 public:
  [[nodiscard]] double predict(double x) const override {
    detail::require_unit_coordinate(x, "prediction point");
    return 0.0;
  }
  void observe(double x, double) override { detail::require_unit_coordinate(x, "observation point"); }
  [[nodiscard]] std::string_view name() const override { return "zero"; }
};

/// Answers with the value at the closest observed input; ties go to the smaller x.
class NearestLearner final : public Learner {
 public:
  [[nodiscard]] double predict(double x) const override {
    detail::require_unit_coordinate(x, "prediction point");
    if (seen_.empty()) return 0.0;
    auto right = seen_.lower_bound(x);
    if (right == seen_.end()) return std::prev(right)->second;
    if (right == seen_.begin()) return right->second;
    auto left = std::prev(right);
    return (x - left->first <= right->first - x) ? left->second : right->second;
  }

  void observe(double x, double y) override {
    detail::require_unit_coordinate(x, "observation point");
    auto [it, inserted] = seen_.try_emplace(x, y);
    if (!inserted && it->second != y) {
      throw DuplicateConflict("conflicting values at x = " + std::to_string(x));
    }
  }

  [[nodiscard]] std::string_view name() const override { return "nearest"; }

 private:
  std::map<double, double> seen_;
};

inline std::unique_ptr<Learner> make_learner(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::linint: return std::make_unique<LinintLearner>();
    case LearnerKind::zero: return std::make_unique<ZeroLearner>();
    case LearnerKind::nearest: return std::make_unique<NearestLearner>();
  }
  throw UnknownKind("unknown learner kind");
}

inline std::unique_ptr<Learner> make_learner(std::string_view kind) {
  return make_learner(parse_learner_kind(kind));
}

struct Observation {
  double x = 0.0;
  double y = 0.0;
};

/// One trial. Trial 0 carries no prediction, error, distance or loss.
struct TrialRecord {
  std::size_t t = 0;
  double x = 0.0;
  std::optional<double> y_hat;
  double y = 0.0;
  std::optional<double> e;
  std::optional<double> d;
  std::optional<double> loss_term;
  std::optional<double> cum_loss;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Running Σ_{t≥1} e_t^p.
class LossAccount {
 public:
  explicit LossAccount(double p) : p_(p) {
    if (!(p > 1.0) || std::isinf(p)) throw DomainError("loss exponent must satisfy p > 1");
  }

  double add(double error) {
    const double term = std::pow(std::abs(error), p_);
    total_ += term;
    return term;
  }

  [[nodiscard]] double p() const noexcept { return p_; }
  [[nodiscard]] double epsilon() const noexcept { return p_ - 1.0; }
  [[nodiscard]] double total() const noexcept { return total_; }

 private:
  double p_;
  double total_ = 0.0;
};

/// Turns (x, ŷ, y) triples into TrialRecords: tracks the trial index, the
/// distance to the closest earlier input and the running loss.
class TrialLog {
 public:
  explicit TrialLog(double p) : loss_(p) {}

  TrialRecord record(double x, double y_hat, double y) {
    detail::require_unit_coordinate(x, "trial input");
    TrialRecord rec;
    rec.t = next_t_++;
    rec.x = x;
    rec.y = y;
    if (rec.t > 0) {
      rec.y_hat = y_hat;
      rec.e = std::abs(y_hat - y);
      rec.d = min_distance(x);
      rec.loss_term = loss_.add(*rec.e);
      rec.cum_loss = loss_.total();
    }
    inputs_.insert(x);
    return rec;
  }

  [[nodiscard]] const LossAccount& loss() const noexcept { return loss_; }
  [[nodiscard]] std::size_t trials() const noexcept { return next_t_; }

 private:
  double min_distance(double x) const {
    auto right = inputs_.lower_bound(x);
    double best = std::numeric_limits<double>::infinity();
    if (right != inputs_.end()) best = *right - x;
    if (right != inputs_.begin()) best = std::min(best, x - *std::prev(right));
    return best;
  }

  LossAccount loss_;
  std::set<double> inputs_;
  std::size_t next_t_ = 0;
};

struct TrialRun {
  std::vector<TrialRecord> records;
  LossAccount loss;
};

/// Drives a learner through a fixed (x, y) sequence, trial 0 first.
inline TrialRun run_trials(Learner& learner, std::span<const Observation> sequence, double p) {
  TrialLog log(p);
  std::vector<TrialRecord> records;
  records.reserve(sequence.size());
  for (const Observation& obs : sequence) {
    const double y_hat = learner.predict(obs.x);
    records.push_back(log.record(obs.x, y_hat, obs.y));
    learner.observe(obs.x, obs.y);
  }
  return TrialRun{std::move(records), log.loss()};
}

/// The two trace sums bounded in the LININT analysis.
struct TraceSums {
  double sum_e2_over_d = 0.0;
  double sum_d_pow_r = 0.0;
};

inline TraceSums trace_sums(std::span<const TrialRecord> records, double r) {
  if (!(r > 1.0)) throw DomainError("distance exponent must satisfy r > 1");
  TraceSums sums;
  for (const TrialRecord& rec : records) {
    if (rec.t == 0 || !rec.d) continue;
    const double d = *rec.d;
    if (!(d > 0.0)) {
      throw DegenerateInput("repeated input coordinate at trial " + std::to_string(rec.t));
    }
    const double e = rec.e.value_or(0.0);
    sums.sum_e2_over_d += e * e / d;
    sums.sum_d_pow_r += std::pow(d, r);
  }
  return sums;
}

}  // namespace smoothlearn
