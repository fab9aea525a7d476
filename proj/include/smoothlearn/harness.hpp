#pragma once

// Experiment orchestration: seeded target sampling, ε sweeps of adversary
// matches and the large-scale invariant audit.
//
// Randomness comes from std::mt19937_64 (fully specified by the standard, so
// streams agree across platforms). A double in [0,1) is the top 53 bits of a
// draw scaled by 2^-53; no std::uniform_real_distribution is involved because
// its output is implementation-defined.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "smoothlearn/adversary.hpp"
#include "smoothlearn/bounds.hpp"
#include "smoothlearn/errors.hpp"
#include "smoothlearn/learner.hpp"
#include "smoothlearn/pwl.hpp"

namespace smoothlearn {

/// 2^24 trials is the largest match the harness will run.
inline constexpr int kMaxHarnessStages = 24;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return lo + static_cast<std::uint64_t>(uniform01() * static_cast<double>(hi - lo + 1));
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

struct SampleOptions {
  double value_scale = 1.0;  // values are drawn from [-value_scale, value_scale]
};

/// A random piecewise-linear member of F_q: knots at 0, 1 and knot_count − 2
/// uniform interior points, uniform values, scaled down if ||f'||_q > 1.
inline PiecewiseLinearFunction sample_target(double q, int knot_count, std::uint64_t seed,
                                             SampleOptions options = {}) {
  if (!(q >= 1.0)) throw DomainError("norm order must be >= 1");
  if (knot_count < 2) throw PreconditionError("sample_target needs at least 2 knots");
  Rng rng(seed);
  std::set<double> coords{0.0, 1.0};
  while (coords.size() < static_cast<std::size_t>(knot_count)) coords.insert(rng.uniform01());

  std::vector<Knot> knots;
  knots.reserve(coords.size());
  for (double u : coords) knots.push_back(Knot{u, rng.uniform(-options.value_scale, options.value_scale)});

  auto f = from_points(knots);
  double norm = derivative_norm(f, q);
  if (norm > 1.0) {
    double scale = 1.0 / norm;
    for (;;) {
      std::vector<Knot> scaled = knots;
      for (Knot& k : scaled) k.v *= scale;
      f = from_points(scaled);
      if (derivative_norm(f, q) <= 1.0) break;
      scale *= 1.0 - 0x1.0p-50;
    }
  }
  return f;
}

/// `count` distinct uniform inputs in [0,1).
inline std::vector<double> random_inputs(std::size_t count, Rng& rng) {
  std::vector<double> xs;
  xs.reserve(count);
  std::set<double> seen;
  while (xs.size() < count) {
    const double x = rng.uniform01();
    if (seen.insert(x).second) xs.push_back(x);
  }
  return xs;
}

enum class TargetSource { adversary, file, sampled };

struct ExperimentConfig {
  LearnerKind learner = LearnerKind::linint;
  double epsilon = 0.1;
  std::vector<double> epsilons;
  int stages = 14;
  std::uint64_t seed = 7;
  TargetSource target = TargetSource::adversary;
  double q = 2.0;
  int knot_count = 8;
  std::size_t trials = 1000;      // non-adversary runs
  std::size_t runs = 1000;        // invariant audit
  std::size_t max_trials = 10000; // invariant audit, per run

  void validate() const {
    if (stages < 0 || stages > kMaxHarnessStages) {
      throw DomainError("stages must be at most " + std::to_string(kMaxHarnessStages) +
                        " (2^24 trials is the desk-scale ceiling), got " + std::to_string(stages));
    }
  }
};

/// ε grid from "log:a:b:n", "lin:a:b:n" or a comma-separated list.
inline std::vector<double> parse_epsilon_grid(const std::string& spec) {
  auto fail = [&] { return DomainError("malformed epsilon grid '" + spec + "'"); };
  auto to_double = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw fail();
    }
    if (pos != s.size()) throw fail();
    return v;
  };
  std::vector<std::string> parts;
  const char sep = (spec.rfind("log:", 0) == 0 || spec.rfind("lin:", 0) == 0) ? ':' : ',';
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  if (sep == ',') {
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(to_double(p));
    if (out.empty()) throw fail();
    return out;
  }
  if (parts.size() != 4) throw fail();
  const double a = to_double(parts[1]);
  const double b = to_double(parts[2]);
  const double nd = to_double(parts[3]);
  if (nd < 1 || nd != std::floor(nd)) throw fail();
  const auto n = static_cast<std::size_t>(nd);
  const bool log_spaced = parts[0] == "log";
  if (log_spaced && !(a > 0.0 && b > 0.0)) throw DomainError("log grid endpoints must be positive");
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
    if (k == 0) {
      out.push_back(a);
    } else if (k + 1 == n) {
      out.push_back(b);
    } else if (log_spaced) {
      out.push_back(std::exp(std::log(a) + s * (std::log(b) - std::log(a))));
    } else {
      out.push_back(a + s * (b - a));
    }
  }
  return out;
}

struct SweepRow {
  double epsilon = 0.0;
  int stages = 0;
  double total_loss = 0.0;
  double lower_partial = 0.0;
  double upper = 0.0;
  double loss_sqrt_eps = 0.0;
};

/// One adversary match per ε (sorted ascending). Rows are handed to
/// `on_row` as they complete so callers can flush partial results.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                       const std::function<void(const SweepRow&)>& on_row = {}) {
  config.validate();
  std::vector<double> grid = config.epsilons;
  std::sort(grid.begin(), grid.end());
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double eps : grid) {
    auto learner = make_learner(config.learner);
    const MatchResult m = run_match(*learner, AdversaryConfig{eps, config.stages}, MatchOptions{false, {}});
    SweepRow row{eps, config.stages, m.loss.total(), m.lower_partial, m.upper_linint,
                 m.loss.total() * std::sqrt(eps)};
    if (on_row) on_row(row);
    rows.push_back(row);
  }
  return rows;
}

struct DistanceSlack {
  double r = 0.0;
  double bound = 0.0;
  double worst_sum = 0.0;
};

struct AuditReport {
  std::size_t runs = 0;
  std::size_t total_trials = 0;
  double worst_e2_over_d = 0.0;
  double worst_squared_loss = 0.0;
  std::vector<DistanceSlack> distance;
  std::size_t matches = 0;
  double worst_recursion_residual = 0.0;
  double worst_J_probe = 0.0;
  double worst_slope = 0.0;
  std::vector<std::string> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

inline constexpr double kAuditTolerance = 1e-9;
inline constexpr double kAuditDistanceExponents[] = {1.5, 2.0, 3.0};
inline constexpr double kAuditEpsilons[] = {0.4, 0.25, 0.1, 0.05, 0.02};

/// Seeded LININT-versus-F_2 runs plus adversary matches, checking every trace
/// invariant the bounds rest on.
inline AuditReport run_invariant_audit(const ExperimentConfig& config) {
  config.validate();
  AuditReport report;
  for (double r : kAuditDistanceExponents) report.distance.push_back(DistanceSlack{r, distance_sum_bound(r), 0.0});

  Rng master(config.seed);
  const std::size_t max_trials = std::max<std::size_t>(config.max_trials, 1);
  for (std::size_t run = 0; run < config.runs; ++run) {
    const std::uint64_t run_seed = master.next();
    Rng rng(run_seed);
    const int knots = static_cast<int>(rng.between(2, 33));
    const auto target = sample_target(2.0, knots, rng.next());
    const std::size_t m = rng.between(1, max_trials);
    std::vector<Observation> seq;
    seq.reserve(m);
    for (double x : random_inputs(m, rng)) seq.push_back(Observation{x, target(x)});

    LinintLearner learner;
    const TrialRun trace = run_trials(learner, seq, 2.0);
    report.runs += 1;
    report.total_trials += m;
    const std::string where = "run " + std::to_string(run) + " (seed " + std::to_string(run_seed) + ")";

    report.worst_squared_loss = std::max(report.worst_squared_loss, trace.loss.total());
    if (trace.loss.total() > 1.0 + kAuditTolerance) {
      report.violations.push_back(where + ": squared loss " + std::to_string(trace.loss.total()) + " > 1");
    }
    for (DistanceSlack& slack : report.distance) {
      const TraceSums sums = trace_sums(trace.records, slack.r);
      slack.worst_sum = std::max(slack.worst_sum, sums.sum_d_pow_r);
      if (sums.sum_d_pow_r > slack.bound + kAuditTolerance) {
        report.violations.push_back(where + ": sum d^" + std::to_string(slack.r) + " = " +
                                    std::to_string(sums.sum_d_pow_r) + " > " + std::to_string(slack.bound));
      }
      if (slack.r == 2.0) {
        report.worst_e2_over_d = std::max(report.worst_e2_over_d, sums.sum_e2_over_d);
        if (sums.sum_e2_over_d > 1.0 + kAuditTolerance) {
          // Locate the trial at which the running sum first crossed the bound.
          double running = 0.0;
          for (const TrialRecord& rec : trace.records) {
            if (rec.t == 0) continue;
            running += *rec.e * *rec.e / *rec.d;
            if (running > 1.0 + kAuditTolerance) {
              report.violations.push_back(where + ": sum e^2/d crosses 1 at trial " + std::to_string(rec.t) +
                                          ", x = " + std::to_string(rec.x));
              break;
            }
          }
        }
      }
    }
  }

  if (config.stages > 0) {
    const std::vector<double> eps_grid = config.epsilons.empty()
                                             ? std::vector<double>(std::begin(kAuditEpsilons), std::end(kAuditEpsilons))
                                             : config.epsilons;
    for (double eps : eps_grid) {
      for (LearnerKind kind : {LearnerKind::zero, LearnerKind::nearest, LearnerKind::linint}) {
        auto learner = make_learner(kind);
        const MatchResult m = run_match(*learner, AdversaryConfig{eps, config.stages}, MatchOptions{false, {}});
        report.matches += 1;
        report.worst_recursion_residual = std::max(report.worst_recursion_residual, m.audit.max_recursion_residual);
        report.worst_J_probe = std::max(report.worst_J_probe, m.audit.max_J_probe);
        report.worst_slope = std::max({report.worst_slope, m.audit.final_max_slope, m.audit.max_new_slope});
        for (const std::string& v : soundness_violations(m)) {
          std::ostringstream where;
          where << "match eps=" << eps << " learner=" << to_string(kind) << ": " << v;
          report.violations.push_back(where.str());
        }
      }
    }
  }
  return report;
}

/// Throws AuditFailure listing every violation.
inline void enforce(const AuditReport& report) {
  if (report.ok()) return;
  std::string msg = std::to_string(report.violations.size()) + " invariant violation(s):";
  for (const auto& v : report.violations) msg += "\n  " + v;
  throw AuditFailure(msg);
}

/// Runs a learner on `trials` distinct uniform inputs labelled by `target`.
inline TrialRun run_on_target(Learner& learner, const PiecewiseLinearFunction& target, std::size_t trials,
                              double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Observation> seq;
  seq.reserve(trials);
  for (double x : random_inputs(trials, rng)) seq.push_back(Observation{x, target(x)});
  return run_trials(learner, seq, p);
}

}  // namespace smoothlearn
