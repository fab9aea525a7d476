#pragma once

// Closed-form bounds on the worst-case (1+ε)-loss for learning functions with
// ||f'||_2 ≤ 1 (upper, via LININT) and ||f'||_∞ ≤ 1 (lower, via the dyadic
// adversary). Everything is evaluated in its exact pre-asymptotic form; powers
// go through log space so that ε down to ~1e-300 neither underflows nor
// cancels.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include "smoothlearn/errors.hpp"

namespace smoothlearn {

namespace detail {

inline void require_open(double eps, double lo, double hi, const char* what) {
  if (!(eps > lo && eps < hi)) {
    throw DomainError(std::string(what) + " must lie in (" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "), got " + std::to_string(eps));
  }
}

// 2^x − 2 for x > 1 without cancellation near x = 1.
inline double two_pow_minus_two(double x) { return 2.0 * std::expm1((x - 1.0) * std::numbers::ln2); }

}  // namespace detail

/// 1 + 1/(2^r − 2): the bound on Σ d_t^r for any sequence of distinct inputs.
inline double distance_sum_bound(double r) {
  if (!(r > 1.0)) throw DomainError("distance_sum_bound needs r > 1");
  return 1.0 + 1.0 / detail::two_pow_minus_two(r);
}

/// Hölder bound on LININT's total (1+ε)-loss against any target with
/// ||f'||_2 ≤ 1: (Σ e²/d)^{p/2} · (Σ d^{p/(2−p)})^{1−p/2} with the first factor ≤ 1.
inline double upper_bound_linint(double epsilon) {
  detail::require_open(epsilon, 0.0, 1.0, "epsilon");
  // p/(2−p) − 1 = 2ε/(1−ε)
  const double excess = 2.0 * epsilon / (1.0 - epsilon);
  const double denom = 2.0 * std::expm1(excess * std::numbers::ln2);
  const double base = 1.0 + 1.0 / denom;
  return std::pow(base, (1.0 - epsilon) / 2.0);
}

namespace detail {

// log of 2^{k−2} · (√ε (1−ε)^{k/2} / 2^{k+1})^{1+ε}
inline double log_lower_term(double epsilon, int k) {
  const double p = 1.0 + epsilon;
  const double log_pert = 0.5 * std::log(epsilon) + 0.5 * k * std::log1p(-epsilon) -
                          (k + 1) * std::numbers::ln2;
  return (k - 2) * std::numbers::ln2 + p * log_pert;
}

}  // namespace detail

/// Forced-loss partial sum over the first `stages` adversary stages.
inline double lower_bound_partial(double epsilon, int stages) {
  detail::require_open(epsilon, 0.0, 0.5, "epsilon");
  if (stages < 1) throw DomainError("stage count must be >= 1");
  double sum = 0.0;
  for (int k = 1; k <= stages; ++k) sum += std::exp(detail::log_lower_term(epsilon, k));
  return sum;
}

/// Limit of lower_bound_partial as the stage count grows: a geometric series
/// with ratio 2(√(1−ε)/2)^{1+ε}.
inline double lower_bound_closed_form(double epsilon) {
  detail::require_open(epsilon, 0.0, 0.5, "epsilon");
  const double p = 1.0 + epsilon;
  const double ln2 = std::numbers::ln2;
  // log of 2(√(1−ε)/2)^{1+ε}, arranged so the ln 2 terms cancel exactly
  const double log_ratio = -epsilon * ln2 + 0.5 * p * std::log1p(-epsilon);
  if (!(log_ratio < 0.0)) throw DivergenceError("lower-bound series ratio is not below 1");
  const double log_numerator =
      -ln2 + p * (0.5 * std::log(epsilon) + 0.5 * std::log1p(-epsilon) - 2.0 * ln2);
  return std::exp(log_numerator) / -std::expm1(log_ratio);
}

/// Bound values for one ε. Lower-bound fields are empty when ε ≥ 1/2, where
/// the adversary construction does not apply.
struct BoundReport {
  double epsilon = 0.0;
  double upper_linint = 0.0;
  std::optional<double> lower_closed_form;
  std::optional<double> lower_partial;
  int stages = 0;
  double ratio_upper = 0.0;  // upper · √ε
  std::optional<double> ratio_lower;
};

inline BoundReport make_bound_report(double epsilon, int stages) {
  BoundReport r;
  r.epsilon = epsilon;
  r.stages = stages;
  r.upper_linint = upper_bound_linint(epsilon);
  r.ratio_upper = r.upper_linint * std::sqrt(epsilon);
  if (epsilon < 0.5) {
    r.lower_closed_form = lower_bound_closed_form(epsilon);
    r.lower_partial = lower_bound_partial(epsilon, stages);
    r.ratio_lower = *r.lower_closed_form * std::sqrt(epsilon);
  }
  return r;
}

/// Minimum slack of the two scalar inequalities closing the lower-bound
/// argument: (1−ε)^{(1+ε)/2} ≥ 1 − ε(1+ε) on [0, 1/2] and 2^ε ≤ 1 + ε on [0, 1].
struct InequalityReport {
  std::size_t points = 0;
  double min_slack_power = std::numeric_limits<double>::infinity();
  double worst_eps_power = 0.0;
  double min_slack_exp2 = std::numeric_limits<double>::infinity();
  double worst_eps_exp2 = 0.0;
};

inline InequalityReport check_proof_inequalities(std::span<const double> grid) {
  if (grid.empty()) throw PreconditionError("inequality grid is empty");
  InequalityReport report;
  for (double eps : grid) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("grid point outside [0,1]: " + std::to_string(eps));
    ++report.points;
    if (eps <= 0.5) {
      const double slack = std::pow(1.0 - eps, (1.0 + eps) / 2.0) - (1.0 - eps * (1.0 + eps));
      if (slack < report.min_slack_power) {
        report.min_slack_power = slack;
        report.worst_eps_power = eps;
      }
      if (slack < 0.0) {
        throw InequalityViolation("(1-e)^((1+e)/2) >= 1-e(1+e) fails at e = " + std::to_string(eps));
      }
    }
    const double slack = 1.0 + eps - std::exp2(eps);
    if (slack < report.min_slack_exp2) {
      report.min_slack_exp2 = slack;
      report.worst_eps_exp2 = eps;
    }
    if (slack < 0.0) throw InequalityViolation("2^e <= 1+e fails at e = " + std::to_string(eps));
  }
  return report;
}

}  // namespace smoothlearn
