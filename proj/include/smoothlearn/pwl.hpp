#pragma once

// Piecewise-linear functions on [0,1] with constant extension beyond the
// outermost knots, their derivative norms and the energy J[f] = ∫ f'(x)^2 dx.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smoothlearn/errors.hpp"

namespace smoothlearn {

/// Norm order that selects the sup norm in derivative_norm / is_member.
inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// Absolute tolerance on the equidistance hypothesis of energy_increment.
inline constexpr double kDefaultEquidistanceTol = 1e-12;

struct Knot {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Knot&, const Knot&) = default;
};

namespace detail {

inline void require_unit_coordinate(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(x));
  }
}

// Value on the chord (a, b] at x. Hitting the right end returns b.v exactly so
// that a function always reproduces its knot values bit-for-bit.
inline double chord(const Knot& a, const Knot& b, double x) {
  if (x == b.u) return b.v;
  return a.v + (x - a.u) * (b.v - a.v) / (b.u - a.u);
}

inline double segment_energy(const Knot& a, const Knot& b) {
  const double rise = b.v - a.v;
  return rise * rise / (b.u - a.u);
}

}  // namespace detail

/// Knots strictly increasing in u, every u in [0,1]. May be empty.
class KnotList {
 public:
  KnotList() = default;

  /// Takes knots that are already sorted; throws if the ordering invariant fails.
  static KnotList from_sorted(std::vector<Knot> knots) {
    for (std::size_t i = 0; i < knots.size(); ++i) {
      detail::require_unit_coordinate(knots[i].u, "knot coordinate");
      if (i > 0 && !(knots[i - 1].u < knots[i].u)) {
        throw PreconditionError("knot coordinates must be strictly increasing");
      }
    }
    KnotList out;
    out.knots_ = std::move(knots);
    return out;
  }

  [[nodiscard]] std::span<const Knot> knots() const noexcept { return knots_; }
  [[nodiscard]] std::size_t size() const noexcept { return knots_.size(); }
  [[nodiscard]] bool empty() const noexcept { return knots_.empty(); }
  const Knot& operator[](std::size_t i) const { return knots_[i]; }
  [[nodiscard]] auto begin() const noexcept { return knots_.begin(); }
  [[nodiscard]] auto end() const noexcept { return knots_.end(); }

  friend bool operator==(const KnotList&, const KnotList&) = default;

 private:
  std::vector<Knot> knots_;
};

/// The interpolant f_S of a knot list. Immutable; the empty list is the zero
/// function and a single knot is a constant.
class PiecewiseLinearFunction {
 public:
  PiecewiseLinearFunction() = default;
  explicit PiecewiseLinearFunction(KnotList knots) : knots_(std::move(knots)) {}

  [[nodiscard]] const KnotList& knots() const noexcept { return knots_; }

  [[nodiscard]] double operator()(double x) const {
    detail::require_unit_coordinate(x, "evaluation point");
    const auto ks = knots_.knots();
    if (ks.empty()) return 0.0;
    auto it = std::lower_bound(ks.begin(), ks.end(), x,
                               [](const Knot& k, double value) { return k.u < value; });
    if (it == ks.begin()) return ks.front().v;
    if (it == ks.end()) return ks.back().v;
    return detail::chord(*std::prev(it), *it, x);
  }

  friend bool operator==(const PiecewiseLinearFunction&, const PiecewiseLinearFunction&) = default;

 private:
  KnotList knots_;
};

/// Builds f_S from an unordered point set. Equal duplicates collapse; a shared
/// coordinate with different values is a DuplicateConflict.
inline PiecewiseLinearFunction from_points(std::span<const Knot> points) {
  std::vector<Knot> sorted(points.begin(), points.end());
  for (const Knot& k : sorted) detail::require_unit_coordinate(k.u, "knot coordinate");
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Knot& a, const Knot& b) { return a.u < b.u; });
  std::vector<Knot> unique;
  unique.reserve(sorted.size());
  for (const Knot& k : sorted) {
    if (!unique.empty() && unique.back().u == k.u) {
      if (unique.back().v != k.v) {
        throw DuplicateConflict("conflicting values at u = " + std::to_string(k.u));
      }
      continue;
    }
    unique.push_back(k);
  }
  return PiecewiseLinearFunction(KnotList::from_sorted(std::move(unique)));
}

inline PiecewiseLinearFunction from_points(std::initializer_list<Knot> points) {
  return from_points(std::span<const Knot>(points.begin(), points.size()));
}

inline double evaluate(const PiecewiseLinearFunction& f, double x) { return f(x); }

/// Exact J[f] for a piecewise-linear f: sum of rise^2 / run over segments.
inline double energy(const PiecewiseLinearFunction& f) {
  const auto ks = f.knots().knots();
  double total = 0.0;
  for (std::size_t i = 1; i < ks.size(); ++i) total += detail::segment_energy(ks[i - 1], ks[i]);
  return total;
}

/// Riemann-sum estimate of ∫ f'(x)^2 dx from finite differences over n uniform
/// cells. Shares nothing with energy() beyond the knot data; used to check it.
inline double integrate_energy_oracle(const PiecewiseLinearFunction& f, std::size_t n) {
  if (n == 0) throw PreconditionError("integrate_energy_oracle needs n >= 1");
  const auto ks = f.knots().knots();
  if (ks.size() < 2) return 0.0;

  // Sampling walks the grid left to right with a segment cursor.
  std::vector<double> slope(ks.size() - 1);
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    slope[i] = (ks[i + 1].v - ks[i].v) / (ks[i + 1].u - ks[i].u);
  }
  std::size_t seg = 0;
  auto sample = [&](double x) {
    if (x <= ks.front().u) return ks.front().v;
    if (x >= ks.back().u) return ks.back().v;
    while (ks[seg + 1].u < x) ++seg;
    return ks[seg].v + (x - ks[seg].u) * slope[seg];
  };

  const double h = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  double left = sample(0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = (k == n) ? 1.0 : static_cast<double>(k) / static_cast<double>(n);
    const double right = sample(x);
    const double diff = (right - left) / h;
    sum += diff * diff;
    left = right;
  }
  return sum * h;
}

inline double max_abs_slope(const PiecewiseLinearFunction& f) {
  const auto ks = f.knots().knots();
  double best = 0.0;
  for (std::size_t i = 1; i < ks.size(); ++i) {
    best = std::max(best, std::abs((ks[i].v - ks[i - 1].v) / (ks[i].u - ks[i - 1].u)));
  }
  return best;
}

/// ||f'||_q on [0,1]; q = kInfNorm gives max |slope|.
inline double derivative_norm(const PiecewiseLinearFunction& f, double q) {
  if (!(q >= 1.0)) throw DomainError("norm order must be >= 1");
  if (std::isinf(q)) return max_abs_slope(f);
  const auto ks = f.knots().knots();
  double total = 0.0;
  for (std::size_t i = 1; i < ks.size(); ++i) {
    const double run = ks[i].u - ks[i - 1].u;
    const double s = std::abs((ks[i].v - ks[i - 1].v) / run);
    total += std::pow(s, q) * run;
  }
  return std::pow(total, 1.0 / q);
}

/// Membership in F_q (or F_∞) up to a relative tolerance.
inline bool is_member(const PiecewiseLinearFunction& f, double q, double tol = 0.0) {
  return derivative_norm(f, q) <= 1.0 + tol;
}

/// J[f_{S ∪ {(x,y)}}] − J[f_S] when x is the midpoint of two adjacent knots.
inline double energy_increment(const KnotList& knots, double x, double y,
                               double tol = kDefaultEquidistanceTol) {
  detail::require_unit_coordinate(x, "insertion point");
  const auto ks = knots.knots();
  if (ks.empty()) throw PreconditionError("energy_increment needs a nonempty knot list");
  auto it = std::lower_bound(ks.begin(), ks.end(), x,
                             [](const Knot& k, double value) { return k.u < value; });
  if (it == ks.begin() || it == ks.end() || it->u == x) {
    throw PreconditionError("insertion point must lie strictly between two knots");
  }
  const Knot& left = *std::prev(it);
  const Knot& right = *it;
  const double dl = x - left.u;
  const double dr = right.u - x;
  if (std::abs(dl - dr) > tol) {
    throw PreconditionError("insertion point is not equidistant from its nearest knots");
  }
  double gap = 0.0;
  if (dl == dr) {
    // Exact midpoint: y - (vL + vR)/2 with the sum's rounding error carried
    // separately (TwoSum), so small pushes keep their digits.
    const double sum = left.v + right.v;
    const double back = sum - left.v;
    const double err = (left.v - (sum - back)) + (right.v - back);
    gap = (y - 0.5 * sum) - 0.5 * err;
  } else {
    gap = y - detail::chord(left, right, x);
  }
  return 2.0 * gap * gap / std::min(dl, dr);
}

/// Mutable knot set with O(log n) insertion and evaluation, keeping a running
/// energy via local segment replacement. Used wherever functions grow one
/// knot per trial.
class GrowingInterpolant {
 public:
  GrowingInterpolant() = default;

  explicit GrowingInterpolant(const PiecewiseLinearFunction& f) {
    for (const Knot& k : f.knots()) knots_.emplace_hint(knots_.end(), k.u, k.v);
    energy_ = smoothlearn::energy(f);
  }

  /// Inserts (u, v); returns the change in energy. Re-inserting an existing
  /// knot with the same value is a no-op.
  double insert(double u, double v) {
    detail::require_unit_coordinate(u, "knot coordinate");
    auto [it, inserted] = knots_.try_emplace(u, v);
    if (!inserted) {
      if (it->second != v) {
        throw DuplicateConflict("conflicting values at u = " + std::to_string(u));
      }
      return 0.0;
    }
    const Knot mid{u, v};
    double delta = 0.0;
    const bool has_left = it != knots_.begin();
    const auto next = std::next(it);
    const bool has_right = next != knots_.end();
    if (has_left) {
      const auto prev = std::prev(it);
      const Knot left{prev->first, prev->second};
      delta += detail::segment_energy(left, mid);
      if (has_right) {
        const Knot right{next->first, next->second};
        delta += detail::segment_energy(mid, right) - detail::segment_energy(left, right);
      }
    } else if (has_right) {
      delta += detail::segment_energy(mid, Knot{next->first, next->second});
    }
    energy_ += delta;
    return delta;
  }

  [[nodiscard]] double operator()(double x) const {
    detail::require_unit_coordinate(x, "evaluation point");
    if (knots_.empty()) return 0.0;
    auto it = knots_.lower_bound(x);
    if (it == knots_.begin()) return it->second;
    if (it == knots_.end()) return std::prev(it)->second;
    const auto prev = std::prev(it);
    return detail::chord(Knot{prev->first, prev->second}, Knot{it->first, it->second}, x);
  }

  [[nodiscard]] std::optional<double> value_at(double u) const {
    auto it = knots_.find(u);
    if (it == knots_.end()) return std::nullopt;
    return it->second;
  }

  /// Nearest knots strictly left and strictly right of x.
  [[nodiscard]] std::pair<std::optional<Knot>, std::optional<Knot>> neighbors(double x) const {
    std::optional<Knot> left;
    std::optional<Knot> right;
    auto it = knots_.lower_bound(x);
    if (it != knots_.begin()) {
      const auto prev = std::prev(it);
      left = Knot{prev->first, prev->second};
    }
    if (it != knots_.end() && it->first == x) ++it;
    if (it != knots_.end()) right = Knot{it->first, it->second};
    return {left, right};
  }

  [[nodiscard]] double energy() const noexcept { return energy_; }

  /// Replaces the running energy with a from-scratch segment sum.
  double recompute_energy() {
    double total = 0.0;
    for (auto it = knots_.begin(); it != knots_.end() && std::next(it) != knots_.end(); ++it) {
      const auto nx = std::next(it);
      total += detail::segment_energy(Knot{it->first, it->second}, Knot{nx->first, nx->second});
    }
    energy_ = total;
    return total;
  }

  [[nodiscard]] std::size_t size() const noexcept { return knots_.size(); }
  [[nodiscard]] bool empty() const noexcept { return knots_.empty(); }

  [[nodiscard]] KnotList knot_list() const {
    std::vector<Knot> out;
    out.reserve(knots_.size());
    for (const auto& [u, v] : knots_) out.push_back(Knot{u, v});
    return KnotList::from_sorted(std::move(out));
  }

  [[nodiscard]] PiecewiseLinearFunction snapshot() const { return PiecewiseLinearFunction(knot_list()); }

 private:
  std::map<double, double> knots_;
  double energy_ = 0.0;
};

}  // namespace smoothlearn
