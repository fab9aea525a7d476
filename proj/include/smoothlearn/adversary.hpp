#pragma once

// Adaptive lower-bound adversary for learners of F_∞ (functions on [0,1] with
// |f'| ≤ 1). Inputs follow the dyadic schedule x_t = (2j+1)/2^i for the j-th
// trial of stage i; the revealed value is a perturbation of the current
// interpolant pushed away from the learner's prediction, unless accepting it
// would create a slope steeper than 1 next to x_t.
//
// Two interpolants are maintained: the committed function f_t, which fits
// every revealed label, and the probe g_{i,j}, which fits the proposed values
// v_s of the current stage whether or not they were accepted. The probe's
// energy grows by exactly ε(1−ε)^i / 2^{i+1} per trial, and the cap J < 1/4
// is what forces at least half of every stage to be accepted.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smoothlearn/bounds.hpp"
#include "smoothlearn/errors.hpp"
#include "smoothlearn/learner.hpp"
#include "smoothlearn/pwl.hpp"

namespace smoothlearn {

/// Dyadic coordinates stay exact doubles up to this depth.
inline constexpr int kMaxAdversaryStages = 50;

struct AdversaryConfig {
  double epsilon = 0.25;
  int stages = 1;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 0.5)) {
      throw DomainError("adversary epsilon must lie in (0, 0.5), got " + std::to_string(epsilon));
    }
    if (stages < 1 || stages > kMaxAdversaryStages) {
      throw DomainError("adversary stages must lie in [1, " + std::to_string(kMaxAdversaryStages) + "]");
    }
  }

  /// Index of the last trial, 2^stages − 1.
  [[nodiscard]] std::uint64_t last_trial() const { return (std::uint64_t{1} << stages) - 1; }
};

/// Stage i holds trials 2^{i−1} … 2^i − 1.
inline int stage_of(std::uint64_t t) {
  if (t == 0) throw PreconditionError("stage_of is defined for t >= 1");
  return static_cast<int>(std::bit_width(t));
}

/// Input of trial t ≥ 1: 1/2^i + j/2^{i−1} with i = stage_of(t), j = t − 2^{i−1}.
inline double dyadic_x(std::uint64_t t) {
  const int i = stage_of(t);
  const std::uint64_t j = t - (std::uint64_t{1} << (i - 1));
  return std::ldexp(static_cast<double>(2 * j + 1), -i);
}

/// Size of the stage-i push: √ε (1−ε)^{i/2} / 2^{i+1}.
inline double perturbation(int stage, double epsilon) {
  if (stage < 1) throw PreconditionError("stage index must be >= 1");
  return std::ldexp(std::sqrt(epsilon) * std::pow(1.0 - epsilon, 0.5 * stage), -(stage + 1));
}

/// Energy added to the probe by each stage-i trial: ε(1−ε)^i / 2^{i+1}.
inline double probe_energy_step(int stage, double epsilon) {
  return std::ldexp(epsilon * std::pow(1.0 - epsilon, stage), -(stage + 1));
}

struct AdversaryResponse {
  double x = 0.0;
  double y = 0.0;          // revealed label y_t
  double proposed = 0.0;   // v_t
  bool accepted = false;   // y_t == v_t
  double max_new_slope = 0.0;
};

struct EnergyAudit {
  double J_probe = 0.0;
  double J_committed = 0.0;
  double recursion_residual = 0.0;
};

class Adversary {
 public:
  explicit Adversary(AdversaryConfig config) : config_(config) {
    config_.validate();
    committed_.insert(0.0, 0.0);
    committed_.insert(1.0, 0.0);
    probe_ = committed_;
  }

  [[nodiscard]] const AdversaryConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::uint64_t next_trial() const noexcept { return next_t_; }
  [[nodiscard]] bool finished() const noexcept { return next_t_ > config_.last_trial(); }

  /// Input for the next trial; trial 0 is x_0 = 1.
  [[nodiscard]] double next_x() const { return next_t_ == 0 ? 1.0 : dyadic_x(next_t_); }

  AdversaryResponse respond(std::uint64_t t, double y_hat) {
    if (t != next_t_) {
      throw SequenceError("expected trial " + std::to_string(next_t_) + ", got " + std::to_string(t));
    }
    if (finished()) throw SequenceError("match already covers all " + std::to_string(config_.stages) + " stages");
    if (!std::isfinite(y_hat)) throw PreconditionError("learner prediction must be finite");

    if (t == 0) {
      ++next_t_;
      return AdversaryResponse{1.0, 0.0, 0.0, false, 0.0};
    }

    const int i = stage_of(t);
    if (i != stage_) begin_stage(i);

    const double x = dyadic_x(t);
    if (committed_.value_at(x)) throw SequenceError("input already committed");
    const double base = committed_(x);
    const double push = perturbation(i, config_.epsilon);
    const double up = base + push;
    const double down = base - push;
    const double v = std::abs(down - y_hat) > std::abs(up - y_hat) ? down : up;

    const double spacing = std::ldexp(1.0, -i);
    const auto [left, right] = committed_.neighbors(x);
    if (!left || !right || x - left->u != spacing || right->u - x != spacing) {
      throw SequenceError("neighbors of x = " + std::to_string(x) + " are not at distance 2^-" +
                          std::to_string(i));
    }
    const bool accepted = std::abs(v - left->v) <= spacing && std::abs(v - right->v) <= spacing;
    const double y = accepted ? v : base;

    committed_.insert(x, y);
    probe_.insert(x, v);
    ++within_;
    ++next_t_;
    stage_trials_.back() += 1;
    if (accepted) stage_accepted_.back() += 1;

    const double slope = std::max(std::abs(y - left->v), std::abs(right->v - y)) / spacing;
    return AdversaryResponse{x, y, v, accepted, slope};
  }

  /// Energies from the running bookkeeping (O(1)).
  [[nodiscard]] EnergyAudit running_audit() const {
    return EnergyAudit{probe_.energy(), committed_.energy(), residual(probe_.energy())};
  }

  [[nodiscard]] int stage() const noexcept { return stage_; }
  [[nodiscard]] std::uint64_t within() const noexcept { return within_; }
  [[nodiscard]] double probe_base_energy() const noexcept { return probe_base_; }
  [[nodiscard]] const GrowingInterpolant& committed() const noexcept { return committed_; }
  [[nodiscard]] const GrowingInterpolant& probe() const noexcept { return probe_; }

  /// Trials and accepted trials per stage started so far; element k is stage k+1.
  [[nodiscard]] const std::vector<std::uint64_t>& stage_trials() const noexcept { return stage_trials_; }
  [[nodiscard]] const std::vector<std::uint64_t>& stage_accepted() const noexcept { return stage_accepted_; }

  /// |J[g_{i,j}] − (J[g_{i,0}] + j·ε(1−ε)^i/2^{i+1})| for a given probe energy.
  [[nodiscard]] double residual(double probe_energy) const {
    if (stage_ == 0) return std::abs(probe_energy - probe_base_);
    const double predicted =
        probe_base_ + static_cast<double>(within_) * probe_energy_step(stage_, config_.epsilon);
    return std::abs(probe_energy - predicted);
  }

 private:
  // g_{i,0} = f_{2^{i−1}−1}; both energies are re-summed here so that
  // rounding does not carry over from one stage to the next.
  void begin_stage(int i) {
    committed_.recompute_energy();
    probe_ = committed_;
    probe_base_ = probe_.energy();
    stage_ = i;
    within_ = 0;
    stage_trials_.push_back(0);
    stage_accepted_.push_back(0);
  }

  AdversaryConfig config_;
  GrowingInterpolant committed_;
  GrowingInterpolant probe_;
  int stage_ = 0;
  std::uint64_t within_ = 0;
  std::uint64_t next_t_ = 0;
  double probe_base_ = 0.0;
  std::vector<std::uint64_t> stage_trials_;
  std::vector<std::uint64_t> stage_accepted_;
};

/// Energies recomputed from scratch from the knot sets.
inline EnergyAudit audit_energy(const Adversary& adversary) {
  EnergyAudit audit;
  audit.J_probe = energy(adversary.probe().snapshot());
  audit.J_committed = energy(adversary.committed().snapshot());
  audit.recursion_residual = adversary.residual(audit.J_probe);
  return audit;
}

struct StageSummary {
  int i = 0;
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
  double J_probe_end = 0.0;
};

/// Worst values seen over every trial of a match.
struct MatchAudit {
  double max_J_probe = 0.0;
  double max_recursion_residual = 0.0;
  double max_committed_excess = -std::numeric_limits<double>::infinity();  // J_committed − J_probe
  double max_new_slope = 0.0;
  double final_max_slope = 0.0;
  double final_J_committed = 0.0;
  double final_J_probe = 0.0;
  bool labels_consistent = true;
};

struct MatchResult {
  std::string learner;
  double epsilon = 0.0;
  int stages = 0;
  std::vector<TrialRecord> records;
  LossAccount loss{2.0};
  std::vector<StageSummary> per_stage;
  PiecewiseLinearFunction final_function;
  MatchAudit audit;
  double lower_partial = 0.0;
  double upper_linint = 0.0;
};

struct MatchOptions {
  bool keep_records = true;
  std::function<void(const TrialRecord&)> on_trial;
};

/// Plays the adversary against a learner for trials 0 … 2^S − 1 and charges
/// the learner (1+ε)-loss from trial 1 on.
inline MatchResult run_match(Learner& learner, const AdversaryConfig& config, const MatchOptions& options = {}) {
  Adversary adversary(config);
  TrialLog log(1.0 + config.epsilon);
  MatchResult result;
  result.learner = std::string(learner.name());
  result.epsilon = config.epsilon;
  result.stages = config.stages;
  if (options.keep_records) result.records.reserve(static_cast<std::size_t>(config.last_trial() + 1));

  std::vector<double> stage_end_energy;
  auto& audit = result.audit;
  while (!adversary.finished()) {
    const std::uint64_t t = adversary.next_trial();
    const double x = adversary.next_x();
    const double y_hat = learner.predict(x);
    const AdversaryResponse resp = adversary.respond(t, y_hat);
    TrialRecord rec = log.record(resp.x, y_hat, resp.y);
    learner.observe(resp.x, resp.y);

    const EnergyAudit e = adversary.running_audit();
    audit.max_J_probe = std::max(audit.max_J_probe, e.J_probe);
    audit.max_recursion_residual = std::max(audit.max_recursion_residual, e.recursion_residual);
    audit.max_committed_excess = std::max(audit.max_committed_excess, e.J_committed - e.J_probe);
    audit.max_new_slope = std::max(audit.max_new_slope, resp.max_new_slope);
    if (t > 0) {
      const auto stage_index = static_cast<std::size_t>(stage_of(t));
      if (stage_end_energy.size() < stage_index) stage_end_energy.resize(stage_index);
      stage_end_energy[stage_index - 1] = e.J_probe;
    }

    if (options.on_trial) options.on_trial(rec);
    if (options.keep_records) result.records.push_back(std::move(rec));
  }

  const auto& trials = adversary.stage_trials();
  const auto& accepted = adversary.stage_accepted();
  for (std::size_t k = 0; k < trials.size(); ++k) {
    result.per_stage.push_back(
        StageSummary{static_cast<int>(k + 1), trials[k], accepted[k], stage_end_energy[k]});
  }

  result.loss = log.loss();
  result.final_function = adversary.committed().snapshot();
  const EnergyAudit scratch = audit_energy(adversary);
  audit.final_J_committed = scratch.J_committed;
  audit.final_J_probe = scratch.J_probe;
  audit.max_recursion_residual = std::max(audit.max_recursion_residual, scratch.recursion_residual);
  audit.final_max_slope = max_abs_slope(result.final_function);
  for (const TrialRecord& rec : result.records) {
    if (result.final_function(rec.x) != rec.y) audit.labels_consistent = false;
  }
  result.lower_partial = lower_bound_partial(config.epsilon, config.stages);
  result.upper_linint = upper_bound_linint(config.epsilon);
  return result;
}

/// Every soundness property the construction guarantees, checked against a
/// finished match. Empty means sound.
inline std::vector<std::string> soundness_violations(const MatchResult& m) {
  std::vector<std::string> out;
  const auto& a = m.audit;
  if (a.final_max_slope > 1.0 + 1e-12 || a.max_new_slope > 1.0 + 1e-12) {
    out.push_back("committed function leaves F_inf: max slope " + std::to_string(std::max(a.final_max_slope, a.max_new_slope)));
  }
  if (!(a.max_J_probe < 0.25)) out.push_back("probe energy reached " + std::to_string(a.max_J_probe));
  if (a.max_recursion_residual > 1e-10) {
    out.push_back("probe energy recursion residual " + std::to_string(a.max_recursion_residual));
  }
  if (a.max_committed_excess > 1e-12) {
    out.push_back("committed energy exceeds probe energy by " + std::to_string(a.max_committed_excess));
  }
  if (!a.labels_consistent) out.push_back("final function does not reproduce every revealed label");
  for (const StageSummary& s : m.per_stage) {
    const std::uint64_t required = s.i == 1 ? 1 : (std::uint64_t{1} << (s.i - 2));
    const bool complete = s.trials == (std::uint64_t{1} << (s.i - 1));
    if (complete && s.accepted < required) {
      out.push_back("stage " + std::to_string(s.i) + " accepted " + std::to_string(s.accepted) + " < " +
                    std::to_string(required));
    }
  }
  if (m.loss.total() < m.lower_partial) {
    out.push_back("total loss " + std::to_string(m.loss.total()) + " below forced-loss sum " +
                  std::to_string(m.lower_partial));
  }
  return out;
}

}  // namespace smoothlearn
