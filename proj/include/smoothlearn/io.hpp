#pragma once

// Text formats: trace/sweep/bounds CSV, match-result JSON and function files.
// CSV numbers use 17 significant digits, which round-trips every double.

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothlearn/adversary.hpp"
#include "smoothlearn/bounds.hpp"
#include "smoothlearn/errors.hpp"
#include "smoothlearn/harness.hpp"
#include "smoothlearn/learner.hpp"
#include "smoothlearn/pwl.hpp"

namespace smoothlearn {

inline std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

inline std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

inline constexpr const char* kTraceHeader = "t,x,y_hat,y,e,d,loss_term,cum_loss";

inline void write_trace_header(std::ostream& out) { out << kTraceHeader << '\n'; }

inline void write_trace_row(std::ostream& out, const TrialRecord& rec) {
  out << rec.t << ',' << format_double(rec.x) << ',' << format_optional(rec.y_hat) << ',' << format_double(rec.y)
      << ',' << format_optional(rec.e) << ',' << format_optional(rec.d) << ',' << format_optional(rec.loss_term)
      << ',' << format_optional(rec.cum_loss) << '\n';
}

inline void write_trace(std::ostream& out, const std::vector<TrialRecord>& records) {
  write_trace_header(out);
  for (const auto& rec : records) write_trace_row(out, rec);
}

inline nlohmann::json to_json(const MatchResult& m) {
  nlohmann::json per_stage = nlohmann::json::array();
  for (const StageSummary& s : m.per_stage) {
    per_stage.push_back({{"i", s.i}, {"trials", s.trials}, {"accepted", s.accepted}, {"J_probe_end", s.J_probe_end}});
  }
  return nlohmann::json{
      {"learner", m.learner},
      {"epsilon", m.epsilon},
      {"stages", m.stages},
      {"total_loss", m.loss.total()},
      {"per_stage", std::move(per_stage)},
      {"bounds", {{"lower_partial", m.lower_partial}, {"upper_linint", m.upper_linint}}},
      {"audit",
       {{"max_J_probe", m.audit.max_J_probe},
        {"max_recursion_residual", m.audit.max_recursion_residual},
        {"final_max_slope", m.audit.final_max_slope},
        {"final_J_committed", m.audit.final_J_committed},
        {"final_J_probe", m.audit.final_J_probe}}},
  };
}

inline nlohmann::json to_json(const AuditReport& r) {
  nlohmann::json distance = nlohmann::json::array();
  for (const auto& d : r.distance) distance.push_back({{"r", d.r}, {"bound", d.bound}, {"worst_sum", d.worst_sum}});
  return nlohmann::json{
      {"runs", r.runs},
      {"total_trials", r.total_trials},
      {"worst_sum_e2_over_d", r.worst_e2_over_d},
      {"worst_squared_loss", r.worst_squared_loss},
      {"distance_sums", std::move(distance)},
      {"matches", r.matches},
      {"worst_recursion_residual", r.worst_recursion_residual},
      {"worst_J_probe", r.worst_J_probe},
      {"worst_slope", r.worst_slope},
      {"violations", r.violations},
      {"ok", r.ok()},
  };
}

inline constexpr const char* kSweepHeader = "epsilon,stages,total_loss,lower_partial,upper,loss_sqrt_eps";

inline void write_sweep_row(std::ostream& out, const SweepRow& row) {
  out << format_double(row.epsilon) << ',' << row.stages << ',' << format_double(row.total_loss) << ','
      << format_double(row.lower_partial) << ',' << format_double(row.upper) << ','
      << format_double(row.loss_sqrt_eps) << '\n';
}

inline constexpr const char* kBoundsHeader = "epsilon,upper,lower_closed,lower_partial_S,ratio_upper,ratio_lower";

inline void write_bounds_row(std::ostream& out, const BoundReport& r) {
  out << format_double(r.epsilon) << ',' << format_double(r.upper_linint) << ','
      << format_optional(r.lower_closed_form) << ',' << format_optional(r.lower_partial) << ','
      << format_double(r.ratio_upper) << ',' << format_optional(r.ratio_lower) << '\n';
}

/// {"knots": [[u, v], ...]}, read with from_points semantics.
inline PiecewiseLinearFunction function_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("knots") || !doc.at("knots").is_array()) {
    throw PreconditionError("function document needs a \"knots\" array");
  }
  std::vector<Knot> points;
  for (const auto& item : doc.at("knots")) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
      throw PreconditionError("each knot must be a [u, v] pair of numbers");
    }
    points.push_back(Knot{item[0].get<double>(), item[1].get<double>()});
  }
  return from_points(points);
}

inline nlohmann::json function_to_json(const PiecewiseLinearFunction& f) {
  nlohmann::json knots = nlohmann::json::array();
  for (const Knot& k : f.knots()) knots.push_back({k.u, k.v});
  return nlohmann::json{{"knots", std::move(knots)}};
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("cannot parse " + path + ": " + e.what());
  }
}

inline PiecewiseLinearFunction read_function_file(const std::string& path) {
  return function_from_json(read_json_file(path));
}

}  // namespace smoothlearn
