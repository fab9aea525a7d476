// smoothlearn: command-line front end.
//
//   smoothlearn match  --learner linint --epsilon 0.1 --stages 14 --out trace.csv
//   smoothlearn sweep  --epsilons 0.4,0.2,0.1,0.05 --stages 14 --out sweep.csv
//   smoothlearn bounds --epsilon-grid log:1e-4:0.49:50 --out bounds.csv
//   smoothlearn audit  --runs 1000 --seed 7
//   smoothlearn eval   --function f.json --x 0.5
//
// Exit codes: 0 success, 1 usage error, 2 invariant/audit failure, 3 I/O error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smoothlearn/smoothlearn.hpp"

namespace {

using namespace smoothlearn;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitIo = 3;

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::string learner = "linint";
  double epsilon = 0.1;
  std::string epsilons;
  std::string epsilon_grid;
  std::optional<double> bounds_epsilon;
  int stages = 14;
  std::uint64_t seed = 7;
  std::string target = "adversary";
  std::string function_path;
  std::string q = "2";
  int knots = 8;
  std::size_t trials = 1000;
  std::size_t runs = 1000;
  std::size_t max_trials = 10000;
  std::optional<double> x;
  std::string out;
  std::string json_out;
  std::string config;
};

double parse_norm_order(const std::string& text) {
  if (text == "inf" || text == "infinity") return kInfNorm;
  try {
    std::size_t pos = 0;
    const double q = std::stod(text, &pos);
    if (pos == text.size()) return q;
  } catch (const std::exception&) {
  }
  throw UsageError("invalid norm order '" + text + "'");
}

std::string grid_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (const auto& item : v) {
      if (!item.is_number()) throw UsageError("epsilon list entries must be numbers");
      if (!s.empty()) s += ',';
      s += format_double(item.get<double>());
    }
    return s;
  }
  throw UsageError("epsilon grid must be a string, number or array");
}

// Values in the config file replace whatever was given on the command line.
void apply_config(Options& o) {
  if (o.config.empty()) return;
  const nlohmann::json doc = read_json_file(o.config);
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "learner") o.learner = value.get<std::string>();
      else if (key == "epsilon") { o.epsilon = value.get<double>(); o.bounds_epsilon = o.epsilon; }
      else if (key == "epsilons") o.epsilons = grid_text(value);
      else if (key == "epsilon_grid") o.epsilon_grid = grid_text(value);
      else if (key == "stages") o.stages = value.get<int>();
      else if (key == "seed") o.seed = value.get<std::uint64_t>();
      else if (key == "target") o.target = value.get<std::string>();
      else if (key == "function") o.function_path = value.get<std::string>();
      else if (key == "q") o.q = value.is_string() ? value.get<std::string>() : format_double(value.get<double>());
      else if (key == "knots") o.knots = value.get<int>();
      else if (key == "trials") o.trials = value.get<std::size_t>();
      else if (key == "runs") o.runs = value.get<std::size_t>();
      else if (key == "max_trials") o.max_trials = value.get<std::size_t>();
      else if (key == "x") o.x = value.get<double>();
      else if (key == "out") o.out = value.get<std::string>();
      else if (key == "json") o.json_out = value.get<std::string>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw UsageError(std::string("bad value type in config: ") + e.what());
  }
}

ExperimentConfig experiment_config(const Options& o) {
  ExperimentConfig c;
  c.learner = parse_learner_kind(o.learner);
  c.epsilon = o.epsilon;
  c.stages = o.stages;
  c.seed = o.seed;
  c.q = parse_norm_order(o.q);
  c.knot_count = o.knots;
  c.trials = o.trials;
  c.runs = o.runs;
  c.max_trials = o.max_trials;
  if (o.target == "adversary") c.target = TargetSource::adversary;
  else if (o.target == "sampled") c.target = TargetSource::sampled;
  else if (o.target == "file") c.target = TargetSource::file;
  else throw UsageError("unknown target source '" + o.target + "' (expected adversary, sampled or file)");
  c.validate();
  return c;
}

// Output goes to a file when a path is given, otherwise to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw IoError("cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void warn_adversary_range(double eps) {
  std::cerr << "warning: epsilon " << format_double(eps)
            << " is outside (0, 0.5); the adversary only covers that range. "
               "Use the `bounds` subcommand for the upper bound at larger epsilon.\n";
}

int cmd_match(const Options& o) {
  const ExperimentConfig c = experiment_config(o);
  auto learner = make_learner(c.learner);

  if (c.target == TargetSource::adversary) {
    if (!(c.epsilon > 0.0 && c.epsilon < 0.5)) {
      warn_adversary_range(c.epsilon);
      return kExitUsage;
    }
    if (c.stages < 1) throw UsageError("stages must be >= 1");
    std::unique_ptr<Output> trace;
    MatchOptions opts;
    // Records are kept only for the end-of-match label check; large matches stream.
    opts.keep_records = c.stages <= 16;
    if (!o.out.empty()) {
      trace = std::make_unique<Output>(o.out);
      write_trace_header(trace->stream());
      opts.on_trial = [&](const TrialRecord& r) { write_trace_row(trace->stream(), r); };
    }
    const MatchResult m = run_match(*learner, AdversaryConfig{c.epsilon, c.stages}, opts);
    if (trace) trace->finish();
    const std::string text = to_json(m).dump(2);
    Output result(o.json_out);
    result.stream() << text << '\n';
    result.finish();
    const auto problems = soundness_violations(m);
    for (const auto& p : problems) std::cerr << "invariant violated: " << p << '\n';
    return problems.empty() ? kExitOk : kExitInvariant;
  }

  if (!(c.epsilon > 0.0)) throw UsageError("epsilon must be positive");
  PiecewiseLinearFunction target;
  if (c.target == TargetSource::file) {
    if (o.function_path.empty()) throw UsageError("--target file needs --function");
    target = read_function_file(o.function_path);
  } else {
    target = sample_target(c.q, c.knot_count, c.seed);
  }
  const TrialRun run = run_on_target(*learner, target, c.trials, 1.0 + c.epsilon, c.seed + 1);
  if (!o.out.empty()) {
    Output trace(o.out);
    write_trace(trace.stream(), run.records);
    trace.finish();
  }
  nlohmann::json summary{
      {"learner", o.learner},
      {"epsilon", c.epsilon},
      {"target", o.target},
      {"trials", c.trials},
      {"total_loss", run.loss.total()},
      {"target_energy", energy(target)},
  };
  if (c.trials > 0) {
    const TraceSums sums = trace_sums(run.records, 2.0);
    summary["sum_e2_over_d"] = sums.sum_e2_over_d;
    summary["sum_d_pow_2"] = sums.sum_d_pow_r;
  }
  Output result(o.json_out);
  result.stream() << summary.dump(2) << '\n';
  result.finish();
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  ExperimentConfig c = experiment_config(o);
  if (c.stages < 1) throw UsageError("stages must be >= 1");
  if (!o.epsilons.empty()) {
    for (double eps : parse_epsilon_grid(o.epsilons)) {
      if (eps > 0.0 && eps < 0.5) c.epsilons.push_back(eps);
      else warn_adversary_range(eps);
    }
  }
  Output out(o.out);
  out.stream() << kSweepHeader << '\n';
  out.stream().flush();
  run_sweep(c, [&](const SweepRow& row) {
    write_sweep_row(out.stream(), row);
    out.stream().flush();
  });
  out.finish();
  return kExitOk;
}

int cmd_bounds(const Options& o) {
  std::vector<double> grid;
  if (o.bounds_epsilon) grid.push_back(*o.bounds_epsilon);
  if (!o.epsilon_grid.empty()) {
    for (double eps : parse_epsilon_grid(o.epsilon_grid)) grid.push_back(eps);
  }
  if (grid.empty()) throw UsageError("bounds needs --epsilon or --epsilon-grid");
  if (o.stages < 1) throw UsageError("stages must be >= 1");
  std::vector<BoundReport> rows;
  for (double eps : grid) rows.push_back(make_bound_report(eps, o.stages));
  Output out(o.out);
  out.stream() << kBoundsHeader << '\n';
  for (const auto& r : rows) write_bounds_row(out.stream(), r);
  out.finish();
  return kExitOk;
}

int cmd_audit(const Options& o) {
  ExperimentConfig c = experiment_config(o);
  if (!o.epsilons.empty()) c.epsilons = parse_epsilon_grid(o.epsilons);
  for (double eps : c.epsilons) {
    if (!(eps > 0.0 && eps < 0.5)) throw UsageError("audit epsilons must lie in (0, 0.5)");
  }
  const AuditReport report = run_invariant_audit(c);
  Output out(o.out);
  out.stream() << to_json(report).dump(2) << '\n';
  out.finish();
  for (const auto& v : report.violations) std::cerr << "invariant violated: " << v << '\n';
  return report.ok() ? kExitOk : kExitInvariant;
}

int cmd_eval(const Options& o) {
  if (o.function_path.empty()) throw UsageError("eval needs --function");
  if (!o.x) throw UsageError("eval needs --x");
  const auto f = read_function_file(o.function_path);
  const double value = evaluate(f, *o.x);
  Output out(o.out);
  out.stream() << "x,value,energy,norm_1,norm_2,norm_inf\n"
               << format_double(*o.x) << ',' << format_double(value) << ',' << format_double(energy(f)) << ','
               << format_double(derivative_norm(f, 1.0)) << ',' << format_double(derivative_norm(f, 2.0)) << ','
               << format_double(derivative_norm(f, kInfNorm)) << '\n';
  out.finish();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online learning of smooth functions under L_p loss: LININT, the dyadic adversary and bound calculators"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON file whose keys override individual flags");
  };

  auto* match = app.add_subcommand("match", "Play one learner against the adversary or a fixed target");
  match->add_option("--learner", o.learner, "linint, zero or nearest")->capture_default_str();
  match->add_option("--epsilon", o.epsilon, "Loss exponent is 1+epsilon")->capture_default_str();
  match->add_option("--stages", o.stages, "Adversary stages (trials 0 .. 2^stages-1), at most 24")->capture_default_str();
  match->add_option("--target", o.target, "adversary, sampled or file")->capture_default_str();
  match->add_option("--function", o.function_path, "Function file for --target file");
  match->add_option("--q", o.q, "Norm order for sampled targets (number or inf)")->capture_default_str();
  match->add_option("--knots", o.knots, "Knot count for sampled targets")->capture_default_str();
  match->add_option("--trials", o.trials, "Trials for non-adversary targets")->capture_default_str();
  match->add_option("--seed", o.seed, "Seed for sampled targets and inputs")->capture_default_str();
  match->add_option("--out", o.out, "Trace CSV path");
  match->add_option("--json", o.json_out, "Result JSON path (default stdout)");
  add_config(match);

  auto* sweep = app.add_subcommand("sweep", "Adversary matches over an epsilon grid");
  sweep->add_option("--epsilons", o.epsilons, "Comma list or log:a:b:n / lin:a:b:n");
  sweep->add_option("--stages", o.stages, "Adversary stages per match, at most 24")->capture_default_str();
  sweep->add_option("--learner", o.learner, "linint, zero or nearest")->capture_default_str();
  sweep->add_option("--out", o.out, "Sweep CSV path (default stdout)");
  add_config(sweep);

  auto* bounds = app.add_subcommand("bounds", "Closed-form upper and lower bounds");
  bounds->add_option("--epsilon", o.bounds_epsilon, "Single epsilon");
  bounds->add_option("--epsilon-grid", o.epsilon_grid, "Comma list or log:a:b:n / lin:a:b:n");
  bounds->add_option("--stages", o.stages, "Stage count for the partial lower sum")->capture_default_str();
  bounds->add_option("--out", o.out, "Bounds CSV path (default stdout)");
  add_config(bounds);

  auto* audit = app.add_subcommand("audit", "Seeded invariant audit of LININT traces and adversary matches");
  audit->add_option("--runs", o.runs, "LININT-versus-target runs")->capture_default_str();
  audit->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  audit->add_option("--max-trials", o.max_trials, "Upper limit on trials per run")->capture_default_str();
  audit->add_option("--stages", o.stages, "Adversary stages per match (0 skips matches)")->default_val(12);
  audit->add_option("--epsilons", o.epsilons, "Epsilons for the adversary matches");
  audit->add_option("--out", o.out, "Report JSON path (default stdout)");
  add_config(audit);

  auto* eval = app.add_subcommand("eval", "Evaluate a function file");
  eval->add_option("--function", o.function_path, "Function file {\"knots\": [[u, v], ...]}")->required();
  eval->add_option("--x", o.x, "Evaluation point in [0,1]")->required();
  eval->add_option("--out", o.out, "Output path (default stdout)");
  add_config(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    apply_config(o);
    if (*match) return cmd_match(o);
    if (*sweep) return cmd_sweep(o);
    if (*bounds) return cmd_bounds(o);
    if (*audit) return cmd_audit(o);
    if (*eval) return cmd_eval(o);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const AuditFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
