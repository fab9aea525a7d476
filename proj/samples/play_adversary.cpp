// Plays each built-in learner against the adversary and prints the loss next
// to the two bounds.
//
//   play_adversary [epsilon] [stages]

#include <cstdio>
#include <cstdlib>

#include "smoothlearn/smoothlearn.hpp"

int main(int argc, char** argv) {
  using namespace smoothlearn;
  const double eps = argc > 1 ? std::atof(argv[1]) : 0.1;
  const int stages = argc > 2 ? std::atoi(argv[2]) : 12;
  try {
    const AdversaryConfig config{eps, stages};
    std::printf("learner   loss         lower(S)     upper\n");
    for (LearnerKind kind : {LearnerKind::zero, LearnerKind::nearest, LearnerKind::linint}) {
      auto learner = make_learner(kind);
      const MatchResult m = run_match(*learner, config, MatchOptions{false, {}});
      std::printf("%-9s %-12.6g %-12.6g %.6g%s\n", std::string(to_string(kind)).c_str(), m.loss.total(),
                  m.lower_partial, m.upper_linint, soundness_violations(m).empty() ? "" : "  (unsound!)");
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
