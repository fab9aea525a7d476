// Prints upper and lower bounds on a log grid of epsilon values, with both
// scaled by sqrt(epsilon).

#include <cmath>
#include <cstdio>

#include "smoothlearn/smoothlearn.hpp"

int main() {
  using namespace smoothlearn;
  std::printf("%-10s %-10s %-10s %-10s %s\n", "epsilon", "upper", "lower", "up*rt(e)", "lo*rt(e)");
  for (double eps : parse_epsilon_grid("log:1e-4:0.49:12")) {
    const double up = upper_bound_linint(eps);
    const double lo = lower_bound_closed_form(eps);
    std::printf("%-10.4g %-10.4g %-10.4g %-10.4f %.4f\n", eps, up, lo, up * std::sqrt(eps), lo * std::sqrt(eps));
  }
}
