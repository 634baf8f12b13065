// SPDX-License-Identifier: Apache-2.0
// Small usage example: discretize a wind/PV pair, convolve, and print the
// reserve needed at a few confidence levels.
#include <cstdio>

#include "iesched/probseq.hpp"

int main() {
  const iesched::WindParams wind(3.0, 15.0, 25.0, 60.0, 2.2, 9.0);
  const iesched::PvParams pv(4.0, 1.6, 120.0);
  const double q = 5.0;

  const auto joint = iesched::convolve(iesched::discretize_wind(wind, q),
                                       iesched::discretize_pv(pv, q));
  const double e = joint.expectation();
  std::printf("expected joint output: %.3f MW (grid step %.1f MW, %zu bins)\n", e, q,
              joint.size());
  std::printf("%8s  %12s\n", "alpha", "reserve MW");
  for (double alpha : {0.80, 0.85, 0.90, 0.95, 0.99}) {
    std::printf("%8.2f  %12.3f\n", alpha, iesched::quantile_reserve(joint, alpha, e));
  }
  return 0;
}
