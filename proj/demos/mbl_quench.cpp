// Imbalance after a CDW quench in the quasiperiodic hard-core boson chain.
#include <cstdio>
#include <vector>

#include "aqsim/hubbard/quench.hpp"

int main() {
  using namespace aqsim::hubbard;
  HubbardParams p;
  p.L = 8;
  p.particles = 4;
  p.max_occupancy = 1;
  DisorderSpec d;
  d.realizations = 10;
  std::vector<double> t;
  for (int k = 0; k <= 100; ++k) t.push_back(k);
  const std::vector<double> deltas{0.0, 2.0, 5.0, 10.0, 20.0};
  const auto scan = mbl_scan(p, d, deltas, t, Sublattice::kOdd);
  for (const auto& row : scan.rows)
    std::printf("delta/J %5.1f  late-time imbalance %.3f +- %.3f\n", row.delta, row.plateau.mean, row.plateau.error);
}
