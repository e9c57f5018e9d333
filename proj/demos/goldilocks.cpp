// Transport efficiency across dephasing rates on a disordered 5-site chain.
#include <cmath>
#include <cstdio>
#include <vector>

#include "aqsim/enaqt/network.hpp"
#include "aqsim/enaqt/transport.hpp"

int main() {
  using namespace aqsim::enaqt;
  const auto net = make_disordered_chain(5, 1.0, 5.0, 1, 1.0, 0.05);
  std::vector<double> gammas;
  for (int k = 0; k <= 12; ++k) gammas.push_back(std::pow(10.0, -3.0 + 0.5 * k));
  const auto c = goldilocks_scan(net, gammas, 400.0);
  for (std::size_t i = 0; i < gammas.size(); ++i)
    std::printf("gamma %9.4g  eta %.4f%s\n", gammas[i], c.eta[i], i == c.argmax ? "  <- optimum" : "");
  std::printf("interior optimum: %s, margin over the ends %.3f\n", c.interior_max() ? "yes" : "no",
              c.goldilocks_margin());
}
