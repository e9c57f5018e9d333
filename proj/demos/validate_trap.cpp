// Internal validation of a trapped optical-lattice system model against the
// idealised Bose-Hubbard simulation model; prints the report.
#include <cstdlib>
#include <iostream>

#include "aqsim/validation/runners.hpp"
#include "aqsim/validation/validate.hpp"

int main(int argc, char** argv) {
  using namespace aqsim::validation;
  MblSetup s;
  s.perturbation.trap_curvature = argc > 1 ? std::atof(argv[1]) : 0.001;
  s.perturbation.trap_center = 2.5;
  auto g = mbl_graph(s);
  ValidationOptions o;
  o.metric = Metric::kScaled;
  const auto r = internal_validate(g, {"imbalance"}, {}, 0.05, o);
  std::cout << r.dump();
  std::cout << render_schema(g);
}
