#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "aqsim/core/lindblad.hpp"
#include "aqsim/core/parallel.hpp"
#include "aqsim/enaqt/network.hpp"
#include "aqsim/enaqt/noise.hpp"
#include "aqsim/enaqt/trajectories.hpp"

namespace aqsim::enaqt {

inline LindbladSpec lindblad_spec(const ExcitonNetwork& net, std::span<const double> gamma) {
  net.validate();
  LindbladSpec s;
  s.hamiltonian = build_exciton_hamiltonian(net);
  s.dephasing_rates.assign(gamma.begin(), gamma.end());
  s.sink = Sink{net.sink_site, net.trap_rate};
  s.recombination_rate = net.recombination_rate;
  return s;
}

struct EfficiencyResult {
  double eta = 0.0;             // kappa_trap * int_0^t_max rho_sink dt
  double eta_error = 0.0;       // Monte Carlo standard error (trajectory noise only)
  double final_trap_rate = 0.0; // kappa_trap * rho_sink(t_max)
  double bookkeeping = 0.0;     // |trapped + recombined + Tr rho - 1|
  bool converged = false;       // final_trap_rate below 1e-6 per unit time
};

/// Transport efficiency from the input site into the sink.
///
/// Markovian noise uses the Lindblad solution with exact trapped-population
/// bookkeeping; OU noise uses the trajectory average.
inline EfficiencyResult transport_efficiency(const ExcitonNetwork& net, const NoiseModel& noise, double t_max,
                                             const TrajectoryOptions& traj = {}) {
  net.validate();
  noise.validate(net.size());
  aqsim::detail::require(net.trap_rate > 0.0, "transport efficiency needs a trap rate > 0");
  aqsim::detail::require(t_max > 0.0 && std::isfinite(t_max), "t_max must be positive");
  EfficiencyResult r;
  const std::vector<double> times{t_max};
  const auto s = static_cast<Eigen::Index>(net.sink_site);
  if (noise.kind == NoiseKind::kMarkovian) {
    const auto tr = lindblad_propagate(lindblad_spec(net, noise.gamma),
                                       DensityMatrix::pure(StateVector::basis_state(net.size(), net.input_site)),
                                       times);
    r.eta = tr.trapped[0];
    r.final_trap_rate = net.trap_rate * tr.states[0].matrix()(s, s).real();
    r.bookkeeping = std::abs(tr.trapped[0] + tr.recombined[0] + tr.states[0].trace() - 1.0);
  } else {
    const auto avg = stochastic_trajectory_average(net, noise, times, traj);
    r.eta = avg.trapped[0];
    r.eta_error = avg.trapped_error[0];
    r.final_trap_rate = net.trap_rate * avg.mean[0](s, s).real();
  }
  r.eta = std::clamp(r.eta, 0.0, 1.0);
  r.converged = r.final_trap_rate < 1e-6;
  return r;
}

struct EfficiencyCurve {
  std::vector<double> gamma;
  std::vector<double> eta;
  std::vector<bool> converged;
  std::size_t argmax = 0;
  double max_bookkeeping = 0.0;
  bool spans_three_decades = false;

  double gamma_star() const { return gamma[argmax]; }
  double eta_first() const { return eta.front(); }
  double eta_last() const { return eta.back(); }
  bool interior_max() const { return argmax > 0 && argmax + 1 < eta.size(); }
  /// eta(gamma*) minus the larger endpoint.
  double goldilocks_margin() const { return eta[argmax] - std::max(eta.front(), eta.back()); }
};

/// Efficiency over a grid of site-independent Markovian dephasing rates.
inline EfficiencyCurve goldilocks_scan(const ExcitonNetwork& net, std::span<const double> gammas, double t_max,
                                       std::size_t jobs = 1) {
  aqsim::detail::require(!gammas.empty(), "goldilocks scan needs at least one gamma");
  EfficiencyCurve c;
  c.gamma.assign(gammas.begin(), gammas.end());
  std::vector<EfficiencyResult> res(gammas.size());
  parallel_for(gammas.size(), jobs, [&](std::size_t i) {
    res[i] = transport_efficiency(net, NoiseModel::markovian(net.size(), gammas[i]), t_max);
  });
  for (const auto& r : res) {
    c.eta.push_back(r.eta);
    c.converged.push_back(r.converged);
    c.max_bookkeeping = std::max(c.max_bookkeeping, r.bookkeeping);
  }
  for (std::size_t i = 1; i < c.eta.size(); ++i)
    if (c.eta[i] > c.eta[c.argmax]) c.argmax = i;
  const auto [lo, hi] = std::minmax_element(c.gamma.begin(), c.gamma.end());
  c.spans_three_decades = *lo > 0.0 ? *hi / *lo >= 1e3 : c.gamma.size() > 1;
  return c;
}

}  // namespace aqsim::enaqt
