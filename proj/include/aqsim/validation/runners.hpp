#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "aqsim/core/evolution.hpp"
#include "aqsim/core/rng.hpp"
#include "aqsim/enaqt/network.hpp"
#include "aqsim/hubbard/model.hpp"
#include "aqsim/hubbard/quench.hpp"
#include "aqsim/validation/graph.hpp"
#include "aqsim/waveguide/waveguide.hpp"

namespace aqsim::validation {

namespace rdetail {

inline void check_keys(const Params& p, std::initializer_list<const char*> allowed, const std::string& who) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : p)
    if (!ok.count(k)) throw InvalidArgument("runner '" + who + "' does not take parameter '" + k + "'");
}

inline double get(const Params& p, const std::string& k, double fallback) {
  auto it = p.find(k);
  return it == p.end() ? fallback : it->second;
}

inline std::size_t get_count(const Params& p, const std::string& k, std::size_t fallback) {
  const double v = get(p, k, static_cast<double>(fallback));
  detail::require(v >= 2.0 && v == std::floor(v), k + " must be an integer >= 2");
  return static_cast<std::size_t>(v);
}

inline std::vector<double> grid(double t_max, std::size_t samples) {
  detail::require(t_max > 0.0 && std::isfinite(t_max), "sampling window must be positive");
  std::vector<double> t(samples);
  for (std::size_t k = 0; k < samples; ++k) t[k] = t_max * static_cast<double>(k) / static_cast<double>(samples - 1);
  return t;
}

}  // namespace rdetail

/// Fixed lattice and sampling for the Bose-Hubbard runners. Runner parameters:
/// J, U, delta (quasiperiodic disorder), phi.
struct HubbardRunnerConfig {
  std::size_t L = 6;
  int particles = 3;
  int max_occupancy = 2;
  hubbard::Geometry geometry = hubbard::Geometry::kChain;
  double t_max = 10.0;
  std::size_t samples = 21;
  double disorder_beta = 0.721;
};

namespace rdetail {

inline hubbard::HubbardParams hubbard_params(const HubbardRunnerConfig& c, const Params& p, const std::string& who) {
  check_keys(p, {"J", "U", "delta", "phi"}, who);
  hubbard::HubbardParams h;
  h.L = c.L;
  h.particles = c.particles;
  h.max_occupancy = c.max_occupancy;
  h.geometry = c.geometry;
  h.J = get(p, "J", 1.0);
  h.U = get(p, "U", 0.0);
  hubbard::DisorderSpec d;
  d.delta = get(p, "delta", 0.0);
  d.phi = get(p, "phi", 0.0);
  d.beta = c.disorder_beta;
  h.mu = hubbard::make_disorder(d, c.L, 0);
  return h;
}

inline Observables imbalance_series(const Operator& h, const FockBasis& basis, const HubbardRunnerConfig& c) {
  const auto times = grid(c.t_max, c.samples);
  const auto q = hubbard::run_quench(h, basis, times, hubbard::Sublattice::kOdd);
  return {{"imbalance", q.imbalance.front()}};
}

}  // namespace rdetail

/// Ideal Bose-Hubbard quench from the CDW state; observable "imbalance".
inline Runner hubbard_simulation_runner(HubbardRunnerConfig c) {
  return [c](const Params& p) {
    const auto h = rdetail::hubbard_params(c, p, "bose_hubbard");
    const FockBasis basis = build_fock_basis(c.L, c.particles, c.max_occupancy);
    return rdetail::imbalance_series(hubbard::build_bose_hubbard(h, basis), basis, c);
  };
}

/// Same quench under the perturbed system Hamiltonian (trap, bond inhomogeneity, J').
inline Runner hubbard_system_runner(HubbardRunnerConfig c, hubbard::SystemPerturbation pert) {
  return [c, pert](const Params& p) {
    const auto h = rdetail::hubbard_params(c, p, "cold_atom_system");
    const FockBasis basis = build_fock_basis(c.L, c.particles, c.max_occupancy);
    return rdetail::imbalance_series(hubbard::build_system_hamiltonian(h, pert, basis), basis, c);
  };
}

namespace rdetail {

inline Observables exciton_observables(const Operator& h, std::size_t input, double t_max, std::size_t samples) {
  const UnitaryPropagator u(h);
  const CVector psi0 = StateVector::basis_state(h.dim(), input).amplitudes();
  std::vector<double> pop;
  for (double t : grid(t_max, samples)) {
    const RVector p = u.propagate(psi0, t).cwiseAbs2();
    pop.insert(pop.end(), p.data(), p.data() + p.size());
  }
  const RVector& e = u.spectrum().energies;
  std::vector<double> spec(e.data(), e.data() + e.size());
  std::sort(spec.begin(), spec.end());
  return {{"population", pop}, {"spectrum", spec}};
}

}  // namespace rdetail

/// Exciton model; parameters t_max, samples. Observables "population"
/// (site populations from the input site, time-major) and "spectrum".
inline Runner exciton_runner(enaqt::ExcitonNetwork net) {
  net.validate();
  return [net](const Params& p) {
    rdetail::check_keys(p, {"t_max", "samples"}, "exciton_model");
    return rdetail::exciton_observables(enaqt::build_exciton_hamiltonian(net), net.input_site,
                                        rdetail::get(p, "t_max", 1.0), rdetail::get_count(p, "samples", 11));
  };
}

/// Photonic array fabricated with `scale` (energy to inverse length). With
/// jitter > 0 every coupler deviates by a factor 1 + jitter u, u uniform in
/// [-1, 1] from `seed`. Parameters z_max, samples; spectrum in inverse length.
inline Runner waveguide_runner(enaqt::ExcitonNetwork net, double scale, double refractive_index = 1.0,
                               double c = 1.0, double jitter = 0.0, std::uint64_t seed = 0) {
  auto [array, record] = waveguide::map_fmo_to_waveguide(net, scale, refractive_index, units::Speed(c));
  if (jitter != 0.0) {
    Rng rng = make_stream(seed, 0);
    for (Eigen::Index i = 0; i < array.C.rows(); ++i)
      for (Eigen::Index j = i + 1; j < array.C.cols(); ++j) {
        const double f = 1.0 + jitter * (2.0 * uniform01(rng) - 1.0);
        array.C(i, j) *= f;
        array.C(j, i) = array.C(i, j);
      }
  }
  const std::size_t input = record.permutation[net.input_site];
  return [array, input](const Params& p) {
    rdetail::check_keys(p, {"z_max", "samples"}, "waveguide_array");
    const double z_max = rdetail::get(p, "z_max", 1.0);
    const double t_max = units::propagation_time(units::Length(z_max), array.refractive_index, array.c).value;
    return rdetail::exciton_observables(waveguide::build_waveguide_hamiltonian(array), input, t_max,
                                        rdetail::get_count(p, "samples", 11));
  };
}

/// Waveguide -> exciton mapping with an assumed scale: t_max = s n z_max / c,
/// spectrum divided by s.
inline Mapping waveguide_to_exciton_mapping(double assumed_scale, double refractive_index = 1.0, double c = 1.0,
                                            std::string name = "waveguide_to_exciton") {
  detail::require(assumed_scale > 0.0, "mapping scale must be positive");
  Mapping m;
  m.name = std::move(name);
  m.domain["z_max"] = {0.0, std::numeric_limits<double>::max()};
  m.params = [=](const Params& p) {
    Params q;
    q["t_max"] = assumed_scale * refractive_index * p.at("z_max") / c;
    q["samples"] = rdetail::get(p, "samples", 11.0);
    return q;
  };
  m.observables = [=](const Observables& o) {
    Observables out = o;
    if (auto it = out.find("spectrum"); it != out.end())
      for (double& v : it->second) v /= assumed_scale;
    return out;
  };
  return m;
}

/// Cold-atom computation: system model -limit-> Bose-Hubbard -iso-> disordered
/// lattice target model, no target system node.
struct MblSetup {
  HubbardRunnerConfig lattice;
  hubbard::SystemPerturbation perturbation;
  std::vector<Params> regime = {{{"U", 0.0}, {"delta", 0.0}}, {{"U", 0.0}, {"delta", 5.0}},
                                {{"U", 2.0}, {"delta", 0.0}}, {{"U", 2.0}, {"delta", 5.0}}};
};

inline RunnerRegistry mbl_registry(const MblSetup& s) {
  RunnerRegistry r;
  r.runners["bose_hubbard"] = hubbard_simulation_runner(s.lattice);
  r.runners["cold_atom_system"] = hubbard_system_runner(s.lattice, s.perturbation);
  Mapping id;
  id.name = "identity";
  r.mappings["identity"] = id;
  return r;
}

inline ModelGraph mbl_graph(const MblSetup& s) {
  const RunnerRegistry reg = mbl_registry(s);
  ModelGraph g;
  g.add_node({"cold_atom_system", Side::kSource, Level::kSystem, "cold_atom_system",
              reg.runners.at("cold_atom_system"), std::nullopt, {}, "optical-lattice bosons with trap and J'"});
  g.add_node({"bose_hubbard", Side::kSource, Level::kSimulation, "bose_hubbard", reg.runners.at("bose_hubbard"),
              std::nullopt, {}, "ideal Bose-Hubbard chain"});
  g.add_node({"disordered_lattice", Side::kTarget, Level::kSimulation, "bose_hubbard",
              reg.runners.at("bose_hubbard"), std::nullopt, {}, "disordered interacting lattice model"});
  g.add_edge(RelationEdge::limiting("cold_atom_system", "bose_hubbard", s.regime));
  g.add_edge(RelationEdge::isomorphism("bose_hubbard", "disordered_lattice", s.regime, reg.mappings.at("identity")));
  return g;
}

/// Photonic emulation of exciton transport: four nodes, two limits, one isomorphism.
struct PhotonicSetup {
  enaqt::ExcitonNetwork network;
  double scale = 1.0;
  double refractive_index = 1.0;
  double c = 1.0;
  double fabrication_jitter = 0.0;
  std::uint64_t seed = 0;
  std::vector<Params> regime = {{{"z_max", 2.0}, {"samples", 11.0}}, {{"z_max", 5.0}, {"samples", 11.0}}};
};

inline RunnerRegistry photonic_registry(const PhotonicSetup& s) {
  RunnerRegistry r;
  r.runners["waveguide_array"] = waveguide_runner(s.network, s.scale, s.refractive_index, s.c);
  r.runners["waveguide_system"] =
      waveguide_runner(s.network, s.scale, s.refractive_index, s.c, s.fabrication_jitter, s.seed);
  r.runners["exciton_model"] = exciton_runner(s.network);
  r.mappings["waveguide_to_exciton"] = waveguide_to_exciton_mapping(s.scale, s.refractive_index, s.c);
  return r;
}

/// Reference data for the target system: the exciton model sampled on the
/// mapped regime (a stand-in; no spectroscopy data ships with the library).
inline Dataset exciton_reference_dataset(const PhotonicSetup& s) {
  const RunnerRegistry reg = photonic_registry(s);
  const Mapping& m = reg.mappings.at("waveguide_to_exciton");
  Dataset d;
  for (const auto& p : s.regime) {
    const Params q = m.apply(p);
    d.points.push_back({q, reg.runners.at("exciton_model")(q)});
  }
  return d;
}

inline ModelGraph enaqt_graph(const PhotonicSetup& s, std::optional<Dataset> target_data = std::nullopt) {
  const RunnerRegistry reg = photonic_registry(s);
  Dataset data = target_data ? *target_data : exciton_reference_dataset(s);
  data.pinned_digest = data.digest();
  ModelGraph g;
  g.add_node({"waveguide_system", Side::kSource, Level::kSystem, "waveguide_system",
              reg.runners.at("waveguide_system"), std::nullopt, {}, "fabricated array with coupler jitter"});
  g.add_node({"waveguide_array", Side::kSource, Level::kSimulation, "waveguide_array",
              reg.runners.at("waveguide_array"), std::nullopt, {}, "coupled-mode equations"});
  g.add_node({"exciton_model", Side::kTarget, Level::kSimulation, "exciton_model", reg.runners.at("exciton_model"),
              std::nullopt, {}, "single-excitation tight-binding model"});
  g.add_node({"exciton_complex", Side::kTarget, Level::kSystem, "", Runner{}, std::move(data), {},
              "pigment-protein complex (reference data)"});
  g.add_edge(RelationEdge::limiting("waveguide_system", "waveguide_array", s.regime));
  g.add_edge(RelationEdge::isomorphism("waveguide_array", "exciton_model", s.regime, reg.mappings.at("waveguide_to_exciton")));
  g.add_edge(RelationEdge::limiting("exciton_complex", "exciton_model", {}));
  return g;
}

}  // namespace aqsim::validation
