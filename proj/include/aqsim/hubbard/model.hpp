#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/fock_basis.hpp"
#include "aqsim/core/operator.hpp"
#include "aqsim/core/rng.hpp"

namespace aqsim::hubbard {

enum class Geometry { kChain, kLadder };

inline std::string to_string(Geometry g) { return g == Geometry::kChain ? "chain" : "ladder"; }

inline Geometry parse_geometry(const std::string& s) {
  if (s == "chain") return Geometry::kChain;
  if (s == "ladder") return Geometry::kLadder;
  throw InvalidArgument("unknown geometry '" + s + "' (chain|ladder)");
}

/// Open-boundary Bose-Hubbard lattice. Ladder sites are numbered rung by rung:
/// site 2r + leg, so a ladder of L sites has L/2 rungs.
struct HubbardParams {
  std::size_t L = 2;
  double J = 1.0;
  double U = 0.0;
  std::vector<double> mu;  // per-site offsets, empty means zero
  Geometry geometry = Geometry::kChain;
  int max_occupancy = 1;
  int particles = 1;

  void validate() const {
    detail::require(L >= 2, "Hubbard lattice needs L >= 2");
    detail::require(mu.empty() || mu.size() == L, "mu must have one entry per site");
    detail::require(std::isfinite(J) && std::isfinite(U), "J and U must be finite");
    if (geometry == Geometry::kLadder) detail::require(L % 2 == 0, "ladder needs an even site count");
  }
};

using Bond = std::pair<std::size_t, std::size_t>;

/// Nearest-neighbour bonds; chain bonds are (j, j+1) in order.
inline std::vector<Bond> nearest_bonds(std::size_t L, Geometry g) {
  std::vector<Bond> b;
  if (g == Geometry::kChain) {
    for (std::size_t j = 0; j + 1 < L; ++j) b.emplace_back(j, j + 1);
    return b;
  }
  const std::size_t rungs = L / 2;
  for (std::size_t r = 0; r < rungs; ++r) {
    b.emplace_back(2 * r, 2 * r + 1);
    if (r + 1 < rungs) {
      b.emplace_back(2 * r, 2 * r + 2);
      b.emplace_back(2 * r + 1, 2 * r + 3);
    }
  }
  return b;
}

/// Next-nearest bonds along the chain or along each ladder leg.
inline std::vector<Bond> next_nearest_bonds(std::size_t L, Geometry g) {
  std::vector<Bond> b;
  const std::size_t stride = g == Geometry::kChain ? 2 : 4;
  for (std::size_t j = 0; j + stride < L; ++j) b.emplace_back(j, j + stride);
  return b;
}

/// Position along the lattice used by the trap term (rung index on a ladder).
inline double lattice_position(std::size_t site, Geometry g) {
  return g == Geometry::kChain ? static_cast<double>(site) : static_cast<double>(site / 2);
}

struct WeightedBond {
  std::size_t i, j;
  double amplitude;  // contributes -amplitude (b_i^dagger b_j + h.c.)
};

namespace detail {

inline void check_basis(const HubbardParams& p, const FockBasis& basis) {
  p.validate();
  aqsim::detail::require<DimensionMismatch>(
      basis.sites() == p.L && basis.particles() == p.particles &&
          basis.max_occupancy() == p.max_occupancy,
      "Fock basis does not match the Hubbard parameters");
}

/// -sum_b t_b (b_i^dagger b_j + h.c.) + diag(onsite(occ)).
template <class Diagonal>
Operator assemble(const FockBasis& basis, const std::vector<WeightedBond>& bonds, Diagonal onsite) {
  std::vector<CTriplet> trip;
  for (std::size_t s = 0; s < basis.dim(); ++s) {
    const Occupation& occ = basis.state(s);
    const double d = onsite(occ);
    if (d != 0.0) trip.emplace_back(s, s, d);
    for (const auto& b : bonds) {
      if (b.amplitude == 0.0) continue;
      for (int dir = 0; dir < 2; ++dir) {
        const std::size_t to = dir == 0 ? b.i : b.j;
        const std::size_t from = dir == 0 ? b.j : b.i;
        if (occ[from] == 0 || occ[to] == basis.max_occupancy()) continue;
        Occupation next = occ;
        const double amp = std::sqrt(static_cast<double>(occ[from]) * (occ[to] + 1));
        --next[from];
        ++next[to];
        trip.emplace_back(*basis.index_of(next), s, -b.amplitude * amp);
      }
    }
  }
  return Operator(basis.dim(), trip, Hermiticity::kYes);
}

}  // namespace detail

/// H = -J sum_<jk> (b_j^dagger b_k + h.c.) + U/2 sum_j n_j(n_j - 1) + sum_j mu_j n_j.
inline Operator build_bose_hubbard(const HubbardParams& p, const FockBasis& basis) {
  detail::check_basis(p, basis);
  std::vector<WeightedBond> bonds;
  for (auto [i, j] : nearest_bonds(p.L, p.geometry)) bonds.push_back({i, j, p.J});
  return detail::assemble(basis, bonds, [&](const Occupation& occ) {
    double e = 0.0;
    for (std::size_t j = 0; j < occ.size(); ++j) {
      e += 0.5 * p.U * occ[j] * (occ[j] - 1);
      if (!p.mu.empty()) e += p.mu[j] * occ[j];
    }
    return e;
  });
}

/// Deviations of the experimental system from the ideal lattice model.
struct SystemPerturbation {
  double trap_curvature = 0.0;  // energy per site^2
  double trap_center = 0.0;
  double nnn_hopping = 0.0;               // J'
  std::vector<double> hopping_multipliers;  // one per nearest-neighbour bond, empty means 1

  bool is_zero() const {
    for (double m : hopping_multipliers)
      if (m != 1.0) return false;
    return trap_curvature == 0.0 && nnn_hopping == 0.0;
  }
};

/// Bose-Hubbard plus trap, per-bond hopping multipliers and next-nearest hopping J'.
inline Operator build_system_hamiltonian(const HubbardParams& p, const SystemPerturbation& pert,
                                         const FockBasis& basis) {
  detail::check_basis(p, basis);
  const auto nn = nearest_bonds(p.L, p.geometry);
  aqsim::detail::require(pert.hopping_multipliers.empty() || pert.hopping_multipliers.size() == nn.size(),
                         "hopping multipliers need one entry per nearest-neighbour bond (" +
                             std::to_string(nn.size()) + ")");
  aqsim::detail::require(std::isfinite(pert.trap_curvature) && std::isfinite(pert.trap_center) &&
                             std::isfinite(pert.nnn_hopping),
                         "perturbation entries must be finite");
  std::vector<WeightedBond> bonds;
  for (std::size_t b = 0; b < nn.size(); ++b) {
    const double m = pert.hopping_multipliers.empty() ? 1.0 : pert.hopping_multipliers[b];
    bonds.push_back({nn[b].first, nn[b].second, p.J * m});
  }
  for (auto [i, j] : next_nearest_bonds(p.L, p.geometry)) bonds.push_back({i, j, pert.nnn_hopping});
  return detail::assemble(basis, bonds, [&](const Occupation& occ) {
    double e = 0.0;
    for (std::size_t j = 0; j < occ.size(); ++j) {
      const double x = lattice_position(j, p.geometry) - pert.trap_center;
      double eps = pert.trap_curvature * x * x;
      if (!p.mu.empty()) eps += p.mu[j];
      e += 0.5 * p.U * occ[j] * (occ[j] - 1) + eps * occ[j];
    }
    return e;
  });
}

/// Hopping part with J = 1: K = -sum_<jk> (b_j^dagger b_k + h.c.).
inline Operator build_kinetic(const HubbardParams& p, const FockBasis& basis) {
  HubbardParams q = p;
  q.J = 1.0;
  q.U = 0.0;
  q.mu.clear();
  return build_bose_hubbard(q, basis);
}

enum class DisorderKind { kQuasiperiodic, kUniform };

struct DisorderSpec {
  DisorderKind kind = DisorderKind::kQuasiperiodic;
  double delta = 0.0;
  double beta = 0.721;  // quasiperiodic wave number
  double phi = 0.0;     // phase of realization 0
  std::uint64_t seed = 0;
  std::size_t realizations = 1;

  void validate() const {
    aqsim::detail::require(delta >= 0.0 && std::isfinite(delta), "disorder strength must be >= 0");
    if (kind == DisorderKind::kQuasiperiodic)
      aqsim::detail::require(beta > 0.0 && beta < 1.0, "quasiperiodic beta must lie in (0, 1)");
  }
};

/// Phase used by quasiperiodic realization r: phi + 2 pi frac(r g), g the golden-ratio conjugate.
inline double quasiperiodic_phase(const DisorderSpec& spec, std::size_t r) {
  constexpr double g = 0.6180339887498949;
  const double f = static_cast<double>(r) * g;
  return spec.phi + 2.0 * std::numbers::pi * (f - std::floor(f));
}

/// On-site offsets mu_j for one disorder realization. Sites are labelled j = 1..L
/// in the cosine, so Delta cos(2 pi beta j + phi) starts at the first site.
inline std::vector<double> make_disorder(const DisorderSpec& spec, std::size_t L, std::size_t realization) {
  spec.validate();
  std::vector<double> mu(L, 0.0);
  if (spec.delta == 0.0) return mu;
  if (spec.kind == DisorderKind::kQuasiperiodic) {
    const double phi = quasiperiodic_phase(spec, realization);
    for (std::size_t j = 0; j < L; ++j)
      mu[j] = spec.delta * std::cos(2.0 * std::numbers::pi * spec.beta * static_cast<double>(j + 1) + phi);
  } else {
    Rng rng = make_stream(spec.seed, realization);
    for (auto& m : mu) m = spec.delta * (2.0 * uniform01(rng) - 1.0);
  }
  return mu;
}

}  // namespace aqsim::hubbard
