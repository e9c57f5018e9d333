#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aqsim/core/evolution.hpp"
#include "aqsim/core/units.hpp"
#include "aqsim/enaqt/network.hpp"

namespace aqsim::waveguide {

using units::InverseLength;
using units::Length;
using units::Speed;
using units::Time;

/// Evanescently coupled waveguide array.
struct WaveguideArray {
  std::vector<InverseLength> beta;  // propagation constants
  RMatrix C;                        // couplings, 1/length, symmetric with zero diagonal
  Length length{1.0};
  double refractive_index = 1.0;
  Speed c{1.0};

  std::size_t size() const { return beta.size(); }

  void validate() const {
    const auto n = static_cast<Eigen::Index>(size());
    detail::require(n >= 1, "waveguide array needs at least one mode");
    detail::require<DimensionMismatch>(C.rows() == n && C.cols() == n, "coupling matrix must be N x N");
    for (Eigen::Index i = 0; i < n; ++i) {
      detail::require(C(i, i) == 0.0, "coupling matrix must have a zero diagonal");
      for (Eigen::Index j = 0; j < n; ++j) detail::require(C(i, j) == C(j, i), "coupling matrix must be symmetric");
    }
    detail::require(length.value >= 0.0, "array length must be >= 0");
    detail::require(refractive_index >= 1.0, "refractive index must be >= 1");
    detail::require(c.value > 0.0, "speed of light must be > 0");
  }
};

/// H = sum_m beta_m |m><m| + sum_{n<m} C_mn (|m><n| + |n><m|).
inline Operator build_waveguide_hamiltonian(const WaveguideArray& a) {
  a.validate();
  CMatrix h = a.C.cast<Complex>();
  for (std::size_t m = 0; m < a.size(); ++m) h(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) = a.beta[m].value;
  return Operator(std::move(h), Hermiticity::kYes);
}

/// Output amplitudes exp(-i H t)|m> with t = n z / c.
inline CVector propagate(const WaveguideArray& a, std::size_t input_mode, Length z) {
  a.validate();
  detail::require(input_mode < a.size(), "input mode outside the array");
  detail::require(z.value >= 0.0 && z <= a.length, "z outside [0, array length]");
  const Time t = units::propagation_time(z, a.refractive_index, a.c);
  const UnitaryPropagator u(build_waveguide_hamiltonian(a));
  const CVector out = u.propagate(StateVector::basis_state(a.size(), input_mode).amplitudes(), t.value);
  detail::require<ContractViolation>(std::abs(out.norm() - 1.0) <= 1e-9, "propagation lost norm");
  return out;
}

/// Propagation distance for complete transfer in a symmetric two-guide coupler,
/// c0 t = pi / 2. The full power beat (return to the input guide) is twice this.
inline Length coupler_transfer_length(double c0, double refractive_index, Speed c) {
  return Length(std::numbers::pi / (2.0 * c0) * c.value / refractive_index);
}

struct IsomorphismRecord {
  double scale = 1.0;                   // energy -> inverse length
  std::vector<std::size_t> permutation; // waveguide mode of exciton site m
  double residual = 0.0;                // max relative parameter mismatch
};

/// beta = s eps, C = s V, with an identity site permutation.
inline std::pair<WaveguideArray, IsomorphismRecord> map_fmo_to_waveguide(const enaqt::ExcitonNetwork& net,
                                                                          double scale,
                                                                          double refractive_index = 1.0,
                                                                          Speed c = Speed(1.0),
                                                                          Length length = Length(1.0)) {
  net.validate();
  detail::require(scale > 0.0 && std::isfinite(scale), "isomorphism scale must be positive");
  WaveguideArray a;
  for (double e : net.epsilon) a.beta.emplace_back(scale * e);
  a.C = scale * net.V;
  a.refractive_index = refractive_index;
  a.c = c;
  a.length = length;
  IsomorphismRecord r;
  r.scale = scale;
  r.permutation.resize(net.size());
  std::iota(r.permutation.begin(), r.permutation.end(), std::size_t{0});
  double mx = 0.0, dev = 0.0;
  for (std::size_t m = 0; m < net.size(); ++m) {
    mx = std::max(mx, std::abs(scale * net.epsilon[m]));
    dev = std::max(dev, std::abs(a.beta[m].value - scale * net.epsilon[m]));
  }
  mx = std::max(mx, (scale * net.V).cwiseAbs().maxCoeff());
  dev = std::max(dev, (a.C - scale * net.V).cwiseAbs().maxCoeff());
  r.residual = mx > 0.0 ? dev / mx : dev;
  return {std::move(a), std::move(r)};
}

struct IsomorphismCheck {
  double max_distance = 0.0;  // max |P_wg - P_fmo| over inputs, sites and sample points
  double tolerance = 0.0;
  bool pass = false;
  bool degenerate_tolerance = false;  // infinite tolerance always passes
  std::size_t worst_input = 0;
  std::size_t worst_site = 0;
  double worst_z = 0.0;
};

/// Compares mode populations of the array at each z with the exciton model at
/// t = scale * n z / c, for every input site.
inline IsomorphismCheck check_isomorphism(const enaqt::ExcitonNetwork& net, const WaveguideArray& a,
                                          const IsomorphismRecord& r, std::span<const double> z_samples,
                                          double tol) {
  net.validate();
  a.validate();
  detail::require<DimensionMismatch>(net.size() == a.size() && r.permutation.size() == net.size(),
                                     "network / array / record dimensions differ");
  detail::require(tol >= 0.0, "tolerance must be >= 0");
  const UnitaryPropagator fmo(enaqt::build_exciton_hamiltonian(net));
  const UnitaryPropagator wg(build_waveguide_hamiltonian(a));
  IsomorphismCheck out;
  out.tolerance = tol;
  out.degenerate_tolerance = std::isinf(tol);
  for (std::size_t m = 0; m < net.size(); ++m) {
    const CVector e_site = StateVector::basis_state(net.size(), m).amplitudes();
    const CVector e_mode = StateVector::basis_state(a.size(), r.permutation[m]).amplitudes();
    for (double zv : z_samples) {
      const Length z(zv);
      const Time t = units::propagation_time(z, a.refractive_index, a.c);
      const RVector pw = wg.propagate(e_mode, t.value).cwiseAbs2();
      const RVector pf = fmo.propagate(e_site, r.scale * t.value).cwiseAbs2();
      for (std::size_t s = 0; s < net.size(); ++s) {
        const double d = std::abs(pw(static_cast<Eigen::Index>(r.permutation[s])) - pf(static_cast<Eigen::Index>(s)));
        if (d > out.max_distance) {
          out.max_distance = d;
          out.worst_input = m;
          out.worst_site = s;
          out.worst_z = zv;
        }
      }
    }
  }
  out.pass = out.max_distance <= tol;
  return out;
}

}  // namespace aqsim::waveguide
