#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "aqsim/core/evolution.hpp"
#include "aqsim/core/parallel.hpp"
#include "aqsim/hubbard/model.hpp"

namespace aqsim::hubbard {

struct Modulation {
  double amplitude = 0.03;  // relative modulation of J
  int cycles = 20;
  int steps_per_period = 64;
};

struct CoupledGap {
  double gap = 0.0;         // E_n - E_0
  double frequency = 0.0;   // gap / (2 pi)
  std::size_t level = 0;
  double matrix_element = 0.0;  // |<n|K|0>|
};

/// Lowest excitation reachable from the ground state through the hopping operator.
inline CoupledGap lowest_coupled_gap(const HubbardParams& p, const FockBasis& basis) {
  const Spectrum s = diagonalize(build_bose_hubbard(p, basis));
  const CMatrix k = build_kinetic(p, basis).dense();
  const CVector k0 = s.vectors.adjoint() * (k * s.vectors.col(0));
  const double scale = k0.cwiseAbs().maxCoeff();
  for (Eigen::Index n = 1; n < k0.size(); ++n) {
    const double gap = s.energies(n) - s.energies(0);
    if (gap > 1e-10 && std::abs(k0(n)) > 1e-8 * scale)
      return {gap, gap / (2.0 * std::numbers::pi), static_cast<std::size_t>(n), std::abs(k0(n))};
  }
  throw PhysicsGuardError("no excited state couples to the ground state through the hopping term");
}

/// Energy absorbed from the ground state under J(t) = J (1 + a sin 2 pi nu t).
///
/// The drive is piecewise constant, sampled at step midpoints. The midpoint
/// values do not depend on nu, so the step Hamiltonians are diagonalized once.
class HiggsProbe {
 public:
  HiggsProbe(const HubbardParams& p, const FockBasis& basis, const Modulation& m) : mod_(m) {
    aqsim::detail::require(m.amplitude >= 0.0 && m.amplitude <= 0.2, "modulation amplitude outside [0, 0.2]");
    aqsim::detail::require(m.cycles >= 1, "need at least one drive cycle");
    if (m.steps_per_period < 64)
      throw PhysicsGuardError("drive resolution below 64 steps per period");
    const Operator h0 = build_bose_hubbard(p, basis);
    h0_ = h0.dense();
    const Spectrum s0 = diagonalize(h0);
    e0_ = s0.energies(0);
    psi0_ = s0.vectors.col(0);
    if (m.amplitude == 0.0) return;
    const CMatrix k = build_kinetic(p, basis).dense();
    for (int j = 0; j < m.steps_per_period; ++j) {
      const double phase = 2.0 * std::numbers::pi * (j + 0.5) / m.steps_per_period;
      const double dj = p.J * m.amplitude * std::sin(phase);
      steps_.push_back(diagonalize(Operator(CMatrix(h0_ + dj * k), Hermiticity::kYes)));
    }
  }

  double ground_energy() const { return e0_; }

  /// S(nu) = (<H0>_final - E0) / (a^2 cycles).
  double response(double nu) const {
    if (mod_.amplitude == 0.0) return 0.0;
    aqsim::detail::require(nu > 0.0 && std::isfinite(nu), "drive frequency must be positive");
    const double dt = 1.0 / (nu * mod_.steps_per_period);
    const Eigen::Index d = psi0_.size();
    std::vector<CVector> phases;
    for (const auto& s : steps_) {
      CVector ph(s.energies.size());
      for (Eigen::Index i = 0; i < ph.size(); ++i) ph(i) = std::exp(Complex(0.0, -s.energies(i) * dt));
      phases.push_back(std::move(ph));
    }
    CVector psi = psi0_;
    if (mod_.cycles > d) {
      // many cycles: build the one-period propagator once
      CMatrix period = CMatrix::Identity(d, d);
      for (std::size_t k = 0; k < steps_.size(); ++k)
        period = steps_[k].vectors * phases[k].asDiagonal() * (steps_[k].vectors.adjoint() * period);
      for (int c = 0; c < mod_.cycles; ++c) psi = period * psi;
    } else {
      for (int c = 0; c < mod_.cycles; ++c)
        for (std::size_t k = 0; k < steps_.size(); ++k)
          psi = steps_[k].vectors * phases[k].cwiseProduct(steps_[k].vectors.adjoint() * psi);
    }
    const double e = psi.dot(h0_ * psi).real();
    return (e - e0_) / (mod_.amplitude * mod_.amplitude * mod_.cycles);
  }

  std::vector<double> scan(std::span<const double> nus, std::size_t jobs = 1) const {
    std::vector<double> s(nus.size());
    parallel_for(nus.size(), jobs, [&](std::size_t i) { s[i] = response(nus[i]); });
    return s;
  }

 private:
  Modulation mod_;
  CMatrix h0_;
  double e0_ = 0.0;
  CVector psi0_;
  std::vector<Spectrum> steps_;
};

inline double spectral_response(const HubbardParams& p, const FockBasis& basis, const Modulation& m,
                                double nu) {
  return HiggsProbe(p, basis, m).response(nu);
}

/// Index of the largest S on the grid.
inline std::size_t peak_index(std::span<const double> s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] > s[best]) best = i;
  return best;
}

struct SofteningPoint {
  double j = 0.0;                 // J / U
  std::optional<double> onset;    // nu_0, empty when flagged
  double exact_frequency = 0.0;   // lowest coupled gap / 2 pi
  std::vector<double> response;   // S over the nu grid
};

/// Onset frequency nu_0(j): first grid nu where S >= threshold * max S.
inline std::vector<SofteningPoint> softening_curve(const HubbardParams& base, std::span<const double> j_values,
                                                   std::span<const double> nus, const Modulation& m,
                                                   double threshold = 0.1, std::size_t jobs = 1) {
  aqsim::detail::require(!nus.empty(), "softening curve needs a frequency grid");
  aqsim::detail::require(base.U > 0.0, "softening curve is parameterized by j = J/U with U > 0");
  const FockBasis basis = build_fock_basis(base.L, base.particles, base.max_occupancy);
  std::vector<SofteningPoint> out;
  for (double j : j_values) {
    HubbardParams p = base;
    p.J = j * base.U;
    SofteningPoint pt;
    pt.j = j;
    pt.exact_frequency = lowest_coupled_gap(p, basis).frequency;
    pt.response = HiggsProbe(p, basis, m).scan(nus, jobs);
    double mx = 0.0;
    for (double s : pt.response) mx = std::max(mx, s);
    for (std::size_t i = 0; i < nus.size(); ++i)
      if (pt.response[i] >= threshold * mx - 1e-8) {
        pt.onset = nus[i];
        break;
      }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace aqsim::hubbard
