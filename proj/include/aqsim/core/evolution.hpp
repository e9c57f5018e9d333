#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/operator.hpp"

namespace aqsim {

/// Eigendecomposition H = V diag(E) V^dagger of a hermitian operator.
struct Spectrum {
  RVector energies;  // ascending
  CMatrix vectors;   // columns are eigenvectors

  std::size_t dim() const { return static_cast<std::size_t>(energies.size()); }
};

inline Spectrum diagonalize(const Operator& h) {
  if (!h.is_hermitian(1e-12)) {
    throw ContractViolation("diagonalize requires a hermitian operator (defect " +
                            std::to_string(h.hermiticity_defect()) + ")");
  }
  const CMatrix d = h.dense();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()));
  if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline RVector eigenvalues(const Operator& h) {
  if (!h.is_hermitian(1e-12)) throw ContractViolation("eigenvalues require a hermitian operator");
  const CMatrix d = h.dense();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Exact propagator exp(-iHt) built once from the eigendecomposition of H.
class UnitaryPropagator {
 public:
  explicit UnitaryPropagator(const Operator& h) : spectrum_(diagonalize(h)) {}
  explicit UnitaryPropagator(Spectrum s) : spectrum_(std::move(s)) {}

  const Spectrum& spectrum() const { return spectrum_; }

  CVector propagate(const CVector& psi0, double t) const {
    detail::require<DimensionMismatch>(static_cast<std::size_t>(psi0.size()) == spectrum_.dim(),
                                       "state/Hamiltonian dimension mismatch");
    CVector c = spectrum_.vectors.adjoint() * psi0;
    for (Eigen::Index k = 0; k < c.size(); ++k)
      c(k) *= std::exp(Complex(0.0, -spectrum_.energies(k) * t));
    return spectrum_.vectors * c;
  }

  /// Dense exp(-iHt).
  CMatrix matrix(double t) const {
    CVector phases(spectrum_.energies.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
      phases(k) = std::exp(Complex(0.0, -spectrum_.energies(k) * t));
    return spectrum_.vectors * phases.asDiagonal() * spectrum_.vectors.adjoint();
  }

 private:
  Spectrum spectrum_;
};

/// |psi(t)> = exp(-iHt)|psi0> at each requested time.
inline std::vector<StateVector> evolve_unitary(const Operator& h, const StateVector& psi0,
                                               std::span<const double> times) {
  detail::require<DimensionMismatch>(h.dim() == psi0.dim(), "state/Hamiltonian dimension mismatch");
  const UnitaryPropagator u(h);
  std::vector<StateVector> out;
  out.reserve(times.size());
  for (double t : times) out.emplace_back(u.propagate(psi0.amplitudes(), t), 1e-9);
  return out;
}

}  // namespace aqsim
