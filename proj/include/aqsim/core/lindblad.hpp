#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/operator.hpp"

namespace aqsim {

/// Irreversible trap attached to one basis state (the reaction centre in ENAQT).
struct Sink {
  std::size_t site = 0;
  double rate = 0.0;  // kappa_trap, 1/time
};

/// Open-system model: H plus per-site pure dephasing, an optional sink, and
/// uniform recombination loss.
///
///   d rho/dt = -i (H_eff rho - rho H_eff^dagger)
///              + sum_m gamma_m (P_m rho P_m - 1/2 {P_m, rho})
///   H_eff    = H - i kappa/2 P_sink - i Gamma/2
///
/// Population removed by the sink and by recombination is tracked separately so
/// that trapped + recombined + Tr(rho) stays equal to the initial trace.
struct LindbladSpec {
  Operator hamiltonian;
  std::vector<double> dephasing_rates;  // gamma_m per basis state
  std::optional<Sink> sink;
  double recombination_rate = 0.0;  // Gamma

  std::size_t dim() const { return hamiltonian.dim(); }

  void validate() const {
    const std::size_t d = dim();
    detail::require<DimensionMismatch>(dephasing_rates.size() == d,
                                       "dephasing rate count must equal the basis dimension");
    for (double g : dephasing_rates) detail::require(g >= 0.0, "dephasing rates must be non-negative");
    detail::require(recombination_rate >= 0.0, "recombination rate must be non-negative");
    if (sink) {
      detail::require(sink->site < d, "sink site outside the basis");
      detail::require(sink->rate >= 0.0, "trap rate must be non-negative");
    }
    if (!hamiltonian.is_hermitian(1e-12)) throw ContractViolation("Lindblad Hamiltonian must be hermitian");
  }

  static LindbladSpec uniform_dephasing(Operator h, double gamma) {
    LindbladSpec s;
    s.dephasing_rates.assign(h.dim(), gamma);
    s.hamiltonian = std::move(h);
    return s;
  }
};

struct LindbladOptions {
  std::size_t superoperator_guard = 64;  // exact superoperator exponential up to this dimension
  double rk4_tolerance = 1e-8;
  int rk4_initial_steps = 16;
  int rk4_max_halvings = 24;
};

struct LindbladTrajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<double> trapped;     // cumulative population absorbed by the sink
  std::vector<double> recombined;  // cumulative population lost to recombination
};

namespace detail {

inline CMatrix effective_hamiltonian(const LindbladSpec& spec) {
  CMatrix h = spec.hamiltonian.dense();
  const auto d = static_cast<Eigen::Index>(spec.dim());
  for (Eigen::Index i = 0; i < d; ++i) h(i, i) -= Complex(0.0, 0.5 * spec.recombination_rate);
  if (spec.sink) {
    const auto s = static_cast<Eigen::Index>(spec.sink->site);
    h(s, s) -= Complex(0.0, 0.5 * spec.sink->rate);
  }
  return h;
}

/// Column-major vec(rho) followed by the trapped and recombined counters.
inline CMatrix augmented_superoperator(const LindbladSpec& spec) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  const Eigen::Index n = d * d + 2;
  const CMatrix heff = effective_hamiltonian(spec);
  CMatrix L = CMatrix::Zero(n, n);
  auto idx = [d](Eigen::Index i, Eigen::Index j) { return i + d * j; };
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Eigen::Index row = idx(i, j);
      for (Eigen::Index k = 0; k < d; ++k) {
        L(row, idx(k, j)) += -kI * heff(i, k);
        L(row, idx(i, k)) += kI * std::conj(heff(j, k));
      }
      const double gi = spec.dephasing_rates[static_cast<std::size_t>(i)];
      const double gj = spec.dephasing_rates[static_cast<std::size_t>(j)];
      L(row, row) += -0.5 * (gi + gj) + (i == j ? gi : 0.0);
    }
  }
  if (spec.sink) {
    const auto s = static_cast<Eigen::Index>(spec.sink->site);
    L(d * d, idx(s, s)) = spec.sink->rate;
  }
  for (Eigen::Index i = 0; i < d; ++i) L(d * d + 1, idx(i, i)) = spec.recombination_rate;
  return L;
}

struct OpenState {
  CMatrix rho;
  double trapped = 0.0;
  double recombined = 0.0;
};

inline OpenState lindblad_rhs(const LindbladSpec& spec, const CMatrix& heff, const OpenState& y) {
  OpenState dy;
  dy.rho = -kI * (heff * y.rho - y.rho * heff.adjoint());
  const auto d = y.rho.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) continue;
      dy.rho(i, j) -= 0.5 *
                      (spec.dephasing_rates[static_cast<std::size_t>(i)] +
                       spec.dephasing_rates[static_cast<std::size_t>(j)]) *
                      y.rho(i, j);
    }
  }
  dy.trapped = spec.sink ? spec.sink->rate * y.rho(static_cast<Eigen::Index>(spec.sink->site),
                                                   static_cast<Eigen::Index>(spec.sink->site))
                                                 .real()
                         : 0.0;
  dy.recombined = spec.recombination_rate * y.rho.trace().real();
  return dy;
}

inline OpenState rk4_advance(const LindbladSpec& spec, const CMatrix& heff, OpenState y, double dt,
                             int steps) {
  auto axpy = [](const OpenState& a, double s, const OpenState& b) {
    return OpenState{a.rho + s * b.rho, a.trapped + s * b.trapped, a.recombined + s * b.recombined};
  };
  const double h = dt / steps;
  for (int n = 0; n < steps; ++n) {
    const OpenState k1 = lindblad_rhs(spec, heff, y);
    const OpenState k2 = lindblad_rhs(spec, heff, axpy(y, h / 2, k1));
    const OpenState k3 = lindblad_rhs(spec, heff, axpy(y, h / 2, k2));
    const OpenState k4 = lindblad_rhs(spec, heff, axpy(y, h, k3));
    y.rho += h / 6 * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
    y.trapped += h / 6 * (k1.trapped + 2 * k2.trapped + 2 * k3.trapped + k4.trapped);
    y.recombined += h / 6 * (k1.recombined + 2 * k2.recombined + 2 * k3.recombined + k4.recombined);
  }
  return y;
}

inline void check_times(std::span<const double> times) {
  double prev = 0.0;
  for (double t : times) {
    require(std::isfinite(t) && t >= prev, "output times must be non-negative and increasing");
    prev = t;
  }
}

}  // namespace detail

/// Propagates rho0 (taken at t = 0) and reports rho, trapped and recombined
/// population at each output time.
inline LindbladTrajectory lindblad_propagate(const LindbladSpec& spec, const DensityMatrix& rho0,
                                             std::span<const double> times,
                                             const LindbladOptions& opt = {}) {
  spec.validate();
  detail::require<DimensionMismatch>(rho0.dim() == spec.dim(), "density matrix / basis mismatch");
  detail::check_times(times);

  LindbladTrajectory out;
  out.times.assign(times.begin(), times.end());
  const auto d = static_cast<Eigen::Index>(spec.dim());

  if (spec.dim() <= opt.superoperator_guard) {
    const CMatrix L = detail::augmented_superoperator(spec);
    CVector v = CVector::Zero(d * d + 2);
    v.head(d * d) = Eigen::Map<const CVector>(rho0.matrix().data(), d * d);
    double t_prev = 0.0;
    double cached_dt = -1.0;
    CMatrix step;
    for (double t : times) {
      const double dt = t - t_prev;
      if (dt > 0.0) {
        if (dt != cached_dt) {
          step = (L * dt).exp();
          cached_dt = dt;
        }
        v = step * v;
      }
      t_prev = t;
      CMatrix rho = Eigen::Map<const CMatrix>(v.data(), d, d);
      rho = 0.5 * (rho + rho.adjoint());
      out.states.emplace_back(std::move(rho));
      out.trapped.push_back(v(d * d).real());
      out.recombined.push_back(v(d * d + 1).real());
    }
    return out;
  }

  const CMatrix heff = detail::effective_hamiltonian(spec);
  detail::OpenState y{rho0.matrix(), 0.0, 0.0};
  double t_prev = 0.0;
  for (double t : times) {
    const double dt = t - t_prev;
    if (dt > 0.0) {
      int steps = opt.rk4_initial_steps;
      detail::OpenState coarse = detail::rk4_advance(spec, heff, y, dt, steps);
      for (int h = 0;; ++h) {
        detail::OpenState fine = detail::rk4_advance(spec, heff, y, dt, steps * 2);
        const double err = (fine.rho - coarse.rho).cwiseAbs().maxCoeff();
        coarse = std::move(fine);
        steps *= 2;
        if (err <= opt.rk4_tolerance) break;
        if (h >= opt.rk4_max_halvings)
          throw PhysicsGuardError("Lindblad RK4 step halving did not reach tolerance");
      }
      y = std::move(coarse);
    }
    t_prev = t;
    out.states.emplace_back(0.5 * (y.rho + y.rho.adjoint()));
    out.trapped.push_back(y.trapped);
    out.recombined.push_back(y.recombined);
  }
  return out;
}

inline std::vector<DensityMatrix> evolve_lindblad(const LindbladSpec& spec, const DensityMatrix& rho0,
                                                  std::span<const double> times,
                                                  const LindbladOptions& opt = {}) {
  return lindblad_propagate(spec, rho0, times, opt).states;
}

}  // namespace aqsim
