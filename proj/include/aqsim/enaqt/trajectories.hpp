#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/lindblad.hpp"
#include "aqsim/core/parallel.hpp"
#include "aqsim/core/rng.hpp"
#include "aqsim/enaqt/network.hpp"
#include "aqsim/enaqt/noise.hpp"

namespace aqsim::enaqt {

struct TrajectoryOptions {
  std::size_t trajectories = 1000;
  double max_step = 0.01;   // upper bound on the propagation step
  std::size_t jobs = 1;
  std::size_t block = 64;   // trajectories per reduction block
};

/// Trajectory-averaged density matrices with element-wise standard errors.
struct TrajectoryAverage {
  std::vector<double> times;
  std::vector<CMatrix> mean;
  std::vector<RMatrix> error_re;
  std::vector<RMatrix> error_im;
  std::vector<double> trapped;        // mean kappa * int rho_sink dt
  std::vector<double> trapped_error;
  std::size_t trajectories = 0;

  RVector populations(std::size_t k) const { return mean[k].diagonal().real(); }
};

namespace detail {

struct Sums {
  std::vector<CMatrix> s1;
  std::vector<RMatrix> s2_re, s2_im;
  std::vector<double> t1, t2;

  Sums(std::size_t nt, Eigen::Index d)
      : s1(nt, CMatrix::Zero(d, d)), s2_re(nt, RMatrix::Zero(d, d)), s2_im(nt, RMatrix::Zero(d, d)),
        t1(nt, 0.0), t2(nt, 0.0) {}

  void add(const Sums& o) {
    for (std::size_t k = 0; k < s1.size(); ++k) {
      s1[k] += o.s1[k];
      s2_re[k] += o.s2_re[k];
      s2_im[k] += o.s2_im[k];
      t1[k] += o.t1[k];
      t2[k] += o.t2[k];
    }
  }
};

}  // namespace detail

/// Average of pure-state trajectories under H_eff + sum_m de_m(t) |m><m|.
///
/// H_eff carries the sink and recombination as anti-hermitian terms. Each step
/// is split as exp(-i Theta_2) exp(-i H_eff h) exp(-i Theta_1), with Theta_1,2 the
/// noise integrals over the two half steps. White noise draws them as
/// N(0, gamma h / 2); OU noise uses the exact joint (x, int x) update.
inline TrajectoryAverage stochastic_trajectory_average(const ExcitonNetwork& net, const NoiseModel& noise,
                                                       const StateVector& psi0, std::span<const double> times,
                                                       const TrajectoryOptions& opt = {}) {
  net.validate();
  noise.validate(net.size());
  aqsim::detail::require<DimensionMismatch>(psi0.dim() == net.size(), "initial state / network mismatch");
  aqsim::detail::require(opt.trajectories >= 2, "need at least two trajectories");
  aqsim::detail::require(opt.max_step > 0.0 && opt.block >= 1, "invalid trajectory options");
  aqsim::detail::check_times(times);
  if (noise.kind == NoiseKind::kOrnsteinUhlenbeck && opt.max_step > noise.tau_c)
    throw PhysicsGuardError("trajectory step exceeds the OU correlation time");

  const auto d = static_cast<Eigen::Index>(net.size());
  LindbladSpec spec;
  spec.hamiltonian = build_exciton_hamiltonian(net);
  spec.dephasing_rates.assign(net.size(), 0.0);
  spec.sink = Sink{net.sink_site, net.trap_rate};
  spec.recombination_rate = net.recombination_rate;
  const CMatrix heff = aqsim::detail::effective_hamiltonian(spec);
  const auto sink = static_cast<Eigen::Index>(net.sink_site);

  // Step plan: each output interval is cut into equal steps no longer than max_step.
  struct Interval {
    int steps;
    double h;
    CMatrix u;
  };
  std::vector<Interval> plan;
  double prev = 0.0;
  for (double t : times) {
    const double dt = t - prev;
    prev = t;
    if (dt <= 0.0) {
      plan.push_back({0, 0.0, CMatrix()});
      continue;
    }
    const int n = static_cast<int>(std::ceil(dt / opt.max_step - 1e-12));
    const double h = dt / n;
    const bool reuse = !plan.empty() && plan.back().steps > 0 && plan.back().h == h;
    plan.push_back({n, h, reuse ? plan.back().u : CMatrix((-kI * h * heff).exp())});
  }

  const std::size_t nt = times.size();
  const std::size_t nblocks = (opt.trajectories + opt.block - 1) / opt.block;
  std::vector<detail::Sums> blocks(nblocks, detail::Sums(nt, d));

  parallel_for(nblocks, opt.jobs, [&](std::size_t b) {
    detail::Sums& acc = blocks[b];
    const std::size_t lo = b * opt.block;
    const std::size_t hi = std::min(opt.trajectories, lo + opt.block);
    std::vector<double> x(net.size(), 0.0);
    for (std::size_t traj = lo; traj < hi; ++traj) {
      Rng rng = make_stream(noise.seed, traj);
      if (noise.kind == NoiseKind::kOrnsteinUhlenbeck)
        for (auto& xi : x) xi = noise.sigma * standard_normal(rng);
      CVector psi = psi0.amplitudes();
      double trapped = 0.0;
      for (std::size_t k = 0; k < nt; ++k) {
        const Interval& iv = plan[k];
        if (iv.steps > 0) {
          std::optional<OuStep> ou;
          std::vector<double> sd(net.size());
          if (noise.kind == NoiseKind::kOrnsteinUhlenbeck) {
            ou.emplace(noise.sigma, noise.tau_c, 0.5 * iv.h);
          } else {
            for (std::size_t m = 0; m < net.size(); ++m) sd[m] = std::sqrt(noise.gamma[m] * 0.5 * iv.h);
          }
          auto kick = [&] {
            for (Eigen::Index m = 0; m < d; ++m) {
              const auto mi = static_cast<std::size_t>(m);
              const double theta = ou ? ou->advance(x[mi], rng) : sd[mi] * standard_normal(rng);
              psi(m) *= std::exp(Complex(0.0, -theta));
            }
          };
          for (int s = 0; s < iv.steps; ++s) {
            const double before = std::norm(psi(sink));
            kick();
            psi = iv.u * psi;
            kick();
            trapped += net.trap_rate * 0.5 * iv.h * (before + std::norm(psi(sink)));
          }
        }
        const CMatrix rho = psi * psi.adjoint();
        acc.s1[k] += rho;
        acc.s2_re[k] += rho.real().cwiseAbs2();
        acc.s2_im[k] += rho.imag().cwiseAbs2();
        acc.t1[k] += trapped;
        acc.t2[k] += trapped * trapped;
      }
    }
  });

  detail::Sums total(nt, d);
  for (const auto& b : blocks) total.add(b);

  const auto n = static_cast<double>(opt.trajectories);
  auto se = [n](double s1, double s2) {
    const double var = std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0));
    return std::sqrt(var / n);
  };
  TrajectoryAverage out;
  out.times.assign(times.begin(), times.end());
  out.trajectories = opt.trajectories;
  for (std::size_t k = 0; k < nt; ++k) {
    out.mean.push_back(total.s1[k] / n);
    RMatrix er(d, d), ei(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        er(i, j) = se(total.s1[k](i, j).real(), total.s2_re[k](i, j));
        ei(i, j) = se(total.s1[k](i, j).imag(), total.s2_im[k](i, j));
      }
    out.error_re.push_back(std::move(er));
    out.error_im.push_back(std::move(ei));
    out.trapped.push_back(total.t1[k] / n);
    out.trapped_error.push_back(se(total.t1[k], total.t2[k]));
  }
  return out;
}

inline TrajectoryAverage stochastic_trajectory_average(const ExcitonNetwork& net, const NoiseModel& noise,
                                                       std::span<const double> times,
                                                       const TrajectoryOptions& opt = {}) {
  return stochastic_trajectory_average(net, noise, StateVector::basis_state(net.size(), net.input_site), times,
                                       opt);
}

/// First time a non-negative series drops below max/e and stays below for `dwell`.
/// The crossing is linearly interpolated; empty means the decay exceeds the window.
inline std::optional<double> coherence_lifetime(std::span<const double> times, std::span<const double> values,
                                                double dwell = 0.0) {
  aqsim::detail::require<DimensionMismatch>(times.size() == values.size(), "times/values length mismatch");
  aqsim::detail::require(times.size() >= 2, "coherence series too short");
  double mx = 0.0;
  std::size_t kmax = 0;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (values[k] > mx) {
      mx = values[k];
      kmax = k;
    }
  if (mx <= 0.0) return std::nullopt;
  const double thr = mx / std::exp(1.0);
  for (std::size_t k = kmax + 1; k < values.size(); ++k) {
    if (values[k] >= thr) continue;
    const double tc = times[k - 1] + (values[k - 1] - thr) / (values[k - 1] - values[k]) * (times[k] - times[k - 1]);
    if (tc + dwell > times.back()) return std::nullopt;
    bool stays = true;
    for (std::size_t j = k; j < values.size() && times[j] <= tc + dwell; ++j)
      if (values[j] >= thr) {
        stays = false;
        break;
      }
    if (stays) return tc;
  }
  return std::nullopt;
}

/// |rho_mn(t)| lifetime from a density-matrix series.
inline std::optional<double> coherence_lifetime(std::span<const double> times, const std::vector<CMatrix>& rho,
                                                std::size_t m, std::size_t n, double dwell = 0.0) {
  std::vector<double> v;
  for (const auto& r : rho) {
    aqsim::detail::require(m < static_cast<std::size_t>(r.rows()) && n < static_cast<std::size_t>(r.rows()),
                           "coherence index outside the basis");
    v.push_back(std::abs(r(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n))));
  }
  return coherence_lifetime(times, std::span<const double>(v), dwell);
}

}  // namespace aqsim::enaqt
