#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqsim/core/evolution.hpp"
#include "aqsim/core/fock_basis.hpp"
#include "aqsim/core/parallel.hpp"
#include "aqsim/core/stats.hpp"
#include "aqsim/hubbard/model.hpp"

namespace aqsim::hubbard {

/// Sublattice holding the atoms at t = 0. Sites are labelled 1..L, so "odd"
/// means array indices 0, 2, 4, ...
enum class Sublattice { kOdd, kEven };

inline bool on_sublattice(std::size_t index, Sublattice s) {
  return (index % 2 == 0) == (s == Sublattice::kOdd);
}

/// I = (N_init - N_other) / (N_init + N_other) relative to the initially occupied sublattice.
inline double imbalance(std::span<const double> occupations, Sublattice initial) {
  double a = 0.0, b = 0.0;
  for (std::size_t j = 0; j < occupations.size(); ++j) {
    aqsim::detail::require(occupations[j] >= -1e-12, "occupations must be non-negative");
    (on_sublattice(j, initial) ? a : b) += occupations[j];
  }
  aqsim::detail::require(a + b > 0.0, "imbalance of an empty lattice is undefined");
  return (a - b) / (a + b);
}

inline double imbalance(const Occupation& occ, Sublattice initial) {
  std::vector<double> d(occ.begin(), occ.end());
  return imbalance(std::span<const double>(d), initial);
}

/// Raw (N_even - N_odd) / N with even/odd in the 1-based site labelling.
inline double raw_imbalance(std::span<const double> occupations) {
  return imbalance(occupations, Sublattice::kEven);
}

/// Product state with one atom on every site of the given sublattice.
inline StateVector initial_cdw_state(const FockBasis& basis, Sublattice s) {
  Occupation occ(basis.sites(), 0);
  int n = 0;
  for (std::size_t j = 0; j < basis.sites(); ++j)
    if (on_sublattice(j, s)) {
      occ[j] = 1;
      ++n;
    }
  aqsim::detail::require(basis.particles() == n,
                         "CDW state needs one particle per sublattice site (" + std::to_string(n) + ")");
  return StateVector::basis_state(basis.dim(), *basis.index_of(occ));
}

/// <n_j> from basis-state probabilities.
inline std::vector<double> site_occupations(const RVector& probabilities, const FockBasis& basis) {
  std::vector<double> n(basis.sites(), 0.0);
  for (std::size_t s = 0; s < basis.dim(); ++s) {
    const double p = probabilities(static_cast<Eigen::Index>(s));
    if (p == 0.0) continue;
    const Occupation& occ = basis.state(s);
    for (std::size_t j = 0; j < occ.size(); ++j) n[j] += p * occ[j];
  }
  return n;
}

struct ZetaFit {
  bool ok = false;
  double zeta = 0.0;
  double ci95 = 0.0;  // half-width
  std::size_t points = 0;
  std::string note;
};

struct FitWindow {
  double t_min = 1.0;
  double t_max = 10.0;
};

/// Fits ln I = a - zeta (ln t)^2 over the window; non-positive I are dropped.
inline ZetaFit fit_zeta(std::span<const double> times, std::span<const double> values, FitWindow w) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < w.t_min || times[k] > w.t_max || times[k] <= 0.0 || values[k] <= 0.0) continue;
    const double lt = std::log(times[k]);
    x.push_back(lt * lt);
    y.push_back(std::log(values[k]));
  }
  ZetaFit f;
  f.points = x.size();
  if (x.size() < 3) {
    f.note = "fewer than 3 positive points in the fit window";
    return f;
  }
  try {
    const LineFit lf = fit_line(x, y);
    f.ok = true;
    f.zeta = -lf.slope;
    f.ci95 = 1.96 * lf.slope_error;
  } catch (const Error& e) {
    f.note = e.what();
  }
  return f;
}

struct QuenchResult {
  std::vector<double> times;
  std::vector<std::vector<double>> imbalance;      // [realization][time], relative to initial sublattice
  std::vector<std::vector<double>> raw_imbalance;  // [realization][time], (N_e - N_o)/N
  std::vector<double> mean;
  std::vector<double> error;
  std::vector<double> late_time;  // per realization, mean over t >= t_end / 2
  MeanError plateau;
  ZetaFit zeta;

  std::size_t realizations() const { return imbalance.size(); }
};

namespace detail {

inline double late_average(std::span<const double> times, std::span<const double> series) {
  const double half = 0.5 * times.back();
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] >= half) {
      s += series[k];
      ++n;
    }
  return n ? s / static_cast<double>(n) : series.back();
}

inline void check_quench_times(std::span<const double> times) {
  aqsim::detail::require(!times.empty() && times.front() == 0.0, "quench times must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    aqsim::detail::require(times[k] > times[k - 1], "quench times must increase");
}

struct SingleQuench {
  std::vector<double> imbalance, raw;
};

inline SingleQuench quench_series(const Operator& h, const FockBasis& basis, std::span<const double> times,
                                  Sublattice s) {
  const StateVector psi0 = initial_cdw_state(basis, s);
  const UnitaryPropagator u(h);
  SingleQuench out;
  for (double t : times) {
    const CVector psi = u.propagate(psi0.amplitudes(), t);
    const auto n = site_occupations(psi.cwiseAbs2(), basis);
    out.imbalance.push_back(imbalance(std::span<const double>(n), s));
    out.raw.push_back(raw_imbalance(std::span<const double>(n)));
  }
  return out;
}

inline void aggregate(QuenchResult& r, FitWindow window) {
  const std::size_t nt = r.times.size();
  r.mean.assign(nt, 0.0);
  r.error.assign(nt, 0.0);
  std::vector<double> col(r.imbalance.size());
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t q = 0; q < r.imbalance.size(); ++q) col[q] = r.imbalance[q][k];
    const MeanError me = mean_and_error(col);
    r.mean[k] = me.mean;
    r.error[k] = me.error;
  }
  r.late_time.clear();
  for (const auto& s : r.imbalance) r.late_time.push_back(late_average(r.times, s));
  r.plateau = mean_and_error(r.late_time);
  r.zeta = fit_zeta(r.times, r.mean, window);
}

}  // namespace detail

/// Single-realization quench from the CDW state under H.
inline QuenchResult run_quench(const Operator& h, const FockBasis& basis, std::span<const double> times,
                               Sublattice s, FitWindow window = {}) {
  detail::check_quench_times(times);
  aqsim::detail::require<DimensionMismatch>(h.dim() == basis.dim(), "Hamiltonian/basis mismatch");
  QuenchResult r;
  r.times.assign(times.begin(), times.end());
  auto q = detail::quench_series(h, basis, times, s);
  r.imbalance.push_back(std::move(q.imbalance));
  r.raw_imbalance.push_back(std::move(q.raw));
  detail::aggregate(r, window);
  return r;
}

/// Disorder-averaged quench; realization r uses make_disorder(spec, L, r) added to params.mu.
inline QuenchResult run_disordered_quench(const HubbardParams& params, const DisorderSpec& disorder,
                                          std::span<const double> times, Sublattice s,
                                          FitWindow window = {}, std::size_t jobs = 1) {
  detail::check_quench_times(times);
  aqsim::detail::require(disorder.realizations >= 1, "need at least one disorder realization");
  const FockBasis basis = build_fock_basis(params.L, params.particles, params.max_occupancy);
  std::vector<detail::SingleQuench> runs(disorder.realizations);
  parallel_for(runs.size(), jobs, [&](std::size_t r) {
    HubbardParams p = params;
    auto mu = make_disorder(disorder, p.L, r);
    if (!p.mu.empty())
      for (std::size_t j = 0; j < p.L; ++j) mu[j] += p.mu[j];
    p.mu = std::move(mu);
    runs[r] = detail::quench_series(build_bose_hubbard(p, basis), basis, times, s);
  });
  QuenchResult res;
  res.times.assign(times.begin(), times.end());
  for (auto& q : runs) {
    res.imbalance.push_back(std::move(q.imbalance));
    res.raw_imbalance.push_back(std::move(q.raw));
  }
  detail::aggregate(res, window);
  return res;
}

struct MblScanRow {
  double delta = 0.0;
  MeanError plateau;
  ZetaFit zeta;
  std::size_t realizations = 0;
};

struct MblScan {
  std::vector<MblScanRow> rows;
  std::vector<QuenchResult> runs;
  bool monotone_nondecreasing = true;  // observed, not assumed
};

inline MblScan mbl_scan(const HubbardParams& params, const DisorderSpec& disorder_template,
                        std::span<const double> deltas, std::span<const double> times, Sublattice s,
                        FitWindow window = {}, std::size_t jobs = 1) {
  aqsim::detail::require(deltas.size() >= 1, "mbl_scan needs at least one disorder strength");
  MblScan out;
  for (double d : deltas) {
    DisorderSpec spec = disorder_template;
    spec.delta = d;
    QuenchResult q = run_disordered_quench(params, spec, times, s, window, jobs);
    out.rows.push_back({d, q.plateau, q.zeta, q.realizations()});
    out.runs.push_back(std::move(q));
  }
  for (std::size_t k = 1; k < out.rows.size(); ++k)
    if (out.rows[k].plateau.mean < out.rows[k - 1].plateau.mean) out.monotone_nondecreasing = false;
  return out;
}

/// Translation-averaged connected correlator <n_j n_{j+d}> - <n_j><n_{j+d}>.
inline double density_correlations(const RVector& probabilities, const FockBasis& basis, std::size_t d) {
  aqsim::detail::require(d < basis.sites(), "correlation distance must be below L");
  aqsim::detail::require<DimensionMismatch>(static_cast<std::size_t>(probabilities.size()) == basis.dim(),
                                            "state/basis dimension mismatch");
  const auto n = site_occupations(probabilities, basis);
  const std::size_t pairs = basis.sites() - d;
  double total = 0.0;
  for (std::size_t j = 0; j < pairs; ++j) {
    double nn = 0.0;
    for (std::size_t s = 0; s < basis.dim(); ++s) {
      const Occupation& occ = basis.state(s);
      nn += probabilities(static_cast<Eigen::Index>(s)) * occ[j] * occ[j + d];
    }
    total += nn - n[j] * n[j + d];
  }
  return total / static_cast<double>(pairs);
}

inline double density_correlations(const StateVector& psi, const FockBasis& basis, std::size_t d) {
  return density_correlations(psi.probabilities(), basis, d);
}

inline double density_correlations(const DensityMatrix& rho, const FockBasis& basis, std::size_t d) {
  return density_correlations(rho.populations(), basis, d);
}

}  // namespace aqsim::hubbard
