#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/rng.hpp"
#include "aqsim/ising/model.hpp"

namespace aqsim::ising {

/// Single-spin-flip Metropolis chain with a random site per proposal.
class MetropolisChain {
 public:
  MetropolisChain(const IsingModel& m, std::uint64_t seed, std::optional<Spins> initial = std::nullopt)
      : model_(&m), rng_(make_stream(seed, 0)) {
    if (initial) {
      check_spins(m, *initial);
      spins_ = *initial;
    } else {
      spins_.resize(m.size());
      for (auto& s : spins_) s = uniform01(rng_) < 0.5 ? 1 : -1;
    }
    energy_ = ising_energy_unchecked(m, spins_);
  }

  const Spins& spins() const { return spins_; }
  double energy() const { return energy_; }
  Rng& rng() { return rng_; }

  /// One proposal; returns true when accepted.
  bool step(double beta) {
    const auto n = spins_.size();
    const auto i = static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(n));
    const double de = flip_delta(*model_, spins_, i);
    const double u = uniform01(rng_);
    if (de <= 0.0 || u < std::exp(-beta * de)) {
      spins_[i] = -spins_[i];
      energy_ += de;
      return true;
    }
    return false;
  }

  /// n proposals; returns the number accepted.
  std::size_t sweep(double beta) {
    std::size_t acc = 0;
    for (std::size_t k = 0; k < spins_.size(); ++k) acc += step(beta) ? 1 : 0;
    return acc;
  }

  /// Applies a multi-spin move with Metropolis acceptance.
  bool try_flip_set(double beta, std::span<const std::size_t> set) {
    double de = 0.0;
    for (std::size_t k = 0; k < set.size(); ++k) {
      de += flip_delta(*model_, spins_, set[k]);
      spins_[set[k]] = -spins_[set[k]];
    }
    const double u = uniform01(rng_);
    if (de <= 0.0 || u < std::exp(-beta * de)) {
      energy_ += de;
      return true;
    }
    for (std::size_t k = set.size(); k-- > 0;) spins_[set[k]] = -spins_[set[k]];
    return false;
  }

  /// Recomputes the energy from scratch (clears accumulated rounding).
  void resync() { energy_ = ising_energy_unchecked(*model_, spins_); }

 private:
  const IsingModel* model_;
  Rng rng_;
  Spins spins_;
  double energy_ = 0.0;
};

struct MetropolisRun {
  std::vector<double> energy;         // after each sweep
  std::vector<double> magnetization;  // mean spin after each sweep
  Spins final_state;
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  double acceptance_rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

inline MetropolisRun metropolis_sample(const IsingModel& m, double beta, std::size_t sweeps, std::uint64_t seed,
                                       std::optional<Spins> initial = std::nullopt) {
  detail::require(sweeps >= 1, "metropolis needs at least one sweep");
  detail::require(beta >= 0.0, "beta must be >= 0");
  detail::require(m.size() >= 1, "model has no spins");
  MetropolisChain chain(m, seed, std::move(initial));
  MetropolisRun r;
  r.energy.reserve(sweeps);
  r.magnetization.reserve(sweeps);
  for (std::size_t k = 0; k < sweeps; ++k) {
    r.accepted += chain.sweep(beta);
    r.proposed += m.size();
    r.energy.push_back(chain.energy());
    const auto& s = chain.spins();
    r.magnetization.push_back(static_cast<double>(std::accumulate(s.begin(), s.end(), 0)) / static_cast<double>(s.size()));
  }
  r.final_state = chain.spins();
  return r;
}

/// 0 = beta_0 < ... < beta_r = beta with beta_k = beta (q^k - 1) / (q^r - 1).
/// Levels: the smallest r with max_k (beta_k - beta_{k-1}) * energy_scale <= step_budget.
inline std::vector<double> geometric_ladder(double beta, double energy_scale, double q = 1.15,
                                            double step_budget = 1.0, std::size_t max_levels = 10000) {
  detail::require(beta >= 0.0 && std::isfinite(beta), "beta must be finite and >= 0");
  detail::require(q >= 1.0 && step_budget > 0.0, "ladder needs q >= 1 and a positive step budget");
  if (beta == 0.0) return {0.0};
  auto build = [&](std::size_t r) {
    std::vector<double> b(r + 1);
    for (std::size_t k = 0; k <= r; ++k)
      b[k] = q == 1.0 ? beta * static_cast<double>(k) / static_cast<double>(r)
                      : beta * (std::pow(q, static_cast<double>(k)) - 1.0) / (std::pow(q, static_cast<double>(r)) - 1.0);
    b.back() = beta;
    return b;
  };
  for (std::size_t r = 1; r <= max_levels; ++r) {
    auto b = build(r);
    double widest = 0.0;
    for (std::size_t k = 1; k < b.size(); ++k) widest = std::max(widest, b[k] - b[k - 1]);
    if (widest * energy_scale <= step_budget) return b;
  }
  return build(max_levels);
}

struct EstimatorOptions {
  std::optional<std::vector<double>> ladder;  // default: geometric_ladder
  double ladder_q = 1.15;
  double step_budget = 1.0;
  std::size_t samples = 2000;  // per ratio, equal allocation
  std::size_t burn_in = 50;    // sweeps at each level before sampling
  std::size_t thin = 2;        // sweeps between samples
  std::uint64_t seed = 1;
};

struct PartitionEstimate {
  double z = 0.0;
  double log_z = 0.0;
  double relative_error = 0.0;  // delta method, independent samples assumed
  std::vector<double> ladder;
  std::vector<double> log_ratios;
  std::vector<double> ratio_relative_errors;
  bool ferromagnetic = true;
  std::vector<std::string> warnings;
};

/// Z(beta) = 2^n prod_k Z(beta_k)/Z(beta_{k-1}); each ratio is the sample mean
/// of exp(-(beta_k - beta_{k-1}) H) under Metropolis at beta_{k-1}.
inline PartitionEstimate estimate_partition(const IsingModel& m, double beta, const EstimatorOptions& opt = {}) {
  detail::require(m.size() >= 1, "model has no spins");
  detail::require(opt.samples >= 2 && opt.thin >= 1, "estimator needs >= 2 samples and thin >= 1");
  PartitionEstimate r;
  r.ferromagnetic = m.is_ferromagnetic();
  if (!r.ferromagnetic)
    r.warnings.emplace_back("couplings of mixed sign: the estimator runs but its efficiency guarantee does not hold");
  r.ladder = opt.ladder ? *opt.ladder : geometric_ladder(beta, m.energy_scale(), opt.ladder_q, opt.step_budget);
  detail::require(!r.ladder.empty() && r.ladder.front() == 0.0, "ladder must start at beta = 0");
  for (std::size_t k = 1; k < r.ladder.size(); ++k)
    detail::require(r.ladder[k] > r.ladder[k - 1], "ladder must be strictly increasing");
  detail::require(r.ladder.back() == beta, "ladder must end at the target beta");

  const auto n = static_cast<int>(m.size());
  r.z = std::ldexp(1.0, n);
  r.log_z = static_cast<double>(n) * std::log(2.0);
  if (r.ladder.size() == 1) return r;

  MetropolisChain chain(m, opt.seed);
  std::vector<double> w(opt.samples);
  double var_sum = 0.0;
  for (std::size_t k = 1; k < r.ladder.size(); ++k) {
    const double b = r.ladder[k - 1], db = r.ladder[k] - b;
    for (std::size_t s = 0; s < opt.burn_in; ++s) chain.sweep(b);
    chain.resync();
    double emin = std::numeric_limits<double>::infinity();
    std::vector<double> es(opt.samples);
    for (std::size_t s = 0; s < opt.samples; ++s) {
      for (std::size_t t = 0; t < opt.thin; ++t) chain.sweep(b);
      es[s] = chain.energy();
      emin = std::min(emin, es[s]);
    }
    // log mean exp(-db H), shifted by the largest exponent
    double mean = 0.0;
    for (std::size_t s = 0; s < opt.samples; ++s) {
      w[s] = std::exp(-db * (es[s] - emin));
      mean += w[s];
    }
    mean /= static_cast<double>(opt.samples);
    double var = 0.0;
    for (double x : w) var += (x - mean) * (x - mean);
    var /= static_cast<double>(opt.samples - 1);
    const double rel = std::sqrt(var / static_cast<double>(opt.samples)) / mean;
    const double log_ratio = -db * emin + std::log(mean);
    r.log_ratios.push_back(log_ratio);
    r.ratio_relative_errors.push_back(rel);
    r.log_z += log_ratio;
    var_sum += rel * rel;
  }
  r.z = std::exp(r.log_z);
  r.relative_error = std::sqrt(var_sum);
  return r;
}

struct AnnealSchedule {
  std::vector<double> betas;  // non-decreasing
  std::size_t sweeps_per_level = 1;
  std::uint64_t seed = 1;

  void validate() const {
    detail::require(!betas.empty(), "anneal schedule needs at least one level");
    detail::require(sweeps_per_level >= 1, "sweeps per level must be >= 1");
    for (std::size_t k = 0; k < betas.size(); ++k) {
      detail::require(std::isfinite(betas[k]) && betas[k] >= 0.0, "schedule betas must be finite and >= 0");
      if (k) detail::require(betas[k] >= betas[k - 1], "schedule betas must be non-decreasing");
    }
  }

  /// Geometric beta from beta_start to beta_end over `levels` levels.
  static AnnealSchedule geometric(double beta_start, double beta_end, std::size_t levels, std::size_t sweeps,
                                  std::uint64_t seed = 1) {
    detail::require(beta_start > 0.0 && beta_end >= beta_start && levels >= 1, "bad geometric schedule");
    AnnealSchedule s;
    s.sweeps_per_level = sweeps;
    s.seed = seed;
    for (std::size_t k = 0; k < levels; ++k) {
      const double f = levels == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(levels - 1);
      s.betas.push_back(beta_start * std::pow(beta_end / beta_start, f));
    }
    return s;
  }
};

struct AnnealResult {
  Spins best;
  double best_energy = 0.0;
  double initial_energy = 0.0;
  std::vector<double> trace;       // energy after each sweep
  std::vector<double> best_trace;  // best-so-far after each sweep
  Spins final_state;
};

/// Metropolis annealing over the schedule. Each sweep makes n single-spin
/// proposals plus one proposal from each move set (multi-spin flips, e.g.
/// feasibility-preserving exchanges of an encoded problem).
inline AnnealResult simulated_annealing(const IsingModel& m, const AnnealSchedule& sched,
                                        std::optional<Spins> initial = std::nullopt,
                                        std::span<const std::vector<std::size_t>> moves = {},
                                        std::size_t move_proposals_per_sweep = 0) {
  sched.validate();
  detail::require(m.size() >= 1, "model has no spins");
  for (const auto& mv : moves)
    for (std::size_t i : mv) detail::require(i < m.size(), "move references a spin outside the model");
  MetropolisChain chain(m, sched.seed, std::move(initial));
  AnnealResult r;
  r.initial_energy = chain.energy();
  r.best = chain.spins();
  r.best_energy = chain.energy();
  const std::size_t total = sched.betas.size() * sched.sweeps_per_level;
  r.trace.reserve(total);
  r.best_trace.reserve(total);
  const std::size_t extra = moves.empty() ? 0 : (move_proposals_per_sweep ? move_proposals_per_sweep : m.size());
  for (double beta : sched.betas) {
    for (std::size_t s = 0; s < sched.sweeps_per_level; ++s) {
      chain.sweep(beta);
      for (std::size_t k = 0; k < extra; ++k) {
        const auto pick = static_cast<std::size_t>(uniform01(chain.rng()) * static_cast<double>(moves.size()));
        chain.try_flip_set(beta, moves[pick]);
      }
      chain.resync();
      r.trace.push_back(chain.energy());
      if (chain.energy() < r.best_energy) {
        r.best_energy = chain.energy();
        r.best = chain.spins();
      }
      r.best_trace.push_back(r.best_energy);
    }
  }
  r.final_state = chain.spins();
  return r;
}

}  // namespace aqsim::ising
