#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/rng.hpp"

namespace aqsim::enaqt {

enum class NoiseKind { kMarkovian, kOrnsteinUhlenbeck };

/// Site-energy noise. Markovian noise is white with <de_m(t) de_m(t')> = gamma_m delta(t - t');
/// OU noise has variance sigma^2 and correlation time tau_c, so 2 sigma^2 tau_c plays the role of gamma.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kMarkovian;
  std::vector<double> gamma;  // per site, Markovian
  double sigma = 0.0;         // OU standard deviation (energy)
  double tau_c = 1.0;         // OU correlation time
  std::uint64_t seed = 0;

  static NoiseModel markovian(std::size_t sites, double g, std::uint64_t seed = 0) {
    NoiseModel m;
    m.gamma.assign(sites, g);
    m.seed = seed;
    return m;
  }

  static NoiseModel ornstein_uhlenbeck(double sigma, double tau_c, std::uint64_t seed = 0) {
    NoiseModel m;
    m.kind = NoiseKind::kOrnsteinUhlenbeck;
    m.sigma = sigma;
    m.tau_c = tau_c;
    m.seed = seed;
    return m;
  }

  /// OU noise with the same white-noise-limit dephasing rate gamma = 2 sigma^2 tau_c.
  static NoiseModel ou_equivalent(double gamma, double tau_c, std::uint64_t seed = 0) {
    return ornstein_uhlenbeck(std::sqrt(gamma / (2.0 * tau_c)), tau_c, seed);
  }

  double effective_gamma(std::size_t site) const {
    return kind == NoiseKind::kMarkovian ? gamma.at(site) : 2.0 * sigma * sigma * tau_c;
  }

  void validate(std::size_t sites) const {
    if (kind == NoiseKind::kMarkovian) {
      detail::require<DimensionMismatch>(gamma.size() == sites, "need one dephasing rate per site");
      for (double g : gamma) detail::require(g >= 0.0 && std::isfinite(g), "dephasing rates must be >= 0");
    } else {
      detail::require(sigma >= 0.0 && std::isfinite(sigma), "OU sigma must be >= 0");
      detail::require(tau_c > 0.0 && std::isfinite(tau_c), "OU correlation time must be > 0");
    }
  }
};

/// Exact joint update of an OU process x (stationary variance sigma^2, rate theta = 1/tau_c)
/// and its integral over one step h.
class OuStep {
 public:
  OuStep(double sigma, double tau_c, double h) {
    const double theta = 1.0 / tau_c;
    const double a = theta * h;
    const double s2 = sigma * sigma;
    decay_ = std::exp(-a);
    mean_int_ = -std::expm1(-a) / theta;
    var_x_ = -s2 * std::expm1(-2.0 * a);
    // 2a - 3 + 4 e^-a - e^-2a, cancellation-free for small a
    double f;
    if (a < 1e-3) {
      f = a * a * a * (2.0 / 3.0 - a / 2.0 + 7.0 / 30.0 * a * a - a * a * a / 12.0);
    } else {
      f = 2.0 * a - 3.0 + 4.0 * std::exp(-a) - std::exp(-2.0 * a);
    }
    const double var_i = s2 / (theta * theta) * f;
    const double cov = s2 / theta * std::expm1(-a) * std::expm1(-a);
    if (var_x_ > 0.0) {
      gain_ = cov / var_x_;
      cond_sd_ = std::sqrt(std::max(0.0, var_i - cov * cov / var_x_));
    }
    sd_x_ = std::sqrt(var_x_);
  }

  /// Advances x and returns the integral of x over the step.
  double advance(double& x, Rng& rng) const {
    const double mx = x * decay_;
    const double mi = x * mean_int_;
    const double xn = mx + sd_x_ * standard_normal(rng);
    const double in = mi + gain_ * (xn - mx) + cond_sd_ * standard_normal(rng);
    x = xn;
    return in;
  }

 private:
  double decay_ = 1.0, mean_int_ = 0.0, var_x_ = 0.0, sd_x_ = 0.0, gain_ = 0.0, cond_sd_ = 0.0;
};

}  // namespace aqsim::enaqt
