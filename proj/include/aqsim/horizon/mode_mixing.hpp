#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/parallel.hpp"
#include "aqsim/core/types.hpp"
#include "aqsim/horizon/metric.hpp"

namespace aqsim::horizon {

/// Gaussian packet on the positive-norm, right-moving branch of the left
/// asymptotic region.
struct WavePacket {
  double omega0 = 0.2;
  double width = 25.0;  // spatial sigma
  double center = -200.0;
};

struct ModeMixingSettings {
  double cfl = 0.3;  // dt = cfl h / (max|v| + 2 max c)
  double duration = 0.0;  // <= 0: transit time of the transmitted packet to the middle of the right region
  double sponge_fraction = 0.05;
  double sponge_strength = 1.0;
  double analysis_gap = 20.0;  // half-width excluded around the grid centre
  double taper = 20.0;
  int zero_pad = 64;  // FFT length >= zero_pad x region points, shared by all regions
  int bins = 10;
  double bin_half_width = 2.5;  // in units of 1 / width
  double norm_tolerance = 1e-3;
  double flat_tolerance = 1e-6;  // max |dv/dx|, |dc/dx| over the outer 10%
  int drift_every = 10;
  int startup_substeps = 10;
};

struct ModeMixingResult {
  std::vector<double> omega;     // bin centres
  std::vector<double> alpha;     // |alpha(omega)|
  std::vector<double> beta;      // |beta(omega)|
  std::vector<double> residual;  // | |alpha|^2 - |beta|^2 - 1 |
  std::vector<double> incident;  // incident KG weight per bin
  std::vector<bool> accepted;
  std::size_t rejected = 0;
  double max_beta = 0.0;  // over accepted rows
  double max_residual = 0.0;
  double kg_drift = 0.0;  // max |<Y^n, (Y^{n+1} + Y^{n-1})/2> - 1|
  double final_norm = 0.0;
  double duration = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  double h = 0.0;
  std::optional<TemperatureFit> thermal;  // |beta|^2 rows, reported only
  WavePacket packet;
  ModeMixingSettings settings;
};

namespace mm_detail {

using CVec = std::vector<Complex>;

struct Field {
  CVec phi, pi;
};

/// phi' = pi - v D phi,  pi' = -D(v pi) - D+^T c^2 D+ phi, Dirichlet ends.
struct WaveOperator {
  std::vector<double> v, cb2;  // cb2 has N + 1 bond entries
  double h = 1.0;

  void apply(const Field& y, Field& dy) const {
    const std::size_t n = v.size();
    dy.phi.resize(n);
    dy.pi.resize(n);
    auto at = [n](const CVec& a, std::ptrdiff_t i) {
      return (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) ? Complex(0.0) : a[static_cast<std::size_t>(i)];
    };
    auto vpi = [&](std::ptrdiff_t i) {
      return (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) ? Complex(0.0) : v[static_cast<std::size_t>(i)] * y.pi[static_cast<std::size_t>(i)];
    };
    const double inv2h = 0.5 / h, invh2 = 1.0 / (h * h);
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<std::ptrdiff_t>(k);
      const Complex dphi = (at(y.phi, i + 1) - at(y.phi, i - 1)) * inv2h;
      dy.phi[k] = y.pi[k] - v[k] * dphi;
      const Complex lap =
          (cb2[k + 1] * (at(y.phi, i + 1) - y.phi[k]) - cb2[k] * (y.phi[k] - at(y.phi, i - 1))) * invh2;
      dy.pi[k] = -(vpi(i + 1) - vpi(i - 1)) * inv2h + lap;
    }
  }
};

inline Complex kg_product(const Field& a, const Field& b, double h) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.phi.size(); ++i) s += std::conj(a.phi[i]) * b.pi[i] - std::conj(a.pi[i]) * b.phi[i];
  return kI * h * s;
}

inline double lattice_k(double k, double h) { return std::sin(k * h) / h; }
inline double lattice_q(double k, double h) { return 2.0 * std::abs(std::sin(0.5 * k * h)) / h; }

/// Angular wavenumbers of an n-point FFT with spacing h.
inline std::vector<double> fft_wavenumbers(std::size_t n, double h) {
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<double>(i < (n + 1) / 2 ? static_cast<std::ptrdiff_t>(i)
                                                         : static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(n));
    k[i] = 2.0 * std::numbers::pi * j / (static_cast<double>(n) * h);
  }
  return k;
}

struct Projection {
  std::vector<double> pos, neg;  // KG weight per frequency bin
};

/// Positive / negative norm content of the field in [lo, hi), binned in the
/// conserved frequency omega = v0 K +- c0 Q by exact interval overlap.
inline Projection project(const Field& y, const std::vector<double>& x, double h, double lo, double hi,
                          double taper, double v0, double c0, std::size_t n, const std::vector<double>& edges) {
  std::vector<Complex> phi, pi;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] >= hi) continue;
    const double a = std::clamp((x[i] - lo) / taper, 0.0, 1.0);
    const double b = std::clamp((hi - x[i]) / taper, 0.0, 1.0);
    const double w = std::pow(std::sin(0.5 * std::numbers::pi * a), 2) * std::pow(std::sin(0.5 * std::numbers::pi * b), 2);
    phi.push_back(y.phi[i] * w);
    pi.push_back(y.pi[i] * w);
  }
  detail::require<PhysicsGuardError>(phi.size() >= 8 && phi.size() <= n, "analysis region holds too few grid points");
  phi.resize(n, 0.0);
  pi.resize(n, 0.0);
  Eigen::FFT<double> fft;
  std::vector<Complex> F, P;
  fft.fwd(F, phi);
  fft.fwd(P, pi);
  const std::vector<double> ks = fft_wavenumbers(n, h);
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * h);
  const std::size_t nb = edges.size() - 1;
  Projection out{std::vector<double>(nb, 0.0), std::vector<double>(nb, 0.0)};
  auto omega = [&](double k, double sgn) { return v0 * lattice_k(k, h) + sgn * c0 * lattice_q(k, h); };
  auto deposit = [&](std::vector<double>& bins, double w1, double w2, double weight) {
    const double a = std::min(w1, w2), b = std::max(w1, w2);
    if (!(weight > 0.0) || b <= edges.front() || a >= edges.back()) return;
    const double width = std::max(b - a, 1e-300);
    for (std::size_t j = 0; j < nb; ++j) {
      const double ov = std::min(b, edges[j + 1]) - std::max(a, edges[j]);
      if (ov > 0.0) bins[j] += weight * ov / width;
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double om = c0 * lattice_q(ks[i], h);
    if (om <= 0.0) continue;
    const Complex ap = 0.5 * (F[i] + kI * P[i] / om);
    const Complex am = 0.5 * (F[i] - kI * P[i] / om);
    const double scale = 2.0 * om * h / static_cast<double>(n);
    deposit(out.pos, omega(ks[i] - dk / 2, 1.0), omega(ks[i] + dk / 2, 1.0), scale * std::norm(ap));
    deposit(out.neg, omega(ks[i] - dk / 2, -1.0), omega(ks[i] + dk / 2, -1.0), scale * std::norm(am));
  }
  return out;
}

inline bool flat_tail(const std::vector<double>& x, const std::vector<double>& f, double tol) {
  const std::size_t n = x.size();
  const std::size_t m = std::max<std::size_t>(2, n / 10);
  for (std::size_t i = 0; i + 1 < m; ++i)
    if (std::abs((f[i + 1] - f[i]) / (x[i + 1] - x[i])) > tol) return false;
  for (std::size_t i = n - m; i + 1 < n; ++i)
    if (std::abs((f[i + 1] - f[i]) / (x[i + 1] - x[i])) > tol) return false;
  return true;
}

}  // namespace mm_detail

/// Scatters a positive-norm packet off the profile and reads the outgoing
/// positive / negative norm content in both asymptotic regions.
inline ModeMixingResult mode_mixing_sim(const FlowProfile& p, const WavePacket& packet,
                                        const ModeMixingSettings& s = {}) {
  using namespace mm_detail;
  p.validate();
  detail::require(p.kind == ProfileKind::kAcoustic, "mode mixing runs on acoustic profiles");
  const std::size_t n = p.size();
  const double h = (p.x.back() - p.x.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    detail::require(std::abs(p.x[i] - p.x[i - 1] - h) <= 1e-9 * h, "mode mixing needs a uniform grid");
  if (!(s.cfl > 0.0 && s.cfl < 1.0))
    throw PhysicsGuardError("CFL number must lie in (0, 1) for the leapfrog scheme");
  if (!flat_tail(p.x, p.v, s.flat_tolerance) || !flat_tail(p.x, p.c, s.flat_tolerance))
    throw PhysicsGuardError("profile is not asymptotically flat over the outer 10% of the grid");
  detail::require(packet.omega0 > 0.0 && packet.width > 0.0, "packet needs omega0 > 0 and width > 0");
  detail::require(s.bins >= 1 && s.zero_pad >= 1 && s.taper > 0.0, "bad mode-mixing settings");

  const double x_lo = p.x.front(), x_hi = p.x.back() + h;
  const double span_len = x_hi - x_lo, mid = 0.5 * (x_lo + x_hi);
  const double sw = s.sponge_fraction * span_len;
  const double left_lo = x_lo + sw, left_hi = mid - s.analysis_gap;
  const double right_lo = mid + s.analysis_gap, right_hi = x_hi - sw;
  detail::require(packet.center > left_lo && packet.center < left_hi, "packet must start in the left analysis region");

  const double v0 = p.v.front(), c0 = p.c.front();
  const double v1 = p.v.back(), c1 = p.c.back();
  detail::require(v0 + c0 > 0.0, "incident branch must move towards the profile");

  // k0 on the positive branch, omega = v0 K + c0 Q, monotone on (0, pi/(2h))
  auto branch = [&](double k) { return v0 * lattice_k(k, h) + c0 * lattice_q(k, h); };
  double klo = 0.0, khi = 0.5 * std::numbers::pi / h;
  detail::require(branch(khi) > packet.omega0 && v0 + c0 * std::cos(0.25 * std::numbers::pi) > -1e-12,
                  "packet frequency not representable on the grid");
  for (int it = 0; it < 200 && khi - klo > 1e-15 * khi; ++it) {
    const double km = 0.5 * (klo + khi);
    (branch(km) < packet.omega0 ? klo : khi) = km;
  }
  const double k0 = 0.5 * (klo + khi);

  Field y;
  {
    const std::vector<double> ks = fft_wavenumbers(n, h);
    std::vector<Complex> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double dk = ks[i] - k0;
      a[i] = std::exp(-dk * dk * packet.width * packet.width / 2.0) *
             std::exp(Complex(0.0, -ks[i] * (packet.center - p.x.front())));
      b[i] = -kI * c0 * lattice_q(ks[i], h) * a[i];
    }
    Eigen::FFT<double> fft;
    fft.inv(y.phi, a);
    fft.inv(y.pi, b);
    const double norm = kg_product(y, y, h).real();
    detail::require<PhysicsGuardError>(norm > 0.0, "packet has no positive norm");
    const double inv = 1.0 / std::sqrt(norm);
    for (auto& z : y.phi) z *= inv;
    for (auto& z : y.pi) z *= inv;
  }

  ModeMixingResult r;
  r.packet = packet;
  r.settings = s;
  r.h = h;
  std::vector<double> edges(static_cast<std::size_t>(s.bins) + 1);
  const double half = s.bin_half_width / packet.width;
  for (int j = 0; j <= s.bins; ++j)
    edges[static_cast<std::size_t>(j)] = packet.omega0 - half + 2.0 * half * j / s.bins;

  std::size_t region_points = 0, nfft = 1;
  for (double xi : p.x) region_points += (xi >= left_lo && xi < left_hi) ? 1 : 0;
  {
    std::size_t rp = 0;
    for (double xi : p.x) rp += (xi >= right_lo && xi < right_hi) ? 1 : 0;
    region_points = std::max(region_points, rp);
  }
  while (nfft < region_points * static_cast<std::size_t>(s.zero_pad)) nfft *= 2;
  const Projection inc = project(y, p.x, h, left_lo, left_hi, s.taper, v0, c0, nfft, edges);

  WaveOperator A;
  A.h = h;
  A.v = p.v;
  A.cb2.resize(n + 1);
  A.cb2[0] = p.c.front() * p.c.front();
  A.cb2[n] = p.c.back() * p.c.back();
  for (std::size_t i = 1; i < n; ++i) A.cb2[i] = std::pow(0.5 * (p.c[i - 1] + p.c[i]), 2);

  std::vector<double> sponge(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::clamp((std::abs(p.x[i] - mid) - (0.5 * span_len - sw)) / sw, 0.0, 1.0);
    sponge[i] = s.sponge_strength * d * d;
  }

  double vmax = 0.0, cmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vmax = std::max(vmax, std::abs(p.v[i]));
    cmax = std::max(cmax, p.c[i]);
  }
  double duration = s.duration;
  if (duration <= 0.0) {
    detail::require(v1 + c1 > 0.0, "transmitted branch must leave to the right");
    duration = (mid - packet.center) / (v0 + c0) + (0.5 * (right_lo + right_hi) - mid) / (v1 + c1);
  }
  const double dt_target = s.cfl * h / (vmax + 2.0 * cmax);
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt_target));
  const double dt = duration / static_cast<double>(steps);
  r.duration = duration;
  r.dt = dt;
  r.steps = steps;

  auto axpy = [](const Field& a, double c, const Field& b) {
    Field o = a;
    for (std::size_t i = 0; i < a.phi.size(); ++i) {
      o.phi[i] += c * b.phi[i];
      o.pi[i] += c * b.pi[i];
    }
    return o;
  };
  // startup level by RK4 substeps, then leapfrog with a semi-implicit sponge
  Field prev = y, cur = y, k1, k2, k3, k4;
  {
    const double d = dt / s.startup_substeps;
    for (int m = 0; m < s.startup_substeps; ++m) {
      A.apply(cur, k1);
      A.apply(axpy(cur, d / 2, k1), k2);
      A.apply(axpy(cur, d / 2, k2), k3);
      A.apply(axpy(cur, d, k3), k4);
      for (std::size_t i = 0; i < n; ++i) {
        cur.phi[i] += d / 6 * (k1.phi[i] + 2.0 * k2.phi[i] + 2.0 * k3.phi[i] + k4.phi[i]);
        cur.pi[i] += d / 6 * (k1.pi[i] + 2.0 * k2.pi[i] + 2.0 * k3.pi[i] + k4.pi[i]);
      }
    }
  }
  Field next, ay;
  for (std::size_t step = 1; step < steps; ++step) {
    A.apply(cur, ay);
    next.phi.resize(n);
    next.pi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double damp = dt * sponge[i];
      next.phi[i] = ((1.0 - damp) * prev.phi[i] + 2.0 * dt * ay.phi[i]) / (1.0 + damp);
      next.pi[i] = ((1.0 - damp) * prev.pi[i] + 2.0 * dt * ay.pi[i]) / (1.0 + damp);
    }
    if (step % static_cast<std::size_t>(s.drift_every) == 0) {
      Field avg = prev;
      for (std::size_t i = 0; i < n; ++i) {
        avg.phi[i] = 0.5 * (next.phi[i] + prev.phi[i]);
        avg.pi[i] = 0.5 * (next.pi[i] + prev.pi[i]);
      }
      r.kg_drift = std::max(r.kg_drift, std::abs(kg_product(cur, avg, h).real() - 1.0));
    }
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  r.final_norm = kg_product(cur, cur, h).real();

  const Projection left = project(cur, p.x, h, left_lo, left_hi, s.taper, v0, c0, nfft, edges);
  const Projection right = project(cur, p.x, h, right_lo, right_hi, s.taper, v1, c1, nfft, edges);

  std::vector<double> w_acc, n_acc;
  for (std::size_t j = 0; j < static_cast<std::size_t>(s.bins); ++j) {
    const double wc = 0.5 * (edges[j] + edges[j + 1]);
    const double in = inc.pos[j];
    const double a2 = (left.pos[j] + right.pos[j]) / in;
    const double b2 = (left.neg[j] + right.neg[j]) / in;
    const double res = std::abs(a2 - b2 - 1.0);
    const bool ok = in > 0.0 && std::isfinite(res) && res <= s.norm_tolerance;
    r.omega.push_back(wc);
    r.incident.push_back(in);
    r.alpha.push_back(std::sqrt(std::max(a2, 0.0)));
    r.beta.push_back(std::sqrt(std::max(b2, 0.0)));
    r.residual.push_back(res);
    r.accepted.push_back(ok);
    if (!ok) {
      ++r.rejected;
      continue;
    }
    r.max_beta = std::max(r.max_beta, r.beta.back());
    r.max_residual = std::max(r.max_residual, res);
    w_acc.push_back(wc);
    n_acc.push_back(b2);
  }
  if (w_acc.size() >= 2) r.thermal = fit_temperature(w_acc, n_acc);
  return r;
}

/// Independent packets run in parallel; results in input order.
inline std::vector<ModeMixingResult> mode_mixing_scan(const FlowProfile& p, std::span<const WavePacket> packets,
                                                      const ModeMixingSettings& s = {}, std::size_t jobs = 1) {
  std::vector<ModeMixingResult> out(packets.size());
  parallel_for(packets.size(), jobs, [&](std::size_t i) { out[i] = mode_mixing_sim(p, packets[i], s); });
  return out;
}

/// Standard test backgrounds on [-L/2, L/2) with c = 1.
inline FlowProfile tanh_profile(double v_mid, double amplitude, double width, std::size_t n = 4000,
                                double length = 800.0) {
  return FlowProfile::sample(
      -0.5 * length, 0.5 * length, n, [=](double x) { return v_mid + amplitude * std::tanh(x / width); },
      [](double) { return 1.0; });
}

}  // namespace aqsim::horizon
