#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/stats.hpp"

namespace aqsim::horizon {

enum class ProfileKind { kAcoustic, kOptical };

inline std::string to_string(ProfileKind k) { return k == ProfileKind::kAcoustic ? "acoustic" : "optical"; }

/// 1+1D background. Acoustic: v is the flow speed, c the sound speed. Optical:
/// v is the constant pulse speed u, c the medium phase velocity v_p(x).
struct FlowProfile {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> c;
  ProfileKind kind = ProfileKind::kAcoustic;

  std::size_t size() const { return x.size(); }

  void validate() const {
    detail::require(x.size() >= 3, "profile needs at least three grid points");
    detail::require<DimensionMismatch>(v.size() == x.size() && c.size() == x.size(),
                                       "profile columns differ in length");
    for (std::size_t i = 0; i < x.size(); ++i) {
      detail::require(std::isfinite(x[i]) && std::isfinite(v[i]) && std::isfinite(c[i]),
                      "profile values must be finite");
      detail::require(c[i] > 0.0, "wave speed must be positive");
      if (i > 0) detail::require(x[i] > x[i - 1], "profile grid must be strictly increasing");
    }
    if (kind == ProfileKind::kOptical)
      for (double u : v) detail::require(u == v.front(), "optical profile needs a constant pulse speed");
  }

  template <class VFn, class CFn>
  static FlowProfile sample(double x0, double x1, std::size_t n, VFn vf, CFn cf,
                            ProfileKind kind = ProfileKind::kAcoustic) {
    detail::require(n >= 3 && x1 > x0, "bad sampling range");
    FlowProfile p;
    p.kind = kind;
    const double h = (x1 - x0) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x0 + h * static_cast<double>(i);
      p.x.push_back(xi);
      p.v.push_back(vf(xi));
      p.c.push_back(cf(xi));
    }
    p.validate();
    return p;
  }
};

/// 1+1D components on the profile grid.
struct EffectiveMetric {
  std::vector<double> x;
  std::vector<double> g00;
  std::vector<double> g01;
  std::vector<double> g11;
  ProfileKind kind = ProfileKind::kAcoustic;
  double flow_direction = 1.0;  // +1 if the medium moves towards +x in the frame of g
};

/// g00 = -(rho0/c)(c^2 - v^2), g01 = -(rho0/c) v, g11 = rho0/c with rho0 = 1.
inline EffectiveMetric acoustic_metric(const FlowProfile& p) {
  p.validate();
  detail::require(p.kind == ProfileKind::kAcoustic, "acoustic_metric needs an acoustic profile");
  EffectiveMetric m;
  m.kind = ProfileKind::kAcoustic;
  m.x = p.x;
  double vsum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double c = p.c[i], v = p.v[i];
    m.g00.push_back(-(c * c - v * v) / c);
    m.g01.push_back(-v / c);
    m.g11.push_back(1.0 / c);
    vsum += v;
  }
  m.flow_direction = vsum < 0.0 ? -1.0 : 1.0;
  return m;
}

/// 1 - u^2 / v_p^2.
inline std::vector<double> optical_g00(double u, std::span<const double> vp) {
  std::vector<double> g;
  g.reserve(vp.size());
  for (double c : vp) {
    detail::require(c > 0.0, "phase velocity must be positive");
    g.push_back(c == u ? 0.0 : 1.0 - (u * u) / (c * c));
  }
  return g;
}

/// Optical metric in the pulse frame; the medium streams against the pulse.
inline EffectiveMetric optical_metric(const FlowProfile& p) {
  p.validate();
  detail::require(p.kind == ProfileKind::kOptical, "optical_metric needs an optical profile");
  EffectiveMetric m;
  m.kind = ProfileKind::kOptical;
  m.x = p.x;
  m.g00 = optical_g00(p.v.front(), p.c);
  m.g01.assign(p.size(), 0.0);
  m.g11.assign(p.size(), -1.0);
  m.flow_direction = p.v.front() < 0.0 ? 1.0 : -1.0;
  return m;
}

inline EffectiveMetric effective_metric(const FlowProfile& p) {
  return p.kind == ProfileKind::kAcoustic ? acoustic_metric(p) : optical_metric(p);
}

enum class HorizonType { kBlackHole, kWhiteHole };

inline std::string to_string(HorizonType t) { return t == HorizonType::kBlackHole ? "black" : "white"; }

struct Horizon {
  double x = 0.0;
  HorizonType type = HorizonType::kBlackHole;
  std::size_t left = 0;  // grid index with g00 of one sign; left + 1 or left + 2 has the other
};

namespace metric_detail {

/// Positive where the medium outruns the waves.
inline double supercritical(const EffectiveMetric& m, std::size_t i) {
  return m.kind == ProfileKind::kAcoustic ? m.g00[i] : -m.g00[i];
}

inline int sgn(double a) { return (a > 0.0) - (a < 0.0); }

}  // namespace metric_detail

/// Sign changes of g00, refined by bisection on the linear interpolant. The
/// label is black when the flow crosses from sub- to supercritical.
inline std::vector<Horizon> find_horizons(const EffectiveMetric& m, double tol = 1e-10) {
  detail::require<DimensionMismatch>(m.g00.size() == m.x.size() && m.x.size() >= 2,
                                              "metric needs a grid");
  std::vector<Horizon> out;
  const std::size_t n = m.x.size();
  auto classify = [&](double f_lo, double f_hi) {
    const bool rising = f_hi > f_lo;
    return (rising == (m.flow_direction > 0.0)) ? HorizonType::kBlackHole : HorizonType::kWhiteHole;
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = m.g00[i], b = m.g00[i + 1];
    if (a == 0.0) continue;
    if (b == 0.0) {
      // horizon sitting on a grid point: only a crossing if the next value flips
      if (i + 2 < n && metric_detail::sgn(m.g00[i + 2]) == -metric_detail::sgn(a))
        out.push_back({m.x[i + 1], classify(metric_detail::supercritical(m, i), metric_detail::supercritical(m, i + 2)), i});
      continue;
    }
    if (metric_detail::sgn(a) == metric_detail::sgn(b)) continue;
    double lo = m.x[i], hi = m.x[i + 1];
    const double slope = (b - a) / (hi - lo);
    auto f = [&](double x) { return a + slope * (x - m.x[i]); };
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (metric_detail::sgn(f(mid)) == metric_detail::sgn(a))
        lo = mid;
      else
        hi = mid;
    }
    out.push_back({0.5 * (lo + hi), classify(metric_detail::supercritical(m, i), metric_detail::supercritical(m, i + 1)), i});
  }
  return out;
}

/// kappa = |d(c^2 - v^2)/dx| / (2c) at x_h. Node derivatives use centred
/// differences and are interpolated linearly to x_h.
inline double surface_gravity(const FlowProfile& p, double x_h) {
  p.validate();
  const std::size_t n = p.size();
  detail::require(x_h >= p.x.front() && x_h <= p.x.back(), "horizon not bracketed by the grid");
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = p.c[i] * p.c[i] - p.v[i] * p.v[i];
  auto deriv = [&](std::size_t i) {
    if (i == 0) return (f[1] - f[0]) / (p.x[1] - p.x[0]);
    if (i == n - 1) return (f[n - 1] - f[n - 2]) / (p.x[n - 1] - p.x[n - 2]);
    const double hm = p.x[i] - p.x[i - 1], hp = p.x[i + 1] - p.x[i];
    return (hm * hm * (f[i + 1] - f[i]) + hp * hp * (f[i] - f[i - 1])) / (hm * hp * (hm + hp));
  };
  std::size_t i = static_cast<std::size_t>(std::upper_bound(p.x.begin(), p.x.end(), x_h) - p.x.begin());
  i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
  const double w = (x_h - p.x[i]) / (p.x[i + 1] - p.x[i]);
  const double df = (1.0 - w) * deriv(i) + w * deriv(i + 1);
  const double c = (1.0 - w) * p.c[i] + w * p.c[i + 1];
  return std::abs(df) / (2.0 * c);
}

/// N(omega) = 1 / (exp(2 pi omega / kappa) - 1); omega = 0 gives +inf.
inline double hawking_occupation(double kappa, double omega) {
  detail::require(kappa > 0.0, "surface gravity must be positive");
  detail::require(omega >= 0.0, "frequency must be non-negative");
  if (omega == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::expm1(2.0 * std::numbers::pi * omega / kappa);
}

inline std::vector<double> hawking_spectrum(double kappa, std::span<const double> omegas) {
  std::vector<double> n;
  n.reserve(omegas.size());
  for (double w : omegas) n.push_back(hawking_occupation(kappa, w));
  return n;
}

struct TemperatureFit {
  double kappa = 0.0;  // +inf when the spectrum shows no frequency dependence
  double r_squared = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
  std::size_t dropped = 0;  // rows with N <= 0 or non-finite
  bool poor = true;
};

/// Linear fit of ln(1 + 1/N) against omega; slope = 2 pi / kappa.
inline TemperatureFit fit_temperature(std::span<const double> omegas, std::span<const double> occupations,
                                      double min_r_squared = 0.99) {
  detail::require<DimensionMismatch>(omegas.size() == occupations.size(),
                                              "frequency / occupation length mismatch");
  TemperatureFit out;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const double n = occupations[i];
    if (!(n > 0.0) || !std::isfinite(n) || !std::isfinite(omegas[i])) {
      ++out.dropped;
      continue;
    }
    xs.push_back(omegas[i]);
    ys.push_back(std::log1p(1.0 / n));
  }
  out.points = xs.size();
  if (xs.size() < 2) return out;
  const LineFit f = fit_line(xs, ys);
  out.r_squared = f.r_squared;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - f.intercept - f.slope * xs[i];
    ss += r * r;
  }
  out.rms_residual = std::sqrt(ss / static_cast<double>(xs.size()));
  const double rel_slope = std::abs(f.slope) * (xs.back() - xs.front());
  const bool flat = rel_slope <= 1e-9 * std::max(1.0, std::abs(f.intercept));
  out.kappa = (f.slope > 0.0 && !flat) ? 2.0 * std::numbers::pi / f.slope : std::numeric_limits<double>::infinity();
  out.poor = flat || f.slope <= 0.0 || xs.size() < 3 || f.r_squared < min_r_squared;
  return out;
}

/// CSV profile:
///   # kind=acoustic            (or kind=optical u=<pulse speed>)
///   # c=<constant wave speed>  (optional if a third column is present)
///   x,v[,c]                    acoustic rows
///   x,v_p                      optical rows
inline FlowProfile parse_profile_csv(std::istream& in) {
  FlowProfile p;
  std::optional<double> c_const, u;
  std::string line;
  int lineno = 0;
  bool kind_seen = false;
  auto fail = [&](const std::string& m) { throw ConfigError("profile line " + std::to_string(lineno) + ": " + m); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string k = tok.substr(0, eq), val = tok.substr(eq + 1);
        try {
          if (k == "kind") {
            kind_seen = true;
            if (val == "acoustic")
              p.kind = ProfileKind::kAcoustic;
            else if (val == "optical")
              p.kind = ProfileKind::kOptical;
            else
              fail("unknown kind '" + val + "'");
          } else if (k == "c") {
            c_const = std::stod(val);
          } else if (k == "u") {
            u = std::stod(val);
          } else {
            fail("unknown header key '" + k + "'");
          }
        } catch (const std::logic_error&) {
          fail("bad number in '" + tok + "'");
        }
      }
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-' && line[0] != '+' && line[0] != '.')
      continue;  // column header
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        cols.push_back(std::stod(cell));
      } catch (const std::logic_error&) {
        fail("bad number '" + cell + "'");
      }
    }
    if (cols.size() < 2 || cols.size() > 3) fail("expected 2 or 3 columns");
    p.x.push_back(cols[0]);
    if (p.kind == ProfileKind::kOptical) {
      if (cols.size() != 2) fail("optical rows are x,v_p");
      p.c.push_back(cols[1]);
    } else {
      p.v.push_back(cols[1]);
      if (cols.size() == 3)
        p.c.push_back(cols[2]);
      else if (c_const)
        p.c.push_back(*c_const);
      else
        fail("no wave speed column and no c= header");
    }
  }
  if (!kind_seen) throw ConfigError("profile header must declare kind=");
  if (p.kind == ProfileKind::kOptical) {
    if (!u) throw ConfigError("optical profile needs u= in the header");
    p.v.assign(p.x.size(), *u);
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
  return p;
}

inline FlowProfile load_profile_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open profile " + path);
  return parse_profile_csv(f);
}

inline void write_profile_csv(std::ostream& out, const FlowProfile& p) {
  p.validate();
  out.precision(17);
  if (p.kind == ProfileKind::kOptical) {
    out << "# kind=optical u=" << p.v.front() << "\nx,v_p\n";
    for (std::size_t i = 0; i < p.size(); ++i) out << p.x[i] << ',' << p.c[i] << '\n';
  } else {
    out << "# kind=acoustic\nx,v,c\n";
    for (std::size_t i = 0; i < p.size(); ++i) out << p.x[i] << ',' << p.v[i] << ',' << p.c[i] << '\n';
  }
}

inline void write_spectrum_csv(std::ostream& out, std::span<const double> omegas, std::span<const double> n) {
  detail::require<DimensionMismatch>(omegas.size() == n.size(), "spectrum columns differ in length");
  out.precision(17);
  out << "omega,N\n";
  for (std::size_t i = 0; i < n.size(); ++i) out << omegas[i] << ',' << n[i] << '\n';
}

}  // namespace aqsim::horizon
