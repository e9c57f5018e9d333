#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/operator.hpp"
#include "aqsim/core/rng.hpp"

namespace aqsim::enaqt {

/// Single-excitation tight-binding network with an input site and a trapping sink.
struct ExcitonNetwork {
  std::vector<double> epsilon;  // site energies
  RMatrix V;                    // symmetric couplings, zero diagonal
  std::size_t input_site = 0;
  std::size_t sink_site = 0;
  double trap_rate = 1.0;           // kappa_trap
  double recombination_rate = 0.0;  // Gamma

  std::size_t size() const { return epsilon.size(); }

  void validate() const {
    const auto n = static_cast<Eigen::Index>(size());
    detail::require(n >= 1, "network needs at least one site");
    detail::require<DimensionMismatch>(V.rows() == n && V.cols() == n, "coupling matrix must be N x N");
    for (double e : epsilon) detail::require(std::isfinite(e), "site energies must be finite");
    for (Eigen::Index i = 0; i < n; ++i) {
      detail::require(V(i, i) == 0.0, "coupling matrix must have a zero diagonal");
      for (Eigen::Index j = 0; j < n; ++j) {
        detail::require(std::isfinite(V(i, j)), "couplings must be finite");
        detail::require(V(i, j) == V(j, i), "coupling matrix must be symmetric");
      }
    }
    detail::require(input_site < size() && sink_site < size(), "input/sink site outside the network");
    detail::require(trap_rate >= 0.0 && recombination_rate >= 0.0, "rates must be non-negative");
  }
};

/// H = sum_m eps_m |m><m| + sum_{n<m} V_mn (|m><n| + |n><m|).
inline Operator build_exciton_hamiltonian(const ExcitonNetwork& net) {
  net.validate();
  const auto n = static_cast<Eigen::Index>(net.size());
  CMatrix h = net.V.cast<Complex>();
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = net.epsilon[static_cast<std::size_t>(i)];
  return Operator(std::move(h), Hermiticity::kYes);
}

/// Open chain with nearest-neighbour coupling v. Site energies are drawn
/// uniformly, then mapped affinely so that max - min equals `spread` exactly
/// (centred on zero). Input at site 0, sink at the far end.
inline ExcitonNetwork make_disordered_chain(std::size_t n, double v, double spread, std::uint64_t seed,
                                            double trap_rate = 1.0, double recombination_rate = 0.0) {
  detail::require(n >= 2, "chain needs at least two sites");
  ExcitonNetwork net;
  net.epsilon.resize(n);
  Rng rng = make_stream(seed, 0);
  for (auto& e : net.epsilon) e = uniform01(rng);
  const auto [lo, hi] = std::minmax_element(net.epsilon.begin(), net.epsilon.end());
  const double a = *lo, w = *hi - *lo;
  for (auto& e : net.epsilon) e = w > 0.0 ? spread * ((e - a) / w - 0.5) : 0.0;
  net.V = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i + 1 < static_cast<Eigen::Index>(n); ++i) net.V(i, i + 1) = net.V(i + 1, i) = v;
  net.input_site = 0;
  net.sink_site = n - 1;
  net.trap_rate = trap_rate;
  net.recombination_rate = recombination_rate;
  return net;
}

/// Fully coupled network: energies uniform in [-spread/2, spread/2], couplings
/// uniform in [-v, v]. Input at site 0, sink at the last site.
inline ExcitonNetwork make_random_network(std::size_t n, double v, double spread, std::uint64_t seed,
                                          double trap_rate = 1.0, double recombination_rate = 0.0) {
  detail::require(n >= 2, "network needs at least two sites");
  ExcitonNetwork net;
  Rng rng = make_stream(seed, 0);
  net.epsilon.resize(n);
  for (auto& e : net.epsilon) e = spread * (uniform01(rng) - 0.5);
  const auto m = static_cast<Eigen::Index>(n);
  net.V = RMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) net.V(i, j) = net.V(j, i) = v * (2.0 * uniform01(rng) - 1.0);
  net.input_site = 0;
  net.sink_site = n - 1;
  net.trap_rate = trap_rate;
  net.recombination_rate = recombination_rate;
  return net;
}

/// Reads the plain-text network format:
///
///   # comment lines start with '#'
///   N
///   eps_0 ... eps_{N-1}
///   N rows of N couplings
///   input=<site> sink=<site> trap=<rate> recombination=<rate>
///
/// Sites are 0-based.
inline ExcitonNetwork parse_network(std::istream& in) {
  std::string text, line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    text += line + '\n';
  }
  std::istringstream ss(text);
  long n = 0;
  if (!(ss >> n) || n < 1) throw ConfigError("network file: missing or invalid site count");
  ExcitonNetwork net;
  net.epsilon.resize(static_cast<std::size_t>(n));
  for (auto& e : net.epsilon)
    if (!(ss >> e)) throw ConfigError("network file: expected " + std::to_string(n) + " site energies");
  net.V.resize(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      if (!(ss >> net.V(i, j))) throw ConfigError("network file: coupling block is incomplete");
  std::string tok;
  bool have_input = false, have_sink = false;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("network file: unexpected token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      if (key == "input") {
        net.input_site = std::stoul(val);
        have_input = true;
      } else if (key == "sink") {
        net.sink_site = std::stoul(val);
        have_sink = true;
      } else if (key == "trap") {
        net.trap_rate = std::stod(val);
      } else if (key == "recombination") {
        net.recombination_rate = std::stod(val);
      } else {
        throw ConfigError("network file: unknown role key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("network file: bad value for '" + key + "'");
    }
  }
  if (!have_input || !have_sink) throw ConfigError("network file: roles line needs input= and sink=");
  try {
    net.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("network file: ") + e.what());
  }
  return net;
}

inline ExcitonNetwork load_network(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open network file '" + path + "'");
  return parse_network(f);
}

inline std::string format_network(const ExcitonNetwork& net) {
  std::ostringstream o;
  o.precision(17);
  o << net.size() << '\n';
  for (std::size_t i = 0; i < net.size(); ++i) o << (i ? " " : "") << net.epsilon[i];
  o << '\n';
  for (Eigen::Index i = 0; i < net.V.rows(); ++i) {
    for (Eigen::Index j = 0; j < net.V.cols(); ++j) o << (j ? " " : "") << net.V(i, j);
    o << '\n';
  }
  o << "input=" << net.input_site << " sink=" << net.sink_site << " trap=" << net.trap_rate
    << " recombination=" << net.recombination_rate << '\n';
  return o.str();
}

}  // namespace aqsim::enaqt
