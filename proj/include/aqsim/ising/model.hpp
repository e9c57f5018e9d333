#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aqsim/core/errors.hpp"

namespace aqsim::ising {

using Spins = std::vector<int>;  // entries +1 / -1

struct Coupling {
  std::size_t i = 0, j = 0;  // i < j
  double v = 0.0;
};

/// H(s) = -sum_{i<j} V_ij s_i s_j - sum_i b_i s_i. Each unordered pair is
/// stored once.
class IsingModel {
 public:
  IsingModel() = default;
  explicit IsingModel(std::size_t n) : fields_(n, 0.0), adjacency_(n) {}

  std::size_t size() const { return fields_.size(); }
  const std::vector<Coupling>& couplings() const { return couplings_; }
  const std::vector<double>& fields() const { return fields_; }

  /// Adds to V_ij (order of i, j irrelevant).
  void add_coupling(std::size_t i, std::size_t j, double v) {
    detail::require(i < size() && j < size(), "coupling index outside the model");
    detail::require(i != j, "self-couplings are not allowed");
    detail::require(std::isfinite(v), "coupling must be finite");
    if (i > j) std::swap(i, j);
    for (auto& c : couplings_)
      if (c.i == i && c.j == j) {
        c.v += v;
        rebuild();
        return;
      }
    couplings_.push_back({i, j, v});
    rebuild();
  }

  void set_field(std::size_t i, double b) {
    detail::require(i < size(), "field index outside the model");
    detail::require(std::isfinite(b), "field must be finite");
    fields_[i] = b;
  }
  void add_field(std::size_t i, double b) { set_field(i, fields_.at(i) + b); }

  /// (neighbour, V) pairs of spin i.
  const std::vector<std::pair<std::size_t, double>>& neighbours(std::size_t i) const { return adjacency_[i]; }

  bool is_ferromagnetic() const {
    return std::all_of(couplings_.begin(), couplings_.end(), [](const Coupling& c) { return c.v >= 0.0; });
  }

  /// Upper bound on |H|.
  double energy_scale() const {
    double s = 0.0;
    for (const auto& c : couplings_) s += std::abs(c.v);
    for (double b : fields_) s += std::abs(b);
    return s;
  }

  /// Builds a model from a double-counted sum -sum_{i != j} W_ij s_i s_j, i.e.
  /// V_ij = W_ij + W_ji.
  static IsingModel from_ordered_pairs(std::size_t n, const std::vector<Coupling>& ordered,
                                       std::span<const double> fields = {}) {
    IsingModel m(n);
    for (const auto& c : ordered) m.add_coupling(c.i, c.j, c.v);
    for (std::size_t i = 0; i < fields.size(); ++i) m.set_field(i, fields[i]);
    return m;
  }

  /// Ferromagnetic nearest-neighbour grid, open boundaries, site r * cols + c.
  static IsingModel grid(std::size_t rows, std::size_t cols, double v = 1.0, double b = 0.0) {
    IsingModel m(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t s = r * cols + c;
        if (c + 1 < cols) m.add_coupling(s, s + 1, v);
        if (r + 1 < rows) m.add_coupling(s, s + cols, v);
        if (b != 0.0) m.set_field(s, b);
      }
    return m;
  }

 private:
  void rebuild() {
    for (auto& a : adjacency_) a.clear();
    for (const auto& c : couplings_) {
      adjacency_[c.i].emplace_back(c.j, c.v);
      adjacency_[c.j].emplace_back(c.i, c.v);
    }
  }

  std::vector<Coupling> couplings_;
  std::vector<double> fields_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
};

inline void check_spins(const IsingModel& m, std::span<const int> s) {
  detail::require<DimensionMismatch>(s.size() == m.size(), "spin configuration has the wrong length");
  for (int x : s) detail::require(x == 1 || x == -1, "spins must be +1 or -1");
}

inline double ising_energy_unchecked(const IsingModel& m, std::span<const int> s) {
  double e = 0.0;
  for (const auto& c : m.couplings()) e -= c.v * s[c.i] * s[c.j];
  for (std::size_t i = 0; i < s.size(); ++i) e -= m.fields()[i] * s[i];
  return e;
}

inline double ising_energy(const IsingModel& m, std::span<const int> s) {
  check_spins(m, s);
  return ising_energy_unchecked(m, s);
}

/// Energy change of flipping spin i.
inline double flip_delta(const IsingModel& m, std::span<const int> s, std::size_t i) {
  double h = m.fields()[i];
  for (const auto& [j, v] : m.neighbours(i)) h += v * s[j];
  return 2.0 * s[i] * h;
}

/// Spin i of enumeration index k: bit i set means down.
inline Spins spins_from_index(std::uint64_t k, std::size_t n) {
  Spins s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = ((k >> i) & 1u) ? -1 : 1;
  return s;
}

inline std::uint64_t index_from_spins(std::span<const int> s) {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] < 0) k |= std::uint64_t{1} << i;
  return k;
}

struct PartitionResult {
  double beta = 0.0;
  double log_z = 0.0;
  double z = 0.0;  // may be +inf at large beta; log_z stays finite
  double ground_energy = 0.0;
  std::vector<Spins> ground_states;
};

inline constexpr std::size_t kEnumerationGuard = 24;

/// Exhaustive sum over 2^n configurations in index order, log-sum-exp form.
inline PartitionResult exact_partition(const IsingModel& m, double beta, double ground_tol = 1e-9) {
  const std::size_t n = m.size();
  if (n > kEnumerationGuard) throw CapacityError("exact enumeration limited to 24 spins");
  detail::require(std::isfinite(beta) && beta >= 0.0, "beta must be finite and >= 0");
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<double> energies(count);
  Spins s(n);
  double emin = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < count; ++k) {
    for (std::size_t i = 0; i < n; ++i) s[i] = ((k >> i) & 1u) ? -1 : 1;
    energies[k] = ising_energy_unchecked(m, s);
    emin = std::min(emin, energies[k]);
  }
  PartitionResult r;
  r.beta = beta;
  r.ground_energy = emin;
  const double shift = -beta * emin;  // largest exponent
  double sum = 0.0;
  for (std::uint64_t k = 0; k < count; ++k) sum += std::exp(-beta * energies[k] - shift);
  r.log_z = shift + std::log(sum);
  r.z = std::exp(shift) * sum;
  const double tol = ground_tol * std::max(1.0, std::abs(emin));
  for (std::uint64_t k = 0; k < count; ++k)
    if (energies[k] <= emin + tol) r.ground_states.push_back(spins_from_index(k, n));
  return r;
}

/// Edge list: "n <count>" (optional), "i j V_ij" couplings, "i b_i" fields,
/// '#' comments. Without an n line the size is the largest index + 1.
inline IsingModel parse_edge_list(std::istream& in) {
  std::vector<Coupling> pairs;
  std::map<std::size_t, double> fields;
  std::size_t n = 0, max_index = 0;
  bool have_n = false, any = false;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError("edge list line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    try {
      if (tok[0] == "n") {
        if (tok.size() != 2) fail("expected 'n <count>'");
        n = std::stoul(tok[1]);
        have_n = true;
      } else if (tok.size() == 2) {
        const std::size_t i = std::stoul(tok[0]);
        fields[i] += std::stod(tok[1]);
        max_index = std::max(max_index, i);
        any = true;
      } else if (tok.size() == 3) {
        const std::size_t i = std::stoul(tok[0]), j = std::stoul(tok[1]);
        if (i == j) fail("self-coupling");
        pairs.push_back({i, j, std::stod(tok[2])});
        max_index = std::max({max_index, i, j});
        any = true;
      } else {
        fail("expected 'i j V' or 'i b'");
      }
    } catch (const std::logic_error&) {
      fail("bad number");
    }
  }
  if (!have_n) n = any ? max_index + 1 : 0;
  if (any && max_index >= n) throw ConfigError("edge list index exceeds n");
  if (n == 0) throw ConfigError("edge list defines no spins");
  IsingModel m(n);
  try {
    for (const auto& c : pairs) m.add_coupling(c.i, c.j, c.v);
    for (const auto& [i, b] : fields) m.set_field(i, b);
  } catch (const Error& e) {
    throw ConfigError(std::string("edge list: ") + e.what());
  }
  return m;
}

inline IsingModel load_edge_list(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open edge list " + path);
  return parse_edge_list(f);
}

inline void write_edge_list(std::ostream& out, const IsingModel& m) {
  out.precision(17);
  out << "n " << m.size() << '\n';
  for (const auto& c : m.couplings()) out << c.i << ' ' << c.j << ' ' << c.v << '\n';
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.fields()[i] != 0.0) out << i << ' ' << m.fields()[i] << '\n';
}

}  // namespace aqsim::ising
