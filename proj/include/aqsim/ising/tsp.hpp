#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/rng.hpp"
#include "aqsim/core/types.hpp"
#include "aqsim/ising/model.hpp"
#include "aqsim/ising/monte_carlo.hpp"

namespace aqsim::ising {

using Tour = std::vector<std::size_t>;  // tour[p] = city at position p

struct TspInstance {
  RMatrix distances;
  std::vector<std::pair<double, double>> coordinates;  // optional
  double A = 0.0;  // constraint penalty; <= 0 selects default_penalty
  double B = 1.0;  // tour-length weight

  std::size_t size() const { return static_cast<std::size_t>(distances.rows()); }

  double max_distance() const { return distances.size() ? distances.maxCoeff() : 0.0; }

  void validate() const {
    const auto n = distances.rows();
    detail::require(n >= 3, "a TSP instance needs at least 3 cities");
    detail::require<DimensionMismatch>(distances.cols() == n, "distance matrix must be square");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        detail::require(std::isfinite(distances(i, j)) && distances(i, j) >= 0.0, "distances must be finite and >= 0");
        detail::require(distances(i, j) == distances(j, i), "distances must be symmetric");
        if (i == j) detail::require(distances(i, i) == 0.0, "distance diagonal must be zero");
      }
    detail::require(B > 0.0, "tour weight B must be positive");
  }

  static TspInstance from_coordinates(std::vector<std::pair<double, double>> xy, double B = 1.0, double A = 0.0) {
    TspInstance t;
    const auto n = static_cast<Eigen::Index>(xy.size());
    t.distances = RMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        t.distances(i, j) = std::hypot(xy[static_cast<std::size_t>(i)].first - xy[static_cast<std::size_t>(j)].first,
                                       xy[static_cast<std::size_t>(i)].second - xy[static_cast<std::size_t>(j)].second);
    t.distances = 0.5 * (t.distances + t.distances.transpose()).eval();
    t.coordinates = std::move(xy);
    t.A = A;
    t.B = B;
    return t;
  }

  /// Cities uniform in the unit square.
  static TspInstance random(std::size_t n, std::uint64_t seed) {
    Rng g = make_stream(seed, 0);
    std::vector<std::pair<double, double>> xy(n);
    for (auto& [x, y] : xy) {
      x = uniform01(g);
      y = uniform01(g);
    }
    return from_coordinates(std::move(xy));
  }
};

/// Upper bound on any tour length: each city's longest edge.
inline double tour_length_bound(const RMatrix& d) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) s += d.row(i).maxCoeff();
  return s;
}

/// 1.2 B max d. Larger penalties raise the barriers between feasible tours.
inline double default_penalty(const TspInstance& t) { return 1.2 * t.B * t.max_distance(); }

inline double tour_length(const RMatrix& d, const Tour& tour) {
  double l = 0.0;
  for (std::size_t p = 0; p < tour.size(); ++p)
    l += d(static_cast<Eigen::Index>(tour[p]), static_cast<Eigen::Index>(tour[(p + 1) % tour.size()]));
  return l;
}

/// Spin (city i, position p) has index i * n + p; up means "city i at p".
struct TspEncoding {
  std::size_t n = 0;
  double A = 0.0, B = 1.0;
  double offset = 0.0;  // one-hot energy = Ising energy + offset
  bool dominance_guaranteed = false;  // 2A > B * tour_length_bound
  RMatrix distances;

  std::size_t spin(std::size_t city, std::size_t pos) const { return city * n + pos; }
};

/// One-hot penalty encoding
///   E = A sum_i (1 - sum_p x_ip)^2 + A sum_p (1 - sum_i x_ip)^2
///     + B sum_{i != j} d_ij sum_p x_ip x_{j,p+1},   x = (1 + s) / 2.
/// Feasible tours have E = B * length.
inline std::pair<IsingModel, TspEncoding> tsp_to_ising(const TspInstance& inst) {
  inst.validate();
  const std::size_t n = inst.size();
  const double A = inst.A > 0.0 ? inst.A : default_penalty(inst);
  if (!(A > inst.B * inst.max_distance()))
    throw InvalidArgument("penalty A must exceed B * max distance");
  const double B = inst.B;
  const std::size_t m = n * n;
  TspEncoding enc;
  enc.n = n;
  enc.A = A;
  enc.B = B;
  enc.distances = inst.distances;
  enc.dominance_guaranteed = 2.0 * A > B * tour_length_bound(inst.distances);

  // QUBO: c0 + sum h_a x_a + sum_{a<b} Q_ab x_a x_b
  double c0 = 2.0 * A * static_cast<double>(n);
  std::vector<double> h(m, -2.0 * A);
  RMatrix Q = RMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  auto addq = [&](std::size_t a, std::size_t b, double v) {
    if (a > b) std::swap(a, b);
    Q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += v;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) addq(enc.spin(i, p), enc.spin(i, q), 2.0 * A);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) addq(enc.spin(i, p), enc.spin(j, p), 2.0 * A);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = inst.distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      for (std::size_t p = 0; p < n; ++p) addq(enc.spin(i, p), enc.spin(j, (p + 1) % n), B * d);
    }

  // x_a x_b = (1 + s_a + s_b + s_a s_b) / 4
  IsingModel model(m);
  std::vector<double> b(m);
  double offset = c0;
  for (std::size_t a = 0; a < m; ++a) {
    b[a] = -h[a] / 2.0;
    offset += h[a] / 2.0;
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t c = a + 1; c < m; ++c) {
      const double q = Q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
      if (q == 0.0) continue;
      offset += q / 4.0;
      b[a] -= q / 4.0;
      b[c] -= q / 4.0;
      model.add_coupling(a, c, -q / 4.0);
    }
  for (std::size_t a = 0; a < m; ++a) model.set_field(a, b[a]);
  enc.offset = offset;
  return {std::move(model), std::move(enc)};
}

inline Spins encode_tour(const Tour& tour, const TspEncoding& enc) {
  detail::require<DimensionMismatch>(tour.size() == enc.n, "tour length differs from the instance size");
  Spins s(enc.n * enc.n, -1);
  std::vector<bool> seen(enc.n, false);
  for (std::size_t p = 0; p < enc.n; ++p) {
    detail::require(tour[p] < enc.n && !seen[tour[p]], "tour must be a permutation of the cities");
    seen[tour[p]] = true;
    s[enc.spin(tour[p], p)] = 1;
  }
  return s;
}

struct ConstraintViolation {
  enum class Kind { kCity, kPosition } kind = Kind::kCity;
  std::size_t index = 0;  // city or position
  std::size_t count = 0;  // how many up spins it has (should be 1)

  std::string describe() const {
    return std::string(kind == Kind::kCity ? "city " : "position ") + std::to_string(index) + " assigned " +
           std::to_string(count) + " times";
  }
};

struct DecodedTour {
  std::optional<Tour> tour;
  std::vector<ConstraintViolation> violations;
  bool feasible() const { return tour.has_value(); }
};

inline DecodedTour decode_tour(std::span<const int> s, const TspEncoding& enc) {
  detail::require<DimensionMismatch>(s.size() == enc.n * enc.n, "configuration size differs from n^2");
  DecodedTour out;
  Tour tour(enc.n, 0);
  for (std::size_t i = 0; i < enc.n; ++i) {
    std::size_t c = 0;
    for (std::size_t p = 0; p < enc.n; ++p) c += s[enc.spin(i, p)] > 0 ? 1 : 0;
    if (c != 1) out.violations.push_back({ConstraintViolation::Kind::kCity, i, c});
  }
  for (std::size_t p = 0; p < enc.n; ++p) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < enc.n; ++i)
      if (s[enc.spin(i, p)] > 0) {
        ++c;
        tour[p] = i;
      }
    if (c != 1) out.violations.push_back({ConstraintViolation::Kind::kPosition, p, c});
  }
  if (out.violations.empty()) out.tour = std::move(tour);
  return out;
}

struct BruteForceTsp {
  Tour tour;
  double length = 0.0;
  std::size_t tours_checked = 0;  // (n-1)!/2
};

/// City 0 fixed first; each undirected tour counted once.
inline BruteForceTsp brute_force_tsp(const RMatrix& d) {
  const auto n = static_cast<std::size_t>(d.rows());
  detail::require(n >= 3 && n <= 12, "brute force limited to 3..12 cities");
  std::vector<std::size_t> rest(n - 1);
  std::iota(rest.begin(), rest.end(), std::size_t{1});
  BruteForceTsp best;
  best.length = std::numeric_limits<double>::infinity();
  do {
    if (rest.front() > rest.back()) continue;  // mirror image already counted
    Tour t{0};
    t.insert(t.end(), rest.begin(), rest.end());
    const double l = tour_length(d, t);
    ++best.tours_checked;
    if (l < best.length) {
      best.length = l;
      best.tour = t;
    }
  } while (std::next_permutation(rest.begin(), rest.end()));
  return best;
}

/// Position-exchange moves: for cities i < j and positions p < q, flipping
/// (i,p), (i,q), (j,p), (j,q) swaps the two cities when i sits at p and j at q.
inline std::vector<std::vector<std::size_t>> exchange_moves(const TspEncoding& enc) {
  std::vector<std::vector<std::size_t>> mv;
  for (std::size_t i = 0; i < enc.n; ++i)
    for (std::size_t j = i + 1; j < enc.n; ++j)
      for (std::size_t p = 0; p < enc.n; ++p)
        for (std::size_t q = p + 1; q < enc.n; ++q)
          mv.push_back({enc.spin(i, p), enc.spin(i, q), enc.spin(j, p), enc.spin(j, q)});
  return mv;
}

/// Geometric beta in units of 1 / (B max d): 0.2 -> 100 over 2000 levels of
/// 50 sweeps.
inline AnnealSchedule default_tsp_schedule(const TspEncoding& enc, std::uint64_t seed = 1) {
  const double unit = enc.B * enc.distances.maxCoeff();
  detail::require(unit > 0.0, "instance has zero distances");
  return AnnealSchedule::geometric(0.2 / unit, 100.0 / unit, 2000, 50, seed);
}

struct TspAnnealResult {
  AnnealResult anneal;
  DecodedTour decoded;
  double length = 0.0;  // of the decoded tour, +inf if infeasible
};

inline TspAnnealResult anneal_tsp(const IsingModel& model, const TspEncoding& enc, const AnnealSchedule& sched) {
  TspAnnealResult r;
  r.anneal = simulated_annealing(model, sched);
  r.decoded = decode_tour(r.anneal.best, enc);
  r.length = r.decoded.feasible() ? tour_length(enc.distances, *r.decoded.tour)
                                  : std::numeric_limits<double>::infinity();
  return r;
}

/// City CSV: "x,y" or "name,x,y" rows, optional header line.
inline TspInstance parse_cities_csv(std::istream& in, double B = 1.0, double A = 0.0) {
  std::vector<std::pair<double, double>> xy;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() < 2 || cells.size() > 3)
      throw ConfigError("city line " + std::to_string(lineno) + ": expected x,y or name,x,y");
    const std::size_t off = cells.size() - 2;
    try {
      std::size_t used = 0;
      const double x = std::stod(cells[off], &used);
      const double y = std::stod(cells[off + 1]);
      xy.emplace_back(x, y);
    } catch (const std::logic_error&) {
      if (lineno == 1 && xy.empty()) continue;  // header
      throw ConfigError("city line " + std::to_string(lineno) + ": bad number");
    }
  }
  if (xy.size() < 3) throw ConfigError("city file needs at least 3 cities");
  return TspInstance::from_coordinates(std::move(xy), B, A);
}

inline TspInstance load_cities_csv(const std::string& path, double B = 1.0, double A = 0.0) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open city file " + path);
  return parse_cities_csv(f, B, A);
}

inline void write_cities_csv(std::ostream& out, const TspInstance& t) {
  out.precision(17);
  out << "x,y\n";
  for (const auto& [x, y] : t.coordinates) out << x << ',' << y << '\n';
}

}  // namespace aqsim::ising
