#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aqsim/core/errors.hpp"

namespace aqsim {

using Occupation = std::vector<int>;

/// Fixed-particle-number bosonic Fock basis with a per-site occupation cap.
///
/// States are stored in descending lexicographic order, so for one particle on
/// two sites the basis reads {[1,0], [0,1]}.
class FockBasis {
 public:
  static constexpr std::size_t kDefaultDimensionGuard = 20000;

  FockBasis() = default;

  std::size_t sites() const { return sites_; }
  int particles() const { return particles_; }
  int max_occupancy() const { return max_occupancy_; }
  std::size_t dim() const { return states_.size(); }
  const std::vector<Occupation>& states() const { return states_; }
  const Occupation& state(std::size_t i) const { return states_.at(i); }

  std::optional<std::size_t> index_of(const Occupation& occ) const {
    auto it = index_.find(occ);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Number of constrained configurations, without enumerating them.
  static std::uint64_t count(std::size_t sites, int particles, int max_occupancy) {
    // ways[n] = configurations of the processed sites holding n particles
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(particles) + 1, 0);
    ways[0] = 1;
    for (std::size_t s = 0; s < sites; ++s) {
      std::vector<std::uint64_t> next(ways.size(), 0);
      for (int n = 0; n <= particles; ++n) {
        if (ways[static_cast<std::size_t>(n)] == 0) continue;
        for (int k = 0; k <= max_occupancy && n + k <= particles; ++k)
          next[static_cast<std::size_t>(n + k)] += ways[static_cast<std::size_t>(n)];
      }
      ways = std::move(next);
    }
    return ways[static_cast<std::size_t>(particles)];
  }

  friend FockBasis build_fock_basis(std::size_t, int, int, std::size_t);

 private:
  void enumerate(Occupation& current, std::size_t site, int remaining) {
    if (site + 1 == sites_) {
      if (remaining <= max_occupancy_) {
        current[site] = remaining;
        states_.push_back(current);
      }
      return;
    }
    const int top = std::min(remaining, max_occupancy_);
    for (int k = top; k >= 0; --k) {
      const auto rest_capacity = static_cast<long>(sites_ - site - 1) * max_occupancy_;
      if (remaining - k > rest_capacity) break;
      current[site] = k;
      enumerate(current, site + 1, remaining - k);
    }
  }

  std::size_t sites_ = 0;
  int particles_ = 0;
  int max_occupancy_ = 0;
  std::vector<Occupation> states_;
  std::map<Occupation, std::size_t> index_;
};

inline FockBasis build_fock_basis(std::size_t sites, int particles, int max_occupancy,
                                  std::size_t dimension_guard = FockBasis::kDefaultDimensionGuard) {
  detail::require(sites >= 1, "basis needs at least one site");
  detail::require(max_occupancy >= 1, "max occupancy must be positive");
  detail::require(particles >= 0 && static_cast<long>(particles) <=
                                        static_cast<long>(sites) * max_occupancy,
                  "particle number outside [0, sites * max_occupancy]");
  const auto n = FockBasis::count(sites, particles, max_occupancy);
  if (n > dimension_guard) {
    throw CapacityError("Fock basis dimension " + std::to_string(n) + " exceeds guard " +
                        std::to_string(dimension_guard));
  }
  FockBasis b;
  b.sites_ = sites;
  b.particles_ = particles;
  b.max_occupancy_ = max_occupancy;
  b.states_.reserve(static_cast<std::size_t>(n));
  Occupation cur(sites, 0);
  b.enumerate(cur, 0, particles);
  for (std::size_t i = 0; i < b.states_.size(); ++i) b.index_.emplace(b.states_[i], i);
  return b;
}

}  // namespace aqsim
