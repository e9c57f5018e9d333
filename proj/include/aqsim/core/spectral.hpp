#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include <Eigen/SVD>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/fock_basis.hpp"
#include "aqsim/core/operator.hpp"

namespace aqsim {

/// Von Neumann entropy (nats) of the reduced state on `left_sites`.
inline double entanglement_entropy(const StateVector& psi, const FockBasis& basis,
                                   std::span<const std::size_t> left_sites) {
  detail::require<DimensionMismatch>(psi.dim() == basis.dim(), "state/basis dimension mismatch");
  std::vector<bool> is_left(basis.sites(), false);
  for (std::size_t s : left_sites) {
    detail::require(s < basis.sites(), "bipartition site outside the lattice");
    detail::require(!is_left[s], "bipartition lists a site twice");
    is_left[s] = true;
  }

  std::map<Occupation, Eigen::Index> lidx, ridx;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> where(basis.dim());
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    Occupation l, r;
    const auto& occ = basis.state(i);
    for (std::size_t s = 0; s < occ.size(); ++s) (is_left[s] ? l : r).push_back(occ[s]);
    auto li = lidx.emplace(l, static_cast<Eigen::Index>(lidx.size())).first->second;
    auto ri = ridx.emplace(r, static_cast<Eigen::Index>(ridx.size())).first->second;
    where[i] = {li, ri};
  }
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(lidx.size()),
                            static_cast<Eigen::Index>(ridx.size()));
  for (std::size_t i = 0; i < basis.dim(); ++i)
    m(where[i].first, where[i].second) = psi.amplitudes()(static_cast<Eigen::Index>(i));

  Eigen::JacobiSVD<CMatrix> svd(m);
  double s = 0.0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    const double p = svd.singularValues()(k) * svd.singularValues()(k);
    if (p > 1e-300) s -= p * std::log(p);
  }
  return std::max(0.0, s);
}

struct GapRatioStatistics {
  double mean_r = 0.0;
  std::size_t samples = 0;
  std::size_t skipped_degenerate = 0;
  std::vector<double> bin_edges;   // histogram over [0, 1]
  std::vector<std::size_t> counts;
};

/// Mean of r_n = min(d_n, d_{n+1}) / max(d_n, d_{n+1}) over consecutive level gaps.
/// Pairs with both gaps below 1e-14 are skipped and counted.
inline GapRatioStatistics gap_ratio_statistics(std::span<const double> levels,
                                               std::size_t bins = 20) {
  detail::require(levels.size() >= 3, "gap ratio statistics need at least 3 levels");
  detail::require(bins >= 1, "histogram needs at least one bin");
  for (std::size_t i = 1; i < levels.size(); ++i)
    detail::require(levels[i] >= levels[i - 1], "levels must be sorted ascending");

  GapRatioStatistics out;
  out.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) out.bin_edges.push_back(static_cast<double>(b) / bins);
  double sum = 0.0;
  for (std::size_t n = 0; n + 2 < levels.size(); ++n) {
    const double a = levels[n + 1] - levels[n];
    const double b = levels[n + 2] - levels[n + 1];
    if (a < 1e-14 && b < 1e-14) {
      ++out.skipped_degenerate;
      continue;
    }
    const double r = std::min(a, b) / std::max(a, b);
    sum += r;
    ++out.samples;
    out.counts[std::min(bins - 1, static_cast<std::size_t>(r * bins))]++;
  }
  if (out.samples > 0) out.mean_r = sum / static_cast<double>(out.samples);
  return out;
}

inline GapRatioStatistics gap_ratio_statistics(const RVector& levels, std::size_t bins = 20) {
  std::vector<double> v(levels.data(), levels.data() + levels.size());
  std::sort(v.begin(), v.end());
  return gap_ratio_statistics(std::span<const double>(v), bins);
}

}  // namespace aqsim
