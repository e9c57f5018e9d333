#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "aqsim/waveguide/waveguide.hpp"

using namespace aqsim;
using namespace aqsim::waveguide;

namespace {

WaveguideArray coupler(double c0, double n = 1.0, double length = 100.0) {
  WaveguideArray a;
  a.beta = {InverseLength(0.0), InverseLength(0.0)};
  a.C = RMatrix::Zero(2, 2);
  a.C(0, 1) = a.C(1, 0) = c0;
  a.refractive_index = n;
  a.length = Length(length);
  return a;
}

enaqt::ExcitonNetwork random_network(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  enaqt::ExcitonNetwork net;
  net.epsilon.resize(n);
  for (auto& e : net.epsilon) e = 2.0 * u(g);
  net.V = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < net.V.rows(); ++i)
    for (Eigen::Index j = i + 1; j < net.V.cols(); ++j) net.V(i, j) = net.V(j, i) = u(g);
  net.input_site = 0;
  net.sink_site = n - 1;
  return net;
}

}  // namespace

TEST(Units, PropagationTime) {
  const units::Time t = units::propagation_time(Length(3.0), 1.5, Speed(2.0));
  EXPECT_DOUBLE_EQ(t.value, 2.25);
  EXPECT_DOUBLE_EQ((Length(4.0) / Speed(2.0)).value, 2.0);
  EXPECT_DOUBLE_EQ(InverseLength(0.5) * Length(4.0), 2.0);
}

TEST(Waveguide, CouplerFullTransfer) {
  const double c0 = 0.37;
  const auto a = coupler(c0);
  const Length zt = coupler_transfer_length(c0, 1.0, Speed(1.0));
  EXPECT_NEAR(zt.value, std::numbers::pi / (2 * c0), 1e-15);
  const CVector out = propagate(a, 0, zt);
  EXPECT_NEAR(std::norm(out(1)), 1.0, 1e-12);
  const CVector back = propagate(a, 0, zt * 2.0);
  EXPECT_NEAR(std::norm(back(0)), 1.0, 1e-12);
  // sin^2 law at an arbitrary point
  const CVector mid = propagate(a, 0, Length(1.3));
  EXPECT_NEAR(std::norm(mid(1)), std::pow(std::sin(c0 * 1.3), 2), 1e-12);
}

TEST(Waveguide, UncoupledKeepsInput) {
  auto a = coupler(0.0);
  a.beta = {InverseLength(0.4), InverseLength(-1.1)};
  for (double z : {0.0, 3.0, 50.0}) EXPECT_NEAR(std::norm(propagate(a, 1, Length(z))(1)), 1.0, 1e-14);
}

TEST(Waveguide, RefractiveIndexRescalesDistance) {
  const auto a1 = coupler(0.5, 1.0);
  const auto a2 = coupler(0.5, 2.0);
  const CVector p1 = propagate(a1, 0, Length(2.0));
  const CVector p2 = propagate(a2, 0, Length(1.0));
  EXPECT_LT((p1 - p2).norm(), 1e-12);
}

TEST(Waveguide, RejectsBadInput) {
  const auto a = coupler(0.5, 1.0, 10.0);
  EXPECT_THROW(propagate(a, 0, Length(11.0)), InvalidArgument);
  EXPECT_THROW(propagate(a, 0, Length(-1.0)), InvalidArgument);
  EXPECT_THROW(propagate(a, 2, Length(1.0)), InvalidArgument);
  auto b = a;
  b.C(0, 1) = 0.2;
  EXPECT_THROW(build_waveguide_hamiltonian(b), InvalidArgument);
}

TEST(Isomorphism, ExactMappingMatches) {
  const auto net = random_network(7, 3);
  const auto [a, rec] = map_fmo_to_waveguide(net, 2.0, 1.5, Speed(1.0), Length(20.0));
  EXPECT_EQ(rec.residual, 0.0);
  std::vector<double> zs;
  for (int k = 0; k <= 40; ++k) zs.push_back(0.5 * k);
  const auto chk = check_isomorphism(net, a, rec, zs, 1e-10);
  EXPECT_TRUE(chk.pass) << chk.max_distance;
  EXPECT_LE(chk.max_distance, 1e-10);
  EXPECT_FALSE(chk.degenerate_tolerance);
}

TEST(Isomorphism, PerturbedCouplingIsLocalized) {
  const auto net = random_network(5, 11);
  auto [a, rec] = map_fmo_to_waveguide(net, 1.0);
  a.length = Length(30.0);
  a.C(1, 2) *= 1.1;
  a.C(2, 1) = a.C(1, 2);
  std::vector<double> zs;
  for (int k = 0; k <= 30; ++k) zs.push_back(k);
  const auto chk = check_isomorphism(net, a, rec, zs, 1e-6);
  EXPECT_FALSE(chk.pass);
  EXPECT_GT(chk.max_distance, 1e-3);
  EXPECT_LT(chk.worst_input, net.size());
  EXPECT_LT(chk.worst_site, net.size());
}

TEST(Isomorphism, InfiniteToleranceFlagged) {
  const auto net = random_network(3, 5);
  auto [a, rec] = map_fmo_to_waveguide(net, 1.0);
  a.C *= 3.0;
  const std::vector<double> zs{0.0, 1.0, 2.0};
  const auto chk = check_isomorphism(net, a, rec, zs, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(chk.pass);
  EXPECT_TRUE(chk.degenerate_tolerance);
}

// Scaling covariance: scale s at distance z equals scale 1 at distance s z.
TEST(Isomorphism, ScalingCovariance) {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 2 + seed % 9;
    const auto net = random_network(n, seed);
    const double s = 0.25 + 0.5 * seed;
    auto [a1, r1] = map_fmo_to_waveguide(net, 1.0, 1.0, Speed(1.0), Length(100.0));
    auto [as, rs] = map_fmo_to_waveguide(net, s, 1.0, Speed(1.0), Length(100.0));
    for (double z : {0.3, 1.7, 4.0}) {
      const RVector p1 = propagate(a1, 0, Length(s * z)).cwiseAbs2();
      const RVector ps = propagate(as, 0, Length(z)).cwiseAbs2();
      EXPECT_LT((p1 - ps).cwiseAbs().maxCoeff(), 1e-9) << "seed " << seed;
    }
  }
}
