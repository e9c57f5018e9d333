#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

#include "aqsim/core/evolution.hpp"
#include "aqsim/core/fock_basis.hpp"
#include "aqsim/core/lindblad.hpp"
#include "aqsim/core/parallel.hpp"
#include "aqsim/core/rng.hpp"
#include "aqsim/core/spectral.hpp"

using namespace aqsim;

namespace {

Operator dimer(double v, double e1 = 0.0, double e2 = 0.0) {
  CMatrix h(2, 2);
  h << e1, v, v, e2;
  return Operator(h, Hermiticity::kYes);
}

CMatrix random_hermitian(int n, unsigned seed) {
  std::mt19937 g(seed);
  std::normal_distribution<double> nd;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(nd(g), nd(g));
  return 0.5 * (a + a.adjoint());
}

// Brute-force count: every tuple in [0, cap]^sites with the right sum.
std::size_t count_by_enumeration(std::size_t sites, int particles, int cap) {
  std::size_t total = 0;
  std::vector<int> occ(sites, 0);
  for (;;) {
    int s = 0;
    for (int o : occ) s += o;
    if (s == particles) ++total;
    std::size_t k = 0;
    while (k < sites && occ[k] == cap) occ[k++] = 0;
    if (k == sites) break;
    ++occ[k];
  }
  return total;
}

}  // namespace

TEST(FockBasis, SingleParticleTwoSites) {
  const auto b = build_fock_basis(2, 1, 1);
  ASSERT_EQ(b.dim(), 2u);
  EXPECT_EQ(b.state(0), (Occupation{1, 0}));
  EXPECT_EQ(b.state(1), (Occupation{0, 1}));
}

TEST(FockBasis, Vacuum) {
  const auto b = build_fock_basis(3, 0, 2);
  ASSERT_EQ(b.dim(), 1u);
  EXPECT_EQ(b.state(0), (Occupation{0, 0, 0}));
}

TEST(FockBasis, DimensionMatchesEnumerationOracle) {
  EXPECT_EQ(build_fock_basis(4, 2, 1).dim(), count_by_enumeration(4, 2, 1));
  for (int cap : {1, 2, 3}) {
    for (int n : {0, 2, 3, 5}) {
      if (n <= 5 * cap) {
        EXPECT_EQ(build_fock_basis(5, n, cap).dim(), count_by_enumeration(5, n, cap));
      }
    }
  }
}

TEST(FockBasis, OrderedAndUnique) {
  const auto b = build_fock_basis(5, 4, 2);
  for (std::size_t i = 1; i < b.dim(); ++i) EXPECT_TRUE(b.state(i - 1) > b.state(i));
  for (std::size_t i = 0; i < b.dim(); ++i) EXPECT_EQ(*b.index_of(b.state(i)), i);
}

TEST(FockBasis, Guards) {
  EXPECT_THROW(build_fock_basis(20, 10, 10), CapacityError);
  EXPECT_THROW(build_fock_basis(2, 3, 1), InvalidArgument);
  EXPECT_THROW(build_fock_basis(0, 0, 1), InvalidArgument);
}

TEST(Operator, StorageSelection) {
  EXPECT_TRUE(Operator::identity(600).is_sparse());
  EXPECT_TRUE(Operator::identity(100).is_sparse());  // fill 1%
  EXPECT_FALSE(Operator::identity(4).is_sparse());   // fill 25%
}

TEST(Operator, HermitianFlagChecked) {
  CMatrix a(2, 2);
  a << 0, 1, 0, 0;
  EXPECT_THROW(Operator(a, Hermiticity::kYes), ContractViolation);
  EXPECT_NO_THROW(Operator(a, Hermiticity::kNo));
}

TEST(Expectation, Basics) {
  const auto psi = StateVector::normalized(CVector::Random(5));
  EXPECT_NEAR(expectation_real(Operator::identity(5), psi), 1.0, 1e-12);
  CMatrix n1 = CMatrix::Zero(2, 2);
  n1(0, 0) = 1;
  EXPECT_NEAR(expectation_real(Operator(n1, Hermiticity::kYes), StateVector::basis_state(2, 0)), 1.0,
              0.0);
  const Operator h(random_hermitian(6, 3), Hermiticity::kYes);
  const Spectrum s = diagonalize(h);
  const StateVector v(s.vectors.col(2));
  EXPECT_NEAR(expectation_real(h, v), s.energies(2), 1e-10);
  EXPECT_NEAR(expectation_real(h, DensityMatrix::pure(v)), s.energies(2), 1e-10);
}

TEST(EvolveUnitary, ZeroHamiltonianIsIdentity) {
  const auto psi = StateVector::normalized(CVector::Random(4));
  const std::vector<double> t{0.0, 1.0, 7.5};
  for (const auto& s : evolve_unitary(Operator::zero(4), psi, t))
    EXPECT_LT((s.amplitudes() - psi.amplitudes()).norm(), 1e-14);
}

TEST(EvolveUnitary, RabiTransferMatchesAnalyticAndExpm) {
  const double v = 0.7;
  const auto h = dimer(v);
  const double tt = std::numbers::pi / (2 * v);
  const std::vector<double> times{0.3, 1.1, tt};
  const auto out = evolve_unitary(h, StateVector::basis_state(2, 0), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_NEAR(out[k].probabilities()(1), std::pow(std::sin(v * times[k]), 2), 1e-12);
    const CMatrix u = (CMatrix(-kI * times[k] * h.dense())).exp();
    EXPECT_LT((u.col(0) - out[k].amplitudes()).norm(), 1e-12);
  }
  EXPECT_NEAR(out.back().probabilities()(1), 1.0, 1e-12);
}

TEST(EvolveUnitary, ReversibilityAndEnergy) {
  const Operator h(random_hermitian(12, 5), Hermiticity::kYes);
  const auto psi = StateVector::normalized(CVector::Random(12));
  const UnitaryPropagator u(h);
  const CVector back = u.propagate(u.propagate(psi.amplitudes(), 3.7), -3.7);
  EXPECT_LT((back - psi.amplitudes()).norm(), 1e-9);
  const std::vector<double> t{0.0, 2.0, 50.0};
  const double e0 = expectation_real(h, psi);
  for (const auto& s : evolve_unitary(h, psi, t)) {
    EXPECT_NEAR(s.norm(), 1.0, 1e-9);
    EXPECT_NEAR(expectation_real(h, s), e0, 1e-8 * std::max(1.0, std::abs(e0)));
  }
}

TEST(EvolveUnitary, RejectsNonHermitian) {
  CMatrix a(2, 2);
  a << 0, 1, 0, 0;
  const std::vector<double> t{1.0};
  EXPECT_THROW(evolve_unitary(Operator(a), StateVector::basis_state(2, 0), t), ContractViolation);
}

TEST(Lindblad, ClosedLimitMatchesUnitary) {
  const Operator h(random_hermitian(4, 9), Hermiticity::kYes);
  const auto psi = StateVector::normalized(CVector::Random(4));
  const std::vector<double> t{0.5, 1.0, 4.0};
  const auto rho = evolve_lindblad(LindbladSpec::uniform_dephasing(h, 0.0), DensityMatrix::pure(psi), t);
  const auto ps = evolve_unitary(h, psi, t);
  for (std::size_t k = 0; k < t.size(); ++k)
    EXPECT_LT((rho[k].matrix() - DensityMatrix::pure(ps[k]).matrix()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lindblad, SymmetricDimerRelaxesToHalf) {
  const std::vector<double> t{200.0};
  const auto rho = evolve_lindblad(LindbladSpec::uniform_dephasing(dimer(1.0), 0.5),
                                   DensityMatrix::pure(StateVector::basis_state(2, 0)), t);
  EXPECT_NEAR(rho[0](0, 0).real(), 0.5, 1e-8);
  EXPECT_NEAR(rho[0](1, 1).real(), 0.5, 1e-8);
}

TEST(Lindblad, CoherenceDecayRateIsMeanOfSiteRates) {
  LindbladSpec s;
  s.hamiltonian = Operator::zero(2);
  s.dephasing_rates = {0.3, 0.9};
  CMatrix r0 = CMatrix::Constant(2, 2, 0.5);
  const std::vector<double> t{1.0, 2.0};
  const auto rho = evolve_lindblad(s, DensityMatrix(r0), t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_NEAR(std::abs(rho[k](0, 1)), 0.5 * std::exp(-0.6 * t[k]), 1e-12);
    EXPECT_NEAR(rho[k](0, 0).real(), 0.5, 1e-12);
  }
}

TEST(Lindblad, TraceLawAndPositivity) {
  auto s = LindbladSpec::uniform_dephasing(Operator(random_hermitian(5, 2), Hermiticity::kYes), 0.4);
  std::vector<double> t;
  for (int k = 1; k <= 20; ++k) t.push_back(0.5 * k);
  const auto rho0 = DensityMatrix::pure(StateVector::basis_state(5, 0));
  for (const auto& r : evolve_lindblad(s, rho0, t)) {
    EXPECT_NEAR(r.trace(), 1.0, 1e-8);
    EXPECT_GT(r.min_eigenvalue(), -1e-8);
  }
  s.sink = Sink{4, 1.0};
  s.recombination_rate = 0.05;
  const auto tr = lindblad_propagate(s, rho0, t);
  double prev = 1.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double tr_k = tr.states[k].trace();
    EXPECT_LE(tr_k, prev + 1e-12);
    prev = tr_k;
    EXPECT_NEAR(tr_k + tr.trapped[k] + tr.recombined[k], 1.0, 1e-10);
    EXPECT_GT(tr.states[k].min_eigenvalue(), -1e-8);
  }
}

TEST(Lindblad, Rk4PathAgreesWithSuperoperator) {
  auto s = LindbladSpec::uniform_dephasing(Operator(random_hermitian(4, 4), Hermiticity::kYes), 0.3);
  s.sink = Sink{2, 0.7};
  s.recombination_rate = 0.1;
  const std::vector<double> t{0.7, 1.4, 3.0};
  const auto rho0 = DensityMatrix::pure(StateVector::basis_state(4, 0));
  LindbladOptions rk;
  rk.superoperator_guard = 1;
  const auto a = lindblad_propagate(s, rho0, t);
  const auto b = lindblad_propagate(s, rho0, t, rk);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_LT((a.states[k].matrix() - b.states[k].matrix()).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_NEAR(a.trapped[k], b.trapped[k], 1e-7);
  }
}

TEST(Lindblad, Errors) {
  auto s = LindbladSpec::uniform_dephasing(dimer(1.0), 0.1);
  s.dephasing_rates[1] = -1.0;
  const std::vector<double> t{1.0};
  const auto rho0 = DensityMatrix::pure(StateVector::basis_state(2, 0));
  EXPECT_THROW(evolve_lindblad(s, rho0, t), InvalidArgument);
  s.dephasing_rates = {0.1};
  EXPECT_THROW(evolve_lindblad(s, rho0, t), DimensionMismatch);
  const std::vector<double> bad{2.0, 1.0};
  EXPECT_THROW(evolve_lindblad(LindbladSpec::uniform_dephasing(dimer(1.0), 0.1), rho0, bad),
               InvalidArgument);
}

TEST(Entanglement, ProductBellAndBound) {
  const auto b = build_fock_basis(2, 1, 1);
  const std::vector<std::size_t> left{0};
  EXPECT_NEAR(entanglement_entropy(StateVector::basis_state(2, 0), b, left), 0.0, 1e-10);
  CVector bell(2);
  bell << 1, 1;
  EXPECT_NEAR(entanglement_entropy(StateVector::normalized(bell), b, left), std::log(2.0), 1e-12);

  const auto b6 = build_fock_basis(6, 3, 1);
  const std::vector<std::size_t> half{0, 1, 2};
  for (int k = 0; k < 5; ++k) {
    const auto psi = StateVector::normalized(CVector::Random(static_cast<Eigen::Index>(b6.dim())));
    const double s = entanglement_entropy(psi, b6, half);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, std::log(8.0) + 1e-10);
  }
  const std::vector<std::size_t> bad{7};
  EXPECT_THROW(entanglement_entropy(StateVector::basis_state(2, 0), b, bad), InvalidArgument);
}

TEST(GapRatio, EquallySpaced) {
  std::vector<double> e{0, 1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(gap_ratio_statistics(std::span<const double>(e)).mean_r, 1.0);
  std::vector<double> two{0, 1};
  EXPECT_THROW(gap_ratio_statistics(std::span<const double>(two)), InvalidArgument);
}

TEST(GapRatio, DegenerateGapsSkipped) {
  std::vector<double> e{0, 0, 0, 1, 2};
  const auto g = gap_ratio_statistics(std::span<const double>(e));
  EXPECT_EQ(g.skipped_degenerate, 1u);
  EXPECT_EQ(g.samples, 2u);
}

// Poisson oracle: levels with i.i.d. exponential gaps.
TEST(GapRatio, PoissonSamplingOracle) {
  std::mt19937_64 g(11);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> e{0.0};
  for (int i = 0; i < 100000; ++i) e.push_back(e.back() + ex(g));
  EXPECT_NEAR(gap_ratio_statistics(std::span<const double>(e)).mean_r, 0.386, 0.01);
}

// GOE oracle: 100 real symmetric Gaussian matrices of size 200, central half of each spectrum.
TEST(GapRatio, GoeSamplingOracle) {
  std::mt19937_64 g(12);
  std::normal_distribution<double> nd;
  double sum = 0.0;
  for (int s = 0; s < 100; ++s) {
    RMatrix a(200, 200);
    for (int i = 0; i < 200; ++i)
      for (int j = 0; j < 200; ++j) a(i, j) = nd(g);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(a + a.transpose(), Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data() + 50, es.eigenvalues().data() + 150);
    sum += gap_ratio_statistics(std::span<const double>(ev)).mean_r;
  }
  EXPECT_NEAR(sum / 100, 0.53, 0.01);
}

TEST(Parallel, ResultIndependentOfJobs) {
  auto run = [](std::size_t jobs) {
    std::vector<double> out(64);
    parallel_for(out.size(), jobs, [&](std::size_t i) {
      auto r = make_stream(42, i);
      out[i] = standard_normal(r);
    });
    return out;
  };
  EXPECT_EQ(run(1), run(4));
}
