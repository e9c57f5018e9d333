#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aqsim/core/errors.hpp"
#include "aqsim/core/types.hpp"

namespace aqsim {

enum class Hermiticity { kYes, kNo, kUnknown };

/// Storage-selection thresholds for Operator.
struct StoragePolicy {
  std::size_t sparse_dimension = 512;  // always sparse above this
  double sparse_fill = 0.10;           // sparse when nnz/dim^2 is below this
};

/// Square complex matrix holding a Hamiltonian or observable.
///
/// Storage is dense or sparse depending on size and fill (see StoragePolicy);
/// the choice is invisible to callers except through is_sparse(). Operators
/// are immutable after construction.
class Operator {
 public:
  Operator() = default;

  explicit Operator(CMatrix dense, Hermiticity flag = Hermiticity::kUnknown)
      : dim_(static_cast<std::size_t>(dense.rows())), hermitian_(flag) {
    detail::require<DimensionMismatch>(dense.rows() == dense.cols(), "operator must be square");
    store(std::move(dense));
    verify_flag();
  }

  Operator(std::size_t dim, const std::vector<CTriplet>& triplets,
           Hermiticity flag = Hermiticity::kUnknown, StoragePolicy policy = {})
      : dim_(dim), hermitian_(flag) {
    CSparse sp(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    sp.setFromTriplets(triplets.begin(), triplets.end());
    sp.prune(Complex(0.0, 0.0));
    const double fill =
        dim == 0 ? 0.0 : static_cast<double>(sp.nonZeros()) / (static_cast<double>(dim) * dim);
    if (dim > policy.sparse_dimension || fill < policy.sparse_fill) {
      storage_ = std::move(sp);
    } else {
      storage_ = CMatrix(sp);
    }
    verify_flag();
  }

  static Operator identity(std::size_t dim) {
    std::vector<CTriplet> t;
    t.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) t.emplace_back(i, i, 1.0);
    return Operator(dim, t, Hermiticity::kYes);
  }

  static Operator zero(std::size_t dim) { return Operator(dim, {}, Hermiticity::kYes); }

  std::size_t dim() const { return dim_; }
  bool is_sparse() const { return std::holds_alternative<CSparse>(storage_); }
  Hermiticity hermitian_flag() const { return hermitian_; }

  CMatrix dense() const {
    if (auto* d = std::get_if<CMatrix>(&storage_)) return *d;
    return CMatrix(std::get<CSparse>(storage_));
  }

  CSparse sparse() const {
    if (auto* s = std::get_if<CSparse>(&storage_)) return *s;
    return std::get<CMatrix>(storage_).sparseView();
  }

  CVector apply(const CVector& v) const {
    detail::require<DimensionMismatch>(static_cast<std::size_t>(v.size()) == dim_,
                                       "operator/vector dimension mismatch");
    return std::visit([&](const auto& m) -> CVector { return m * v; }, storage_);
  }

  Complex at(std::size_t r, std::size_t c) const {
    if (auto* d = std::get_if<CMatrix>(&storage_)) return (*d)(r, c);
    return std::get<CSparse>(storage_).coeff(static_cast<Eigen::Index>(r),
                                             static_cast<Eigen::Index>(c));
  }

  double max_abs_entry() const {
    return std::visit(
        [](const auto& m) {
          double best = 0.0;
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, CMatrix>) {
            if (m.size() > 0) best = m.cwiseAbs().maxCoeff();
          } else {
            for (int k = 0; k < m.outerSize(); ++k)
              for (typename CSparse::InnerIterator it(m, k); it; ++it)
                best = std::max(best, std::abs(it.value()));
          }
          return best;
        },
        storage_);
  }

  /// max |A - A^dagger| relative to the largest entry magnitude.
  double hermiticity_defect() const {
    const double scale = max_abs_entry();
    if (scale == 0.0) return 0.0;
    const CMatrix d = dense();
    return (d - d.adjoint()).cwiseAbs().maxCoeff() / scale;
  }

  bool is_hermitian(double rel_tol = 1e-12) const { return hermiticity_defect() <= rel_tol; }

  Operator operator+(const Operator& other) const {
    detail::require<DimensionMismatch>(other.dim_ == dim_, "operator sum dimension mismatch");
    const Hermiticity h = (hermitian_ == Hermiticity::kYes && other.hermitian_ == Hermiticity::kYes)
                              ? Hermiticity::kYes
                              : Hermiticity::kUnknown;
    if (is_sparse() && other.is_sparse()) return from_sparse(sparse() + other.sparse(), h);
    return Operator(CMatrix(dense() + other.dense()), h);
  }

  Operator scaled(double s) const {
    const Hermiticity h = hermitian_ == Hermiticity::kYes ? Hermiticity::kYes : hermitian_;
    if (is_sparse()) return from_sparse(CSparse(sparse() * Complex(s, 0.0)), h);
    return Operator(CMatrix(dense() * s), h);
  }

 private:
  static Operator from_sparse(CSparse sp, Hermiticity h) {
    Operator op;
    op.dim_ = static_cast<std::size_t>(sp.rows());
    op.hermitian_ = h;
    op.storage_ = std::move(sp);
    return op;
  }

  void store(CMatrix dense) { storage_ = std::move(dense); }

  void verify_flag() const {
    if (hermitian_ == Hermiticity::kYes && !is_hermitian(1e-12)) {
      throw ContractViolation("operator flagged hermitian but max|A - A^dagger| exceeds 1e-12");
    }
  }

  std::size_t dim_ = 0;
  Hermiticity hermitian_ = Hermiticity::kUnknown;
  std::variant<CMatrix, CSparse> storage_ = CMatrix();
};

/// Normalized pure state.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-10;

  StateVector() = default;

  explicit StateVector(CVector amplitudes, double tol = kNormTolerance)
      : amplitudes_(std::move(amplitudes)) {
    const double n = amplitudes_.norm();
    if (std::abs(n - 1.0) > tol) {
      throw ContractViolation("state vector norm " + std::to_string(n) + " differs from 1");
    }
  }

  /// Normalizes the given amplitudes; zero vectors are rejected.
  static StateVector normalized(CVector amplitudes) {
    const double n = amplitudes.norm();
    detail::require<ContractViolation>(n > 0.0, "cannot normalize a zero vector");
    return StateVector(amplitudes / n);
  }

  static StateVector basis_state(std::size_t dim, std::size_t index) {
    detail::require(index < dim, "basis index out of range");
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v));
  }

  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const CVector& amplitudes() const { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }

  /// |amplitude|^2 per basis state.
  RVector probabilities() const { return amplitudes_.cwiseAbs2(); }

 private:
  CVector amplitudes_;
};

/// Density matrix. Trace may fall below one when a sink drains population.
class DensityMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  DensityMatrix() = default;

  explicit DensityMatrix(CMatrix m) : matrix_(std::move(m)) {
    detail::require<DimensionMismatch>(matrix_.rows() == matrix_.cols(),
                                       "density matrix must be square");
  }

  static DensityMatrix pure(const StateVector& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const CMatrix& matrix() const { return matrix_; }
  Complex operator()(std::size_t r, std::size_t c) const {
    return matrix_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  double trace() const { return matrix_.trace().real(); }
  double hermiticity_defect() const { return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    const CMatrix h = 0.5 * (matrix_ + matrix_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  RVector populations() const { return matrix_.diagonal().real(); }

  /// Checks hermiticity, unit trace (unless allow_trace_loss) and positivity.
  void validate(bool allow_trace_loss = false, double tol = kTolerance) const {
    if (hermiticity_defect() > tol) throw ContractViolation("density matrix is not hermitian");
    const double tr = trace();
    if (!allow_trace_loss && std::abs(tr - 1.0) > tol)
      throw ContractViolation("density matrix trace " + std::to_string(tr) + " differs from 1");
    if (allow_trace_loss && tr > 1.0 + tol) throw ContractViolation("density matrix trace exceeds 1");
    if (min_eigenvalue() < -tol) throw ContractViolation("density matrix has a negative eigenvalue");
  }

 private:
  CMatrix matrix_;
};

/// <psi|A|psi>.
inline Complex expectation(const Operator& op, const StateVector& psi) {
  detail::require<DimensionMismatch>(op.dim() == psi.dim(), "expectation dimension mismatch");
  return psi.amplitudes().dot(op.apply(psi.amplitudes()));
}

/// Tr(A rho).
inline Complex expectation(const Operator& op, const DensityMatrix& rho) {
  detail::require<DimensionMismatch>(op.dim() == rho.dim(), "expectation dimension mismatch");
  if (op.is_sparse()) return CMatrix(op.sparse() * rho.matrix()).trace();
  return (op.dense() * rho.matrix()).trace();
}

/// Real expectation of a hermitian operator; the imaginary part must vanish to 1e-10.
template <class State>
double expectation_real(const Operator& op, const State& state) {
  const Complex v = expectation(op, state);
  const double scale = std::max(1.0, std::abs(v));
  if (std::abs(v.imag()) > 1e-10 * scale) {
    throw ContractViolation("expectation of a hermitian operator has imaginary part " +
                            std::to_string(v.imag()));
  }
  return v.real();
}

}  // namespace aqsim
