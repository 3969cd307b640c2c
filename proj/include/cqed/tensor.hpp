#pragma once

// Dense complex linear algebra over small tensor-product Hilbert spaces.
//
// Index convention is slot-major: slot 0 varies slowest, the last slot
// fastest, so that kron(A, B) acting on |i_A>|i_B> has flat index
// i_A * dim_B + i_B.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

namespace tolerance {
inline constexpr double kHermitian = 1e-10;  // relative to max(1, ||H||)
inline constexpr double kUnitary = 1e-10;
inline constexpr double kEigenResidual = 1e-8;
inline constexpr double kNorm = 1e-10;
}  // namespace tolerance

/// Ordered subsystem dimensions defining the tensor index layout.
class SpaceDescriptor {
 public:
  SpaceDescriptor() = default;

  explicit SpaceDescriptor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("SpaceDescriptor: no slots");
    for (std::size_t d : dims_) {
      if (d < 2) throw std::invalid_argument("SpaceDescriptor: every slot needs dim >= 2");
    }
    total_ = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>{});
  }

  std::span<const std::size_t> dims() const { return dims_; }
  std::size_t slot_count() const { return dims_.size(); }
  std::size_t dim(std::size_t slot) const { return dims_.at(slot); }
  std::size_t total_dim() const { return total_; }

  /// Flat index of a product basis state given one level per slot.
  std::size_t index(std::span<const std::size_t> levels) const {
    if (levels.size() != dims_.size()) throw std::invalid_argument("SpaceDescriptor::index: wrong slot count");
    std::size_t idx = 0;
    for (std::size_t s = 0; s < dims_.size(); ++s) {
      if (levels[s] >= dims_[s]) throw std::out_of_range("SpaceDescriptor::index: level out of range");
      idx = idx * dims_[s] + levels[s];
    }
    return idx;
  }
  std::size_t index(std::initializer_list<std::size_t> levels) const {
    return index(std::span<const std::size_t>(levels.begin(), levels.size()));
  }

  /// Inverse of index().
  std::vector<std::size_t> levels(std::size_t flat) const {
    if (flat >= total_) throw std::out_of_range("SpaceDescriptor::levels: index out of range");
    std::vector<std::size_t> out(dims_.size());
    for (std::size_t s = dims_.size(); s-- > 0;) {
      out[s] = flat % dims_[s];
      flat /= dims_[s];
    }
    return out;
  }

  bool operator==(const SpaceDescriptor&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_ = 0;
};

namespace detail {

inline double hermitian_defect(const Matrix& m) {
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() / scale;
}

inline void require_square(const Matrix& m, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != n || static_cast<std::size_t>(m.cols()) != n) {
    throw std::invalid_argument(std::string(what) + ": matrix size does not match space");
  }
}

inline void require_hermitian(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": matrix not square");
  if (hermitian_defect(m) > tolerance::kHermitian) {
    throw std::domain_error(std::string(what) + ": matrix is not Hermitian");
  }
}

}  // namespace detail

/// Square operator over a SpaceDescriptor.
class DenseOperator {
 public:
  DenseOperator(SpaceDescriptor space, Matrix entries) : space_(std::move(space)), m_(std::move(entries)) {
    detail::require_square(m_, space_.total_dim(), "DenseOperator");
  }

  static DenseOperator zero(const SpaceDescriptor& space) {
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    return {space, Matrix::Zero(n, n)};
  }
  static DenseOperator identity(const SpaceDescriptor& space) {
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    return {space, Matrix::Identity(n, n)};
  }

  const SpaceDescriptor& space() const { return space_; }
  const Matrix& matrix() const { return m_; }

  DenseOperator adjoint() const { return {space_, m_.adjoint()}; }
  bool is_hermitian(double tol = tolerance::kHermitian) const { return detail::hermitian_defect(m_) <= tol; }

  friend DenseOperator operator+(const DenseOperator& a, const DenseOperator& b) {
    check_same(a, b);
    return {a.space_, a.m_ + b.m_};
  }
  friend DenseOperator operator-(const DenseOperator& a, const DenseOperator& b) {
    check_same(a, b);
    return {a.space_, a.m_ - b.m_};
  }
  friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
    check_same(a, b);
    return {a.space_, a.m_ * b.m_};
  }
  friend DenseOperator operator*(Complex s, const DenseOperator& a) { return {a.space_, s * a.m_}; }
  friend DenseOperator operator*(double s, const DenseOperator& a) { return {a.space_, s * a.m_}; }

 private:
  static void check_same(const DenseOperator& a, const DenseOperator& b) {
    if (!(a.space_ == b.space_)) throw std::invalid_argument("DenseOperator: mismatched spaces");
  }

  SpaceDescriptor space_;
  Matrix m_;
};

/// Normalized pure state.
class StateVector {
 public:
  StateVector(SpaceDescriptor space, Vector amplitudes) : space_(std::move(space)), v_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(v_.size()) != space_.total_dim()) {
      throw std::invalid_argument("StateVector: length does not match space");
    }
    if (std::abs(v_.norm() - 1.0) > tolerance::kNorm) throw std::domain_error("StateVector: not normalized");
  }

  static StateVector normalized(SpaceDescriptor space, Vector amplitudes) {
    const double n = amplitudes.norm();
    if (n == 0.0) throw std::domain_error("StateVector: zero vector");
    return {std::move(space), amplitudes / n};
  }

  static StateVector basis(const SpaceDescriptor& space, std::initializer_list<std::size_t> levels) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.total_dim()));
    v(static_cast<Eigen::Index>(space.index(levels))) = 1.0;
    return {space, std::move(v)};
  }

  const SpaceDescriptor& space() const { return space_; }
  const Vector& amplitudes() const { return v_; }
  Complex amplitude(std::initializer_list<std::size_t> levels) const {
    return v_(static_cast<Eigen::Index>(space_.index(levels)));
  }

 private:
  SpaceDescriptor space_;
  Vector v_;
};

/// Hermitian density matrix. Trace and positivity are reported, not enforced,
/// since an integrator may drift within its own tolerances.
class DensityMatrix {
 public:
  DensityMatrix(SpaceDescriptor space, Matrix entries) : space_(std::move(space)), m_(std::move(entries)) {
    detail::require_square(m_, space_.total_dim(), "DensityMatrix");
    detail::require_hermitian(m_, "DensityMatrix");
  }

  static DensityMatrix from_pure(const StateVector& psi) {
    const Vector& v = psi.amplitudes();
    return {psi.space(), v * v.adjoint()};
  }

  const SpaceDescriptor& space() const { return space_; }
  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }
  double purity() const { return (m_ * m_).trace().real(); }
  double expectation(const DenseOperator& op) const { return (m_ * op.matrix()).trace().real(); }

 private:
  SpaceDescriptor space_;
  Matrix m_;
};

/// Kronecker product, row-major: (A ⊗ B)(i_A*dB + i_B, j_A*dB + j_B) = A(i_A,j_A) B(i_B,j_B).
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  std::vector<std::size_t> dims(a.space().dims().begin(), a.space().dims().end());
  dims.insert(dims.end(), b.space().dims().begin(), b.space().dims().end());
  return {SpaceDescriptor(std::move(dims)), kron(a.matrix(), b.matrix())};
}

/// Places `op` on `slot`, identity everywhere else.
inline DenseOperator embed(const Matrix& op, std::size_t slot, const SpaceDescriptor& space) {
  if (slot >= space.slot_count()) throw std::out_of_range("embed: slot out of range");
  const auto d = static_cast<Eigen::Index>(space.dim(slot));
  if (op.rows() != d || op.cols() != d) throw std::invalid_argument("embed: operator dimension does not match slot");

  std::size_t left = 1;
  for (std::size_t s = 0; s < slot; ++s) left *= space.dim(s);
  const std::size_t right = space.total_dim() / (left * space.dim(slot));

  Matrix out = kron(Matrix::Identity(static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(left)), op);
  out = kron(out, Matrix::Identity(static_cast<Eigen::Index>(right), static_cast<Eigen::Index>(right)));
  return {space, std::move(out)};
}

struct HermitianEigensystem {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // columns
};

inline HermitianEigensystem hermitian_eigensystem(const Matrix& m) {
  detail::require_hermitian(m, "hermitian_eigensystem");
  // Solve on the exactly-Hermitian part so round-off asymmetry does not leak in.
  const Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eigensystem: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Ascending real eigenvalues of a Hermitian matrix.
inline std::vector<double> hermitian_eigenvalues(const Matrix& m) {
  const auto es = hermitian_eigensystem(m);
  return {es.values.data(), es.values.data() + es.values.size()};
}

/// exp(-i H t) through the spectral decomposition of H.
inline DenseOperator unitary_propagator(const DenseOperator& h, double t) {
  const auto es = hermitian_eigensystem(h.matrix());
  Vector phases(es.values.size());
  for (Eigen::Index k = 0; k < es.values.size(); ++k) phases(k) = std::exp(-kI * es.values(k) * t);
  return {h.space(), es.vectors * phases.asDiagonal() * es.vectors.adjoint()};
}

/// Reduced matrix on the `keep` slots (listed in any order; output uses ascending slot order).
inline Matrix partial_trace(const Matrix& rho, const SpaceDescriptor& space, std::vector<std::size_t> keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.back() >= space.slot_count()) throw std::out_of_range("partial_trace: slot out of range");
  detail::require_square(rho, space.total_dim(), "partial_trace");

  std::vector<std::size_t> traced;
  for (std::size_t s = 0; s < space.slot_count(); ++s) {
    if (!std::binary_search(keep.begin(), keep.end(), s)) traced.push_back(s);
  }
  std::size_t kept_dim = 1;
  for (std::size_t s : keep) kept_dim *= space.dim(s);
  std::size_t traced_dim = 1;
  for (std::size_t s : traced) traced_dim *= space.dim(s);

  // full[k][t]: flat index for kept-multi-index k and traced-multi-index t.
  std::vector<std::size_t> full(kept_dim * traced_dim);
  std::vector<std::size_t> levels(space.slot_count());
  for (std::size_t k = 0; k < kept_dim; ++k) {
    std::size_t rem = k;
    for (std::size_t i = keep.size(); i-- > 0;) {
      levels[keep[i]] = rem % space.dim(keep[i]);
      rem /= space.dim(keep[i]);
    }
    for (std::size_t t = 0; t < traced_dim; ++t) {
      rem = t;
      for (std::size_t i = traced.size(); i-- > 0;) {
        levels[traced[i]] = rem % space.dim(traced[i]);
        rem /= space.dim(traced[i]);
      }
      full[k * traced_dim + t] = space.index(levels);
    }
  }

  const auto n = static_cast<Eigen::Index>(kept_dim);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t a = 0; a < kept_dim; ++a) {
    for (std::size_t b = 0; b < kept_dim; ++b) {
      Complex acc{0.0, 0.0};
      for (std::size_t t = 0; t < traced_dim; ++t) {
        acc += rho(static_cast<Eigen::Index>(full[a * traced_dim + t]),
                   static_cast<Eigen::Index>(full[b * traced_dim + t]));
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
    }
  }
  return out;
}

inline Matrix partial_trace(const DensityMatrix& rho, std::vector<std::size_t> keep) {
  return partial_trace(rho.matrix(), rho.space(), std::move(keep));
}

}  // namespace cqed
