#pragma once

// Two-qubit reduction of the dot pair and Wootters concurrence / entanglement of formation.

#include "cqed/tensor.hpp"

#include <array>
#include <cmath>

namespace cqed {

struct TwoQubitState {
  Eigen::Matrix4cd rho;  // basis |00>, |01>, |10>, |11> over dot levels {0, 1}
  double leakage = 0.0;  // population outside the qubit subspace before renormalization
};

struct EntanglementReport {
  double concurrence = 0.0;
  double eof = 0.0;
  double leakage = 0.0;
};

inline constexpr double kClampTolerance = 1e-9;

/// Traces out the cavity, projects each dot onto span{|0>, |1>} and renormalizes.
inline TwoQubitState reduce_to_qubits(const Matrix& rho_full, const SpaceDescriptor& space) {
  if (space.slot_count() != 3 || space.dim(0) != 3 || space.dim(1) != 3) {
    throw std::invalid_argument("reduce_to_qubits: expected a two-dot space");
  }
  const Matrix dots = partial_trace(rho_full, space, {0, 1});
  constexpr std::array<Eigen::Index, 4> kQubitIndex{0, 1, 3, 4};  // 3*a + b for a, b in {0, 1}
  Eigen::Matrix4cd r;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) r(i, j) = dots(kQubitIndex[i], kQubitIndex[j]);
  }
  const double inside = r.trace().real();
  const double full = dots.trace().real();
  if (!(inside > 1e-14)) throw std::domain_error("reduce_to_qubits: no support on the qubit subspace");

  TwoQubitState out;
  out.leakage = std::clamp(1.0 - inside / full, 0.0, 1.0);
  r /= inside;
  r = 0.5 * (r + r.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(r);
  Eigen::Vector4d w = es.eigenvalues();
  if (w(0) < -kClampTolerance) throw std::domain_error("reduce_to_qubits: reduced state is not positive");
  if (w(0) < 0.0) {
    w = w.cwiseMax(0.0);
    r = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
    r /= r.trace().real();
  }
  out.rho = r;
  return out;
}

inline TwoQubitState reduce_to_qubits(const DensityMatrix& rho) { return reduce_to_qubits(rho.matrix(), rho.space()); }

/// Spin-flipped state (σy ⊗ σy) ρ* (σy ⊗ σy).
/// σy⊗σy in the {00, 01, 10, 11} basis.
inline Eigen::Matrix4cd spin_flip_operator() {
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  return yy;
}

/// ρ̃ = (σy⊗σy) ρ* (σy⊗σy).
inline Eigen::Matrix4cd spin_flip(const Eigen::Matrix4cd& rho) {
  const Eigen::Matrix4cd yy = spin_flip_operator();
  return yy * rho.conjugate() * yy;
}

/// Wootters concurrence. With ρ = W W† (W = V √D from the spectral
/// decomposition), the λ_i are the singular values of the complex symmetric
/// τ = Wᵀ (σy⊗σy) W, read off as the non-negative eigenvalues of the
/// Hermitian dilation [[0, τ], [τ†, 0]]. Going through λ_i² instead (for
/// example the spectrum of √ρ ρ̃ √ρ) turns round-off near zero into errors of
/// order 1e-8 on rank-deficient states.
inline double concurrence(const Eigen::Matrix4cd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (rho + rho.adjoint()));
  const Eigen::Vector4d sqrt_w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix4cd w = es.eigenvectors() * sqrt_w.asDiagonal();
  const Eigen::Matrix4cd tau = w.transpose() * spin_flip_operator() * w;

  Eigen::Matrix<Complex, 8, 8> dilation = Eigen::Matrix<Complex, 8, 8>::Zero();
  dilation.topRightCorner<4, 4>() = tau;
  dilation.bottomLeftCorner<4, 4>() = tau.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, 8, 8>> ds(dilation, Eigen::EigenvaluesOnly);
  const Eigen::Vector4d lam = ds.eigenvalues().tail<4>().cwiseMax(0.0);  // ascending
  const double c = lam(3) - lam(2) - lam(1) - lam(0);
  return std::clamp(c, 0.0, 1.0);
}

inline double concurrence(const TwoQubitState& state) { return concurrence(state.rho); }

/// h(x) = -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0.
inline double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  if (x == 0.5) return 1.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

inline double entanglement_of_formation(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - c * c)));
}

inline EntanglementReport analyze(const DensityMatrix& rho) {
  const TwoQubitState q = reduce_to_qubits(rho);
  const double c = concurrence(q);
  return {c, entanglement_of_formation(c), q.leakage};
}

}  // namespace cqed
