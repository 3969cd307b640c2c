#pragma once

// System operators for N three-level dots coupled to one cavity mode.
//
// Level labels: |1> is the ground state, |0> the dark excited state (the
// qubit partner of |1>), |2> the auxiliary level dipole-coupled to |1>.
// All rates and frequencies are in units of g.

#include "cqed/tensor.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cqed {

inline constexpr std::size_t kDotDim = 3;

struct ModelParams {
  double g = 1.0;
  std::vector<double> delta_omega{20.0, 0.0};  // per-dot offsets; dot A first
  std::size_t n_max = 2;
  std::size_t dot_count = 2;

  void validate() const {
    if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("model.g must be > 0");
    if (n_max < 1) throw std::invalid_argument("model.n_max must be >= 1");
    if (dot_count < 1) throw std::invalid_argument("model.dot_count must be >= 1");
    if (delta_omega.size() != dot_count) {
      throw std::invalid_argument("model.delta_omega must have dot_count entries");
    }
    for (double d : delta_omega) {
      if (!std::isfinite(d)) throw std::invalid_argument("model.delta_omega must be finite");
    }
  }

  std::size_t cavity_slot() const { return dot_count; }

  SpaceDescriptor space() const {
    std::vector<std::size_t> dims(dot_count, kDotDim);
    dims.push_back(n_max + 1);
    return SpaceDescriptor(std::move(dims));
  }

  /// True when the two-dot offset is large against the coupling (ratio >= 10).
  bool detuning_well_separated() const {
    if (dot_count != 2) return true;
    return std::abs(delta_omega[0] - delta_omega[1]) / g >= 10.0;
  }
};

enum class NoiseKind { None, DephasingQubit, RadiativeDecay, CavityLoss };

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::DephasingQubit: return "dephasing";
    case NoiseKind::RadiativeDecay: return "radiative_decay";
    case NoiseKind::CavityLoss: return "cavity_loss";
  }
  return "none";
}

inline std::optional<NoiseKind> noise_kind_from_string(std::string_view s) {
  for (auto k : {NoiseKind::None, NoiseKind::DephasingQubit, NoiseKind::RadiativeDecay, NoiseKind::CavityLoss}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

struct NoiseConfig {
  NoiseKind kind = NoiseKind::None;
  double gamma = 0.0;  // Γ in units of g

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("noise.gamma must be >= 0");
  }
  bool is_noiseless() const { return kind == NoiseKind::None || gamma == 0.0; }
};

/// Physical scale used only to convert dimensionless results in reports.
struct PhysicalCalibration {
  double g_physical = 1e9;     // 1/s
  double q_factor = 1e9;
  double vacuum_field = 150.0;  // V/cm

  void validate() const {
    if (!(g_physical > 0.0 && q_factor > 0.0 && vacuum_field > 0.0)) {
      throw std::invalid_argument("calibration values must be positive");
    }
  }
  /// Time given in units of 1/g, converted to seconds.
  double seconds(double dimensionless_time) const { return dimensionless_time / g_physical; }
  double rate_per_second(double rate_over_g) const { return rate_over_g * g_physical; }
};

/// |i><j| on a single dot.
inline Matrix dot_projector(std::size_t i, std::size_t j) {
  if (i >= kDotDim || j >= kDotDim) throw std::out_of_range("dot_projector: level must be 0, 1 or 2");
  Matrix m = Matrix::Zero(kDotDim, kDotDim);
  m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  return m;
}

/// Truncated cavity lowering operator, <n-1|a|n> = sqrt(n).
inline Matrix annihilation(std::size_t n_max) {
  if (n_max < 1) throw std::invalid_argument("annihilation: n_max must be >= 1");
  const auto d = static_cast<Eigen::Index>(n_max + 1);
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// Rotating-frame Hamiltonian at instantaneous detuning `delta`:
///   H = sum_d i g (|2><1|_d a - |1><2|_d a†) + sum_d (delta - Δω_d) |1><1|_d
inline DenseOperator build_hamiltonian(const ModelParams& params, double delta) {
  params.validate();
  const SpaceDescriptor space = params.space();
  const Matrix a = embed(annihilation(params.n_max), params.cavity_slot(), space).matrix();
  const Matrix a_dag = a.adjoint();

  const auto n = static_cast<Eigen::Index>(space.total_dim());
  Matrix h = Matrix::Zero(n, n);
  for (std::size_t d = 0; d < params.dot_count; ++d) {
    const Matrix raise = embed(dot_projector(2, 1), d, space).matrix();
    const Matrix lower = embed(dot_projector(1, 2), d, space).matrix();
    h += kI * params.g * (raise * a - lower * a_dag);
    h += (delta - params.delta_omega[d]) * embed(dot_projector(1, 1), d, space).matrix();
  }
  return {space, std::move(h)};
}

/// Jump operators for one noise family; each already carries sqrt(Γ).
inline std::vector<DenseOperator> build_lindblads(const NoiseConfig& noise, const ModelParams& params) {
  noise.validate();
  const SpaceDescriptor space = params.space();
  const double amp = std::sqrt(noise.gamma);
  std::vector<DenseOperator> out;
  switch (noise.kind) {
    case NoiseKind::None:
      break;
    case NoiseKind::DephasingQubit:
      for (std::size_t d = 0; d < params.dot_count; ++d) out.push_back(amp * embed(dot_projector(0, 0), d, space));
      break;
    case NoiseKind::RadiativeDecay:
      for (std::size_t d = 0; d < params.dot_count; ++d) out.push_back(amp * embed(dot_projector(1, 2), d, space));
      break;
    case NoiseKind::CavityLoss:
      out.push_back(amp * embed(annihilation(params.n_max), params.cavity_slot(), space));
      break;
  }
  return out;
}

/// N = a†a + sum_d |2><2|_d, conserved by the exchange Hamiltonian.
inline DenseOperator excitation_number(const ModelParams& params) {
  const SpaceDescriptor space = params.space();
  const Matrix a = annihilation(params.n_max);
  DenseOperator n = embed(a.adjoint() * a, params.cavity_slot(), space);
  for (std::size_t d = 0; d < params.dot_count; ++d) n = n + embed(dot_projector(2, 2), d, space);
  return n;
}

/// Projector onto the top retained Fock level n = n_max.
inline DenseOperator top_fock_projector(const ModelParams& params) {
  const auto d = static_cast<Eigen::Index>(params.n_max + 1);
  Matrix p = Matrix::Zero(d, d);
  p(d - 1, d - 1) = 1.0;
  return embed(p, params.cavity_slot(), params.space());
}

}  // namespace cqed
