#pragma once

// Entangling schedule: laser pulses on the 1<->2 transition plus
// piecewise-constant voltage detuning segments.

#include "cqed/model.hpp"

#include <numbers>
#include <vector>

namespace cqed {

/// Rotation exp(-i (angle/2)(|1><2| + |2><1|)) on one dot.
struct PulseSpec {
  std::size_t target_dot = 0;
  double angle = std::numbers::pi;
};

struct Segment {
  double delta = 0.0;     // detuning, units of g
  double duration = 0.0;  // units of 1/g
};

struct Schedule {
  std::vector<PulseSpec> pre_pulses;
  std::vector<Segment> segments;
  std::vector<PulseSpec> post_pulses;

  double total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }

  void validate(const ModelParams& params) const {
    for (const auto& s : segments) {
      if (!(s.duration >= 0.0)) throw std::invalid_argument("Schedule: negative segment duration");
    }
    for (const auto* list : {&pre_pulses, &post_pulses}) {
      for (const auto& p : *list) {
        if (p.target_dot >= params.dot_count) throw std::out_of_range("Schedule: pulse targets a missing dot");
      }
    }
  }
};

/// π-pulse on A, A resonant for π/2g (photon out), B resonant for π/g
/// (full Rabi cycle), A resonant for π/2g (photon back), π-pulse on A.
inline Schedule canonical_entangling_schedule(const ModelParams& params) {
  params.validate();
  if (params.dot_count != 2) throw std::invalid_argument("canonical_entangling_schedule: needs exactly two dots");
  const double half = std::numbers::pi / (2.0 * params.g);
  const double full = std::numbers::pi / params.g;
  const double resonant_a = params.delta_omega[0];
  const double resonant_b = params.delta_omega[1];
  Schedule s;
  s.pre_pulses = {PulseSpec{0, std::numbers::pi}};
  s.segments = {{resonant_a, half}, {resonant_b, full}, {resonant_a, half}};
  s.post_pulses = {PulseSpec{0, std::numbers::pi}};
  return s;
}

inline DenseOperator pulse_unitary(const PulseSpec& spec, const SpaceDescriptor& space) {
  const double c = std::cos(spec.angle / 2.0);
  const double s = std::sin(spec.angle / 2.0);
  Matrix u = Matrix::Zero(kDotDim, kDotDim);
  u(0, 0) = 1.0;
  u(1, 1) = c;
  u(2, 2) = c;
  u(1, 2) = -kI * s;
  u(2, 1) = -kI * s;
  return embed(u, spec.target_dot, space);
}

namespace detail {
inline void require_two_dots(const SpaceDescriptor& space, const char* what) {
  if (space.slot_count() != 3 || space.dim(0) != kDotDim || space.dim(1) != kDotDim) {
    throw std::invalid_argument(std::string(what) + ": expected a two-dot space [3, 3, n_max+1]");
  }
}
}  // namespace detail

/// (|0> + |1>)(|0> + |1>)|vac> / 2
inline StateVector initial_state(const SpaceDescriptor& space) {
  detail::require_two_dots(space, "initial_state");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(space.total_dim()));
  for (std::size_t a : {0u, 1u}) {
    for (std::size_t b : {0u, 1u}) v(static_cast<Eigen::Index>(space.index({a, b, 0}))) = 0.5;
  }
  return {space, std::move(v)};
}

inline StateVector basis_input(std::size_t bit_a, std::size_t bit_b, const SpaceDescriptor& space) {
  detail::require_two_dots(space, "basis_input");
  if (bit_a > 1 || bit_b > 1) throw std::out_of_range("basis_input: qubit values must be 0 or 1");
  return StateVector::basis(space, {bit_a, bit_b, 0});
}

/// Deterministic detuning phase accumulated by |1> of each dot over the
/// schedule, -sum (delta - Δω_d) * duration. Resonant segments contribute
/// nothing, so this is exact for the canonical schedule irrespective of
/// when the exchanged photon is emitted.
inline std::vector<double> local_detuning_phases(const Schedule& schedule, const ModelParams& params) {
  std::vector<double> phases(params.dot_count, 0.0);
  for (std::size_t d = 0; d < params.dot_count; ++d) {
    for (const auto& seg : schedule.segments) phases[d] -= (seg.delta - params.delta_omega[d]) * seg.duration;
  }
  return phases;
}

}  // namespace cqed
