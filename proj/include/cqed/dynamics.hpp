#pragma once

// Time evolution over piecewise-constant schedules.
//
// Noiseless runs propagate the state vector exactly with exp(-iHt) per
// segment. Noisy runs integrate
//
//   dρ/dt = -i[H, ρ] + sum_k (2 L_k ρ L_k† - L_k† L_k ρ - ρ L_k† L_k)
//
// with fixed-step RK4 in the interaction picture of each segment's constant H.
// Note the factor 2 on the sandwich term: a lone jump operator sqrt(Γ)|g><e|
// empties |e> at rate 2Γ.

#include "cqed/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

namespace cqed {

struct IntegratorConfig {
  double dt = 1e-3;
  double positivity_tolerance = 1e-7;
  double trace_tolerance = 1e-8;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("integrator.dt must be > 0");
    if (!(positivity_tolerance > 0.0)) throw std::invalid_argument("integrator.positivity_tolerance must be > 0");
    if (!(trace_tolerance > 0.0)) throw std::invalid_argument("integrator.trace_tolerance must be > 0");
  }
};

struct Diagnostics {
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  double max_top_fock_population = 0.0;
  std::size_t steps_taken = 0;
  bool failed = false;
  std::string failure;
};

template <class State>
struct EvolutionResult {
  State final_state;
  Diagnostics diagnostics;
};

/// Called at the start of every segment and after every RK4 step.
using MasterObserver = std::function<void(std::size_t segment, double time, const Matrix& rho)>;

namespace detail {

inline std::vector<Eigen::Index> top_fock_indices(const ModelParams& params) {
  const SpaceDescriptor space = params.space();
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < space.total_dim(); ++i) {
    if (space.levels(i).back() == params.n_max) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

inline double top_fock_population(const Matrix& rho, const std::vector<Eigen::Index>& idx) {
  double p = 0.0;
  for (auto i : idx) p += rho(i, i).real();
  return p;
}

inline double top_fock_population(const Vector& psi, const std::vector<Eigen::Index>& idx) {
  double p = 0.0;
  for (auto i : idx) p += std::norm(psi(i));
  return p;
}

inline double min_eigenvalue(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

inline std::string format_exp(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline std::size_t step_count(double duration, double dt) {
  if (duration <= 0.0) return 0;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)));
}

}  // namespace detail

/// Master-equation right-hand side split for integration in the interaction
/// picture of a constant H. Everything is held in the eigenbasis of H, where
/// the coherent part is the elementwise phase (U X U†)_jk = e^{-i(E_j-E_k)τ} X_jk
/// and only the dissipator is left to the integrator.
class LindbladGenerator {
 public:
  LindbladGenerator(const Matrix& h, const std::vector<Matrix>& jumps) {
    const auto es = hermitian_eigensystem(h);
    energies_ = es.values;
    basis_ = es.vectors;
    const auto n = h.rows();
    decay_ = Matrix::Zero(n, n);
    for (const auto& l : jumps) {
      Matrix le = basis_.adjoint() * l * basis_;
      decay_.noalias() += le.adjoint() * le;
      jumps_adj_.push_back(le.adjoint());
      jumps_.push_back(std::move(le));
    }
    scratch_.resize(n, n);
  }

  /// Columns are the eigenvectors of H; lab = V X V†.
  const Matrix& basis() const { return basis_; }
  bool dissipative() const { return !jumps_.empty(); }

  /// e^{-i(E_j - E_k)τ}.
  Matrix phases(double tau) const {
    const auto n = energies_.size();
    Vector d(n);
    for (Eigen::Index k = 0; k < n; ++k) d(k) = std::exp(-kI * energies_(k) * tau);
    return d * d.adjoint();
  }

  /// sum_k 2 L x L† - {L†L, x} for Hermitian x, in the eigenbasis of H.
  void dissipate(const Matrix& x, Matrix& out) {
    scratch_.noalias() = decay_ * x;
    out = -(scratch_ + scratch_.adjoint());
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
      scratch_.noalias() = jumps_[j] * x;
      out.noalias() += 2.0 * scratch_ * jumps_adj_[j];
    }
  }

  /// Full right-hand side -i[H, x] + D(x), in the eigenbasis of H.
  void apply(const Matrix& x, Matrix& out) {
    dissipate(x, out);
    const auto n = energies_.size();
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j) out(j, k) -= kI * (energies_(j) - energies_(k)) * x(j, k);
  }

 private:
  Vector energies_;
  Matrix basis_;
  Matrix decay_;  // sum L†L
  std::vector<Matrix> jumps_;
  std::vector<Matrix> jumps_adj_;
  Matrix scratch_;
};

/// Advances lab-frame ρ by `duration` with equal RK4 steps no longer than dt,
/// re-symmetrizing after each step. Each step restarts the interaction frame,
/// so the coherent rotation is exact and RK4 only sees the dissipator; with no
/// jump operators the result is the unitary map up to round-off.
/// on_step receives the lab-frame state. Returns the number of steps taken.
inline std::size_t integrate_rk4(Matrix& rho, LindbladGenerator& gen, double duration, double dt,
                                 const std::function<void(double, const Matrix&)>& on_step = {}) {
  const std::size_t steps = detail::step_count(duration, dt);
  if (steps == 0) return 0;
  const double h = duration / static_cast<double>(steps);
  const Matrix& v = gen.basis();
  const Matrix half = gen.phases(0.5 * h);
  const Matrix full = gen.phases(h);
  const Matrix half_back = half.conjugate();
  const Matrix full_back = full.conjugate();

  const auto n = rho.rows();
  Matrix x = v.adjoint() * rho * v;
  Matrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), stage(n, n), lab(n, n);
  for (std::size_t i = 0; i < steps; ++i) {
    if (gen.dissipative()) {
      gen.dissipate(x, k1);
      stage = half.cwiseProduct(x + (0.5 * h) * k1);
      gen.dissipate(stage, k2);
      k2 = half_back.cwiseProduct(k2);
      stage = half.cwiseProduct(x + (0.5 * h) * k2);
      gen.dissipate(stage, k3);
      k3 = half_back.cwiseProduct(k3);
      stage = full.cwiseProduct(x + h * k3);
      gen.dissipate(stage, k4);
      k4 = full_back.cwiseProduct(k4);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x = full.cwiseProduct(x);
    x = 0.5 * (x + x.adjoint()).eval();
    if (on_step) {
      lab.noalias() = v * x * v.adjoint();
      on_step(h * static_cast<double>(i + 1), lab);
    }
  }
  rho = v * x * v.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return steps;
}

/// Exact noiseless evolution: pre-pulses, exp(-i H(δ) τ) per segment, post-pulses.
inline EvolutionResult<StateVector> evolve_unitary(const StateVector& state, const Schedule& schedule,
                                                   const ModelParams& params) {
  params.validate();
  schedule.validate(params);
  const SpaceDescriptor space = params.space();
  if (!(state.space() == space)) throw std::invalid_argument("evolve_unitary: state space does not match model");

  const auto top = detail::top_fock_indices(params);
  Diagnostics diag;
  Vector psi = state.amplitudes();
  auto observe = [&] {
    diag.max_trace_drift = std::max(diag.max_trace_drift, std::abs(psi.squaredNorm() - 1.0));
    diag.max_top_fock_population = std::max(diag.max_top_fock_population, detail::top_fock_population(psi, top));
  };

  for (const auto& p : schedule.pre_pulses) psi = pulse_unitary(p, space).matrix() * psi;
  for (const auto& seg : schedule.segments) {
    const DenseOperator h = build_hamiltonian(params, seg.delta);
    if (!h.is_hermitian()) throw std::domain_error("evolve_unitary: Hamiltonian is not Hermitian");
    psi = unitary_propagator(h, seg.duration).matrix() * psi;
    ++diag.steps_taken;
    observe();
  }
  for (const auto& p : schedule.post_pulses) psi = pulse_unitary(p, space).matrix() * psi;
  observe();

  if (diag.max_trace_drift > tolerance::kNorm) {
    diag.failed = true;
    diag.failure = "norm drift " + detail::format_exp(diag.max_trace_drift);
  }
  // Renormalize round-off so the StateVector invariant holds exactly.
  return {StateVector::normalized(space, std::move(psi)), diag};
}

/// Master-equation evolution; pulses act as ρ -> UρU†. Breaching the trace or
/// positivity tolerance flags the result as failed rather than throwing.
inline EvolutionResult<DensityMatrix> evolve_master(const DensityMatrix& rho0, const Schedule& schedule,
                                                    const ModelParams& params, const NoiseConfig& noise,
                                                    const IntegratorConfig& cfg, const MasterObserver& observer = {}) {
  params.validate();
  noise.validate();
  cfg.validate();
  schedule.validate(params);
  const SpaceDescriptor space = params.space();
  if (!(rho0.space() == space)) throw std::invalid_argument("evolve_master: state space does not match model");

  std::vector<Matrix> jumps;
  for (const auto& l : build_lindblads(noise, params)) jumps.push_back(l.matrix());
  const auto top = detail::top_fock_indices(params);
  Diagnostics diag;
  diag.min_eigenvalue = std::numeric_limits<double>::infinity();

  Matrix rho = rho0.matrix();
  auto apply_pulse = [&](const PulseSpec& p) {
    const Matrix u = pulse_unitary(p, space).matrix();
    rho = u * rho * u.adjoint();
  };
  auto track = [&](const Matrix& r) {
    diag.max_trace_drift = std::max(diag.max_trace_drift, std::abs(r.trace().real() - 1.0));
    diag.max_top_fock_population = std::max(diag.max_top_fock_population, detail::top_fock_population(r, top));
  };
  auto check_positivity = [&] { diag.min_eigenvalue = std::min(diag.min_eigenvalue, detail::min_eigenvalue(rho)); };

  for (const auto& p : schedule.pre_pulses) apply_pulse(p);
  track(rho);

  double time = 0.0;
  for (std::size_t s = 0; s < schedule.segments.size(); ++s) {
    const Segment& seg = schedule.segments[s];
    const DenseOperator h = build_hamiltonian(params, seg.delta);
    if (!h.is_hermitian()) throw std::domain_error("evolve_master: Hamiltonian is not Hermitian");
    LindbladGenerator gen(h.matrix(), jumps);

    if (observer) observer(s, time, rho);
    const double t0 = time;
    diag.steps_taken += integrate_rk4(rho, gen, seg.duration, cfg.dt, [&](double local, const Matrix& r) {
      track(r);
      if (observer) observer(s, t0 + local, r);
    });
    time = t0 + seg.duration;
    check_positivity();
  }
  for (const auto& p : schedule.post_pulses) apply_pulse(p);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  track(rho);
  check_positivity();

  if (diag.max_trace_drift > cfg.trace_tolerance) {
    diag.failed = true;
    diag.failure = "trace drift " + detail::format_exp(diag.max_trace_drift) + " exceeds tolerance";
  } else if (diag.min_eigenvalue < -cfg.positivity_tolerance) {
    diag.failed = true;
    diag.failure = "negative eigenvalue " + detail::format_exp(diag.min_eigenvalue) + " exceeds tolerance";
  }
  return {DensityMatrix(space, std::move(rho)), diag};
}

/// Canonical protocol from the ideal product input; exact propagation when noiseless.
inline EvolutionResult<DensityMatrix> run_protocol(const ModelParams& params, const NoiseConfig& noise,
                                                   const IntegratorConfig& cfg) {
  const Schedule schedule = canonical_entangling_schedule(params);
  const StateVector psi0 = initial_state(params.space());
  if (noise.is_noiseless()) {
    auto r = evolve_unitary(psi0, schedule, params);
    return {DensityMatrix::from_pure(r.final_state), r.diagnostics};
  }
  return evolve_master(DensityMatrix::from_pure(psi0), schedule, params, noise, cfg);
}

}  // namespace cqed
