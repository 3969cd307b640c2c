#include "cqed/dynamics.hpp"
#include "cqed/entanglement.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cqed;
using namespace cqed::testing;
using std::numbers::pi;

namespace {

double trace_distance(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (double ev : hermitian_eigenvalues(a - b)) s += std::abs(ev);
  return 0.5 * s;
}

}  // namespace

TEST(EvolveUnitary, EmptySchedule) {
  const ModelParams p;
  const StateVector psi = initial_state(p.space());
  const auto r = evolve_unitary(psi, Schedule{}, p);
  EXPECT_LT((r.final_state.amplitudes() - psi.amplitudes()).norm(), 1e-15);
}

TEST(EvolveUnitary, VacuumRabiHalfSwap) {
  const ModelParams p;
  const SpaceDescriptor s = p.space();
  Schedule sched;
  sched.segments = {{p.delta_omega[0], pi / (2 * p.g)}};
  const auto r = evolve_unitary(StateVector::basis(s, {2, 0, 0}), sched, p);
  // Analytic 2x2 swap: |2,vac> -> -|1,1 photon>.
  const Matrix u = exchange_propagator(p.g, pi / (2 * p.g));
  EXPECT_LT(std::abs(r.final_state.amplitude({1, 0, 1}) - u(1, 0)), 1e-10);
  EXPECT_NEAR(std::norm(r.final_state.amplitude({1, 0, 1})), 1.0, 1e-10);
}

TEST(EvolveUnitary, FullRabiCycleOnResonantDotFlipsSign) {
  const ModelParams p;
  const SpaceDescriptor s = p.space();
  Schedule sched;
  sched.segments = {{p.delta_omega[1], pi / p.g}};
  const auto r = evolve_unitary(StateVector::basis(s, {0, 1, 1}), sched, p);
  EXPECT_LT(std::abs(r.final_state.amplitude({0, 1, 1}) + 1.0), 1e-10);
}

TEST(EvolveUnitary, NormAndTopFock) {
  const ModelParams p;
  const auto r = evolve_unitary(initial_state(p.space()), canonical_entangling_schedule(p), p);
  EXPECT_LT(r.diagnostics.max_trace_drift, 1e-10);
  EXPECT_LT(r.diagnostics.max_top_fock_population, 1e-6);
  EXPECT_FALSE(r.diagnostics.failed);
}

TEST(EvolveMaster, ScalarDecayUsesFactorTwo) {
  // Two-level system, H = 0, L = sqrt(Γ)|0><1|: excited population exp(-2Γt).
  const double gamma = 0.7;
  Matrix lower = Matrix::Zero(2, 2);
  lower(0, 1) = std::sqrt(gamma);
  LindbladGenerator gen(Matrix::Zero(2, 2), {lower});
  Matrix rho = Matrix::Zero(2, 2);
  rho(1, 1) = 1.0;
  const double t = 1.0 / gamma;
  integrate_rk4(rho, gen, t, 1e-3);
  EXPECT_NEAR(rho(1, 1).real() / std::exp(-2.0 * gamma * t), 1.0, 1e-6);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-14);
}

TEST(EvolveMaster, NoiselessMatchesUnitary) {
  const ModelParams p;
  const Schedule sched = canonical_entangling_schedule(p);
  const StateVector psi = initial_state(p.space());
  const auto u = evolve_unitary(psi, sched, p);
  for (auto kind : {NoiseKind::DephasingQubit, NoiseKind::RadiativeDecay, NoiseKind::CavityLoss}) {
    const auto m = evolve_master(DensityMatrix::from_pure(psi), sched, p, {kind, 0.0}, IntegratorConfig{});
    EXPECT_LT(trace_distance(m.final_state.matrix(), DensityMatrix::from_pure(u.final_state).matrix()), 1e-8);
  }
}

TEST(EvolveMaster, CavityRelaxesToVacuum) {
  // Pure loss gives d<n>/dt = -2Γ<n>, so from <n> = 1 the population at
  // t = 10/Γ is e^-20.
  ModelParams p;
  p.g = 1e-9;  // decouple dots from cavity
  p.delta_omega = {0.0, 0.0};
  const double gamma = 1.0;
  const SpaceDescriptor s = p.space();
  const DensityMatrix mixed(s, Matrix::Identity(27, 27) / 27.0);
  Schedule sched;
  sched.segments = {{0.0, 10.0 / gamma}};
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  const auto r = evolve_master(mixed, sched, p, {NoiseKind::CavityLoss, gamma}, cfg);
  const Matrix a = embed(annihilation(p.n_max), 2, s).matrix();
  const double photons = (r.final_state.matrix() * a.adjoint() * a).trace().real();
  EXPECT_LT(photons, 1e-6);
  EXPECT_FALSE(r.diagnostics.failed);
}

TEST(EvolveMaster, ExcitationNumberConservedWhenNoiseless) {
  const ModelParams p;
  const Matrix n = excitation_number(p).matrix();
  std::vector<double> first(3, std::nan("")), worst(3, 0.0);
  const MasterObserver obs = [&](std::size_t seg, double, const Matrix& rho) {
    const double v = (rho * n).trace().real();
    if (std::isnan(first[seg])) first[seg] = v;
    worst[seg] = std::max(worst[seg], std::abs(v - first[seg]));
  };
  evolve_master(DensityMatrix::from_pure(initial_state(p.space())), canonical_entangling_schedule(p), p,
                {NoiseKind::DephasingQubit, 0.0}, IntegratorConfig{}, obs);
  for (double w : worst) EXPECT_LT(w, 1e-9);
}

TEST(EvolveMaster, CavityLossNeverAddsExcitations) {
  const ModelParams p;
  const Matrix n = excitation_number(p).matrix();
  double prev = 0.0;
  std::size_t prev_seg = 99;
  bool ok = true;
  const MasterObserver obs = [&](std::size_t seg, double, const Matrix& rho) {
    const double v = (rho * n).trace().real();
    if (seg == prev_seg && v > prev + 1e-12) ok = false;
    prev = v;
    prev_seg = seg;
  };
  IntegratorConfig cfg;
  cfg.dt = 4e-3;
  evolve_master(DensityMatrix::from_pure(initial_state(p.space())), canonical_entangling_schedule(p), p,
                {NoiseKind::CavityLoss, 0.3}, cfg, obs);
  EXPECT_TRUE(ok);
}

TEST(EvolveMaster, PurityNonIncreasingBetweenPulses) {
  const ModelParams p;
  IntegratorConfig cfg;
  cfg.dt = 4e-3;
  for (auto kind : {NoiseKind::DephasingQubit, NoiseKind::RadiativeDecay, NoiseKind::CavityLoss}) {
    double prev = 0.0;
    double worst_rise = 0.0;
    std::size_t prev_seg = 99;
    const MasterObserver obs = [&](std::size_t seg, double, const Matrix& rho) {
      const double v = (rho * rho).trace().real();
      if (seg == prev_seg) worst_rise = std::max(worst_rise, v - prev);
      prev = v;
      prev_seg = seg;
    };
    evolve_master(DensityMatrix::from_pure(initial_state(p.space())), canonical_entangling_schedule(p), p,
                  {kind, 0.1}, cfg, obs);
    EXPECT_LE(worst_rise, 1e-9) << to_string(kind);
  }
}

TEST(EvolveMaster, DiagnosticsAtModerateNoise) {
  const ModelParams p;
  for (auto kind : {NoiseKind::DephasingQubit, NoiseKind::RadiativeDecay, NoiseKind::CavityLoss}) {
    const auto r = run_protocol(p, {kind, 0.1}, IntegratorConfig{});
    EXPECT_LE(r.diagnostics.max_trace_drift, 1e-8);
    EXPECT_GE(r.diagnostics.min_eigenvalue, -1e-7);
    EXPECT_LE(r.diagnostics.max_top_fock_population, 1e-6);
    EXPECT_FALSE(r.diagnostics.failed);
    EXPECT_EQ(r.diagnostics.steps_taken, 1571u + 3142u + 1571u);
  }
}

TEST(EvolveMaster, FlagsTraceBreach) {
  const ModelParams p;
  IntegratorConfig cfg;
  cfg.dt = 0.05;
  cfg.trace_tolerance = 1e-300;  // unattainable, forces the flag
  const auto r = evolve_master(DensityMatrix::from_pure(initial_state(p.space())), canonical_entangling_schedule(p), p,
                               {NoiseKind::CavityLoss, 0.1}, cfg);
  EXPECT_TRUE(r.diagnostics.failed);
  EXPECT_FALSE(r.diagnostics.failure.empty());
}

TEST(EvolveMaster, RejectsBadConfig) {
  const ModelParams p;
  IntegratorConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(evolve_master(DensityMatrix::from_pure(initial_state(p.space())), Schedule{}, p, {}, cfg),
               std::invalid_argument);
}

TEST(RunProtocol, NoiselessEntanglesDots) {
  const ModelParams p;
  const auto r = run_protocol(p, {}, IntegratorConfig{});
  const auto rep = analyze(r.final_state);
  EXPECT_GE(rep.eof, 0.98);
  EXPECT_LE(rep.leakage, 0.01);
}

TEST(RunProtocol, ZeroRateIdenticalAcrossKinds) {
  const ModelParams p;
  const auto base = analyze(run_protocol(p, {}, IntegratorConfig{}).final_state);
  for (auto kind : {NoiseKind::DephasingQubit, NoiseKind::RadiativeDecay, NoiseKind::CavityLoss}) {
    const auto rep = analyze(run_protocol(p, {kind, 0.0}, IntegratorConfig{}).final_state);
    EXPECT_NEAR(rep.eof, base.eof, 1e-9);
    EXPECT_NEAR(rep.concurrence, base.concurrence, 1e-9);
  }
}

TEST(RunProtocol, RadiativeDecayDegradesEntanglement) {
  const ModelParams p;
  const double weak = analyze(run_protocol(p, {NoiseKind::RadiativeDecay, 0.01}, IntegratorConfig{}).final_state).eof;
  const double strong = analyze(run_protocol(p, {NoiseKind::RadiativeDecay, 1.0}, IntegratorConfig{}).final_state).eof;
  EXPECT_LT(strong, weak);
}

TEST(LindbladGenerator, TraceFreeAndHermiticityPreserving) {
  std::mt19937_64 rng(12);
  const ModelParams p;
  std::vector<Matrix> jumps;
  for (const auto& l : build_lindblads({NoiseKind::RadiativeDecay, 0.4}, p)) jumps.push_back(l.matrix());
  for (const auto& l : build_lindblads({NoiseKind::CavityLoss, 0.2}, p)) jumps.push_back(l.matrix());
  LindbladGenerator gen(build_hamiltonian(p, 3.0).matrix(), jumps);
  Matrix out;
  for (int trial = 0; trial < 10; ++trial) {
    gen.apply(random_density(rng, 27), out);
    EXPECT_LT(std::abs(out.trace()), 1e-13);
    EXPECT_LT(max_abs(out - out.adjoint()), 1e-13);
  }
}

TEST(EvolveMaster, StepHalvingConvergence) {
  const ModelParams p;
  IntegratorConfig coarse;
  coarse.dt = 4e-3;
  IntegratorConfig fine;
  fine.dt = 2e-3;
  const auto a = analyze(run_protocol(p, {NoiseKind::CavityLoss, 0.1}, coarse).final_state);
  const auto b = analyze(run_protocol(p, {NoiseKind::CavityLoss, 0.1}, fine).final_state);
  EXPECT_LT(std::abs(a.eof - b.eof), 1e-6);
}
