#include "cqed/model.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cqed;
using namespace cqed::testing;

TEST(DotProjector, Examples) {
  Matrix p11 = Matrix::Zero(3, 3);
  p11(1, 1) = 1.0;
  EXPECT_EQ(dot_projector(1, 1), p11);
  EXPECT_EQ(dot_projector(2, 1).adjoint(), dot_projector(1, 2));
  EXPECT_EQ(dot_projector(2, 1) * dot_projector(1, 2), dot_projector(2, 2));
  EXPECT_THROW(dot_projector(3, 0), std::out_of_range);
}

TEST(Annihilation, LadderElements) {
  Matrix a1(2, 2);
  a1 << 0.0, 1.0, 0.0, 0.0;
  EXPECT_EQ(annihilation(1), a1);

  const Matrix a = annihilation(4);
  Matrix number = Matrix::Zero(5, 5);
  number.diagonal() << 0.0, 1.0, 2.0, 3.0, 4.0;
  EXPECT_LT(max_abs(a.adjoint() * a - number), 1e-14);
  EXPECT_NEAR(annihilation(2)(1, 2).real(), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(a.col(0).norm(), 0.0);
  EXPECT_THROW(annihilation(0), std::invalid_argument);
}

TEST(ModelParams, Validation) {
  ModelParams p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(p.space().total_dim(), 27u);
  p.g = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = ModelParams{};
  p.delta_omega = {20.0};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = ModelParams{};
  p.delta_omega = {5.0, 0.0};
  EXPECT_FALSE(p.detuning_well_separated());
}

TEST(Hamiltonian, CouplingElement) {
  const ModelParams p;
  const SpaceDescriptor s = p.space();
  const Matrix h = build_hamiltonian(p, 3.0).matrix();
  const auto row = static_cast<Eigen::Index>(s.index({2, 0, 0}));
  const auto col = static_cast<Eigen::Index>(s.index({1, 0, 1}));
  EXPECT_LT(std::abs(h(row, col) - kI * p.g), 1e-15);
}

TEST(Hamiltonian, DiagonalAtResonanceOfA) {
  const ModelParams p;
  const SpaceDescriptor s = p.space();
  const Matrix h = build_hamiltonian(p, p.delta_omega[0]).matrix();
  auto diag = [&](std::size_t a, std::size_t b) {
    const auto i = static_cast<Eigen::Index>(s.index({a, b, 0}));
    return h(i, i).real();
  };
  EXPECT_NEAR(diag(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(diag(0, 1), p.delta_omega[0], 1e-15);
  EXPECT_NEAR(diag(1, 1), p.delta_omega[0], 1e-15);
}

TEST(Hamiltonian, VanishesWithoutCouplingOrDetuning) {
  ModelParams p;
  p.delta_omega = {0.0, 0.0};
  p.g = 1e-300;  // g must stay positive; the coupling term is then negligible
  EXPECT_LT(max_abs(build_hamiltonian(p, 0.0).matrix()), 1e-299);
}

TEST(Hamiltonian, HermitianAndConservesExcitations) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  ModelParams p;
  p.n_max = 3;
  const Matrix n = excitation_number(p).matrix();
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix h = build_hamiltonian(p, u(rng)).matrix();
    EXPECT_LT((h - h.adjoint()).norm(), 1e-12);
    EXPECT_LT((h * n - n * h).norm(), 1e-12);
  }
}

TEST(Hamiltonian, DetuningEntersOnlyTheDiagonal) {
  const ModelParams p;
  const SpaceDescriptor s = p.space();
  const Matrix diff = build_hamiltonian(p, 7.5).matrix() - build_hamiltonian(p, -2.0).matrix();
  const Matrix expected = 9.5 * (embed(dot_projector(1, 1), 0, s).matrix() + embed(dot_projector(1, 1), 1, s).matrix());
  EXPECT_LT(max_abs(diff - expected), 1e-12);
}

TEST(Hamiltonian, ThreeDots) {
  ModelParams p;
  p.dot_count = 3;
  p.delta_omega = {20.0, 0.0, -20.0};
  const DenseOperator h = build_hamiltonian(p, 0.0);
  EXPECT_EQ(h.space().total_dim(), 81u);
  EXPECT_TRUE(h.is_hermitian(1e-12));
  const Matrix n = excitation_number(p).matrix();
  EXPECT_LT((h.matrix() * n - n * h.matrix()).norm(), 1e-12);
}

TEST(Lindblads, Families) {
  const ModelParams p;
  EXPECT_TRUE(build_lindblads({NoiseKind::None, 1.0}, p).empty());
  EXPECT_EQ(build_lindblads({NoiseKind::DephasingQubit, 0.1}, p).size(), 2u);
  EXPECT_EQ(build_lindblads({NoiseKind::RadiativeDecay, 0.1}, p).size(), 2u);
  EXPECT_EQ(build_lindblads({NoiseKind::CavityLoss, 0.1}, p).size(), 1u);

  for (auto kind : {NoiseKind::DephasingQubit, NoiseKind::RadiativeDecay, NoiseKind::CavityLoss}) {
    for (const auto& l : build_lindblads({kind, 0.0}, p)) EXPECT_EQ(max_abs(l.matrix()), 0.0);
  }
  EXPECT_THROW(build_lindblads({NoiseKind::CavityLoss, -1.0}, p), std::invalid_argument);
}

TEST(Lindblads, CavityLossMagnitude) {
  ModelParams p;
  p.n_max = 1;
  const auto ls = build_lindblads({NoiseKind::CavityLoss, 4.0}, p);
  const SpaceDescriptor s = p.space();
  const auto row = static_cast<Eigen::Index>(s.index({0, 0, 0}));
  const auto col = static_cast<Eigen::Index>(s.index({0, 0, 1}));
  EXPECT_NEAR(std::abs(ls[0].matrix()(row, col)), 2.0, 1e-15);
  EXPECT_NEAR(max_abs(ls[0].matrix()), 2.0, 1e-15);
}

TEST(Lindblads, ScaleAsSquareRootOfRate) {
  const ModelParams p;
  for (auto kind : {NoiseKind::DephasingQubit, NoiseKind::RadiativeDecay, NoiseKind::CavityLoss}) {
    const auto l1 = build_lindblads({kind, 0.3}, p);
    const auto l4 = build_lindblads({kind, 1.2}, p);
    ASSERT_EQ(l1.size(), l4.size());
    for (std::size_t k = 0; k < l1.size(); ++k) EXPECT_LT(max_abs(l4[k].matrix() - 2.0 * l1[k].matrix()), 1e-15);
  }
}

TEST(ExcitationNumber, DiagonalEntries) {
  const ModelParams p;
  const SpaceDescriptor s = p.space();
  const DenseOperator n = excitation_number(p);
  EXPECT_TRUE(n.is_hermitian());
  const Matrix& m = n.matrix();
  EXPECT_LT(max_abs(m - Matrix(m.diagonal().asDiagonal())), 1e-15);
  auto at = [&](std::size_t a, std::size_t b, std::size_t c) {
    const auto i = static_cast<Eigen::Index>(s.index({a, b, c}));
    return m(i, i).real();
  };
  EXPECT_DOUBLE_EQ(at(2, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(at(1, 1, 2), 2.0);
  EXPECT_DOUBLE_EQ(at(2, 2, 1), 3.0);
}
