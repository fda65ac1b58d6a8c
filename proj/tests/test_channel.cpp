#include <gtest/gtest.h>

#include <algorithm>

#include "periph/channel.hpp"
#include "periph/random.hpp"
#include "test_support.hpp"

namespace periph {
namespace {

using testing::pauli_x;
using testing::pauli_z;

KrausChannel dephasing() {
  const double s = 1.0 / std::sqrt(2.0);
  return KrausChannel({s * identity(2), s * pauli_z()}, "dephasing");
}

TEST(KrausChannelCtor, RejectsMismatchedShapes) {
  EXPECT_THROW(KrausChannel({identity(2), identity(3)}), ShapeError);
  EXPECT_THROW(KrausChannel({CMatrix::Zero(2, 3)}), ShapeError);
  EXPECT_THROW(KrausChannel(std::vector<CMatrix>{}), ShapeError);
  CMatrix bad = identity(2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(KrausChannel({bad}), ShapeError);
}

TEST(Validate, Examples) {
  const auto id = validate(KrausChannel({identity(2)}));
  EXPECT_EQ(id.unitality_defect, 0.0);
  EXPECT_TRUE(id.pass);

  const auto dp = validate(dephasing());
  EXPECT_LE(dp.unitality_defect, 1e-15);
  EXPECT_TRUE(dp.pass);

  const auto half = validate(KrausChannel({identity(2) / 2.0}));
  EXPECT_NEAR(half.unitality_defect, 0.75, 1e-15);
  EXPECT_FALSE(half.pass);
}

TEST(Apply, Examples) {
  GaussianSource rng(1);
  const CMatrix x = rng.matrix(3, 3);
  EXPECT_EQ(periph::apply(KrausChannel({identity(3)}), x), x);

  EXPECT_LE(op_norm(periph::apply(dephasing(), pauli_x())), 1e-15);

  const CMatrix u = rng.unitary(3);
  EXPECT_LE(op_norm(periph::apply(KrausChannel({u}), u) - u), 1e-13);

  EXPECT_THROW(periph::apply(dephasing(), identity(3)), ShapeError);
}

TEST(Apply, AgreesWithSuperoperatorRoute) {
  for (Eigen::Index d = 1; d <= 6; ++d) {
    const auto c = testing::random_unital(d, 3, 100 + static_cast<std::uint64_t>(d));
    GaussianSource rng(d);
    const CMatrix s = superoperator(c).matrix;
    for (int t = 0; t < 5; ++t) {
      const CMatrix x = rng.matrix(d, d);
      EXPECT_LE(op_norm(periph::apply(c, x) - unvec(s * vec(x))), 1e-12 * std::max(1.0, op_norm(x)));
    }
  }
}

TEST(Superoperator, IdentityInBothPictures) {
  const KrausChannel id({identity(3)});
  EXPECT_EQ(superoperator(id).matrix, identity(9));
  EXPECT_EQ(superoperator(id, Picture::Predual).matrix, identity(9));
}

TEST(Superoperator, DiagonalUnitaryEigenvalues) {
  CMatrix u = CMatrix::Zero(2, 2);
  u(0, 0) = 1.0;
  u(1, 1) = kI;
  const CMatrix s = superoperator(KrausChannel({u})).matrix;
  // E_ab -> conj(mu_a) mu_b E_ab
  std::vector<Complex> got;
  for (Eigen::Index k = 0; k < 4; ++k) got.push_back(s(k, k));
  EXPECT_LE(op_norm(s - CMatrix(s.diagonal().asDiagonal())), 1e-15);
  std::vector<Complex> expected{1.0, kI, -kI, 1.0};
  auto key = [](Complex z) { return std::make_pair(z.real(), z.imag()); };
  std::sort(got.begin(), got.end(), [&](Complex a, Complex b) { return key(a) < key(b); });
  std::sort(expected.begin(), expected.end(), [&](Complex a, Complex b) { return key(a) < key(b); });
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(std::abs(got[k] - expected[k]), 1e-15);
}

TEST(Superoperator, PredualMatchesDirectAction) {
  const auto c = testing::random_unital(3, 2, 7);
  GaussianSource rng(8);
  const CMatrix rho = rng.matrix(3, 3);
  const CMatrix sp = superoperator(c, Picture::Predual).matrix;
  EXPECT_LE(op_norm(unvec(sp * vec(rho)) - apply_predual(c, rho)), 1e-12);
}

TEST(Superoperator, HilbertSchmidtAdjointness) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto c = testing::random_unital(4, 3, seed);
    GaussianSource rng(seed + 50);
    const CMatrix a = rng.matrix(4, 4), rho = rng.matrix(4, 4);
    const Complex lhs = (periph::apply(c, a).adjoint() * rho).trace();
    const Complex rhs = (a.adjoint() * apply_predual(c, rho)).trace();
    EXPECT_LE(std::abs(lhs - rhs), 1e-10);
  }
}

TEST(PowerApply, Examples) {
  GaussianSource rng(4);
  const auto c = testing::random_unital(3, 2, 4);
  const CMatrix x = rng.matrix(3, 3);
  EXPECT_EQ(power_apply(c, x, 0), x);

  for (std::size_t n : {1u, 2u, 5u}) EXPECT_LE(op_norm(power_apply(dephasing(), pauli_x(), n)), 1e-15);

  const KrausChannel zc({pauli_z()});
  EXPECT_LE(op_norm(power_apply(zc, pauli_x(), 1) + pauli_x()), 1e-15);
  EXPECT_LE(op_norm(power_apply(zc, pauli_x(), 2) - pauli_x()), 1e-15);
}

TEST(PowerApply, MatchesIteratedApply) {
  const auto c = testing::random_unital(3, 3, 9);
  GaussianSource rng(9);
  CMatrix x = rng.matrix(3, 3);
  CMatrix it = x;
  for (int n = 0; n < 6; ++n) it = periph::apply(c, it);
  EXPECT_LE(op_norm(power_apply(c, x, 6) - it), 1e-12);
  EXPECT_LE(op_norm(periph::apply(power(c, 6), x) - it), 1e-12);
}

TEST(Compose, HeisenbergOrder) {
  GaussianSource rng(12);
  const KrausChannel a({rng.unitary(3)});
  const auto b = testing::random_unital(3, 2, 12);
  const CMatrix x = rng.matrix(3, 3);
  EXPECT_LE(op_norm(periph::apply(compose(a, b), x) - periph::apply(a, periph::apply(b, x))), 1e-12);
}

TEST(InvariantState, UnitaryIsMaximallyMixed) {
  GaussianSource rng(2);
  const auto rep = invariant_state(KrausChannel({rng.unitary(4)}));
  ASSERT_TRUE(rep.state.has_value());
  EXPECT_LE(op_norm(*rep.state - identity(4) / 4.0), 1e-10);
  EXPECT_TRUE(rep.faithful);
}

TEST(InvariantState, DephasingIsMaximallyMixed) {
  const auto rep = invariant_state(dephasing());
  ASSERT_TRUE(rep.state.has_value());
  EXPECT_LE(op_norm(*rep.state - identity(2) / 2.0), 1e-10);
  EXPECT_TRUE(rep.faithful);
}

TEST(InvariantState, AmplitudeResetIsNotFaithful) {
  const KrausChannel c({testing::unit(2, 0, 0), testing::unit(2, 0, 1)});
  ASSERT_TRUE(validate(c).pass);
  const auto rep = invariant_state(c);
  ASSERT_TRUE(rep.state.has_value());
  EXPECT_LE(op_norm(*rep.state - testing::unit(2, 0, 0)), 1e-10);
  EXPECT_FALSE(rep.faithful);
  EXPECT_LE(rep.residual, 1e-10);
}

TEST(InvariantState, RandomChannelsGiveInvariantDensity) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const auto c = testing::random_unital(3, 2, seed);
    const auto rep = invariant_state(c);
    ASSERT_TRUE(rep.state.has_value());
    EXPECT_NEAR(rep.state->trace().real(), 1.0, 1e-12);
    EXPECT_GE(rep.min_eigenvalue, -1e-10);
    EXPECT_LE(rep.residual, 1e-9);
  }
}

TEST(Tensor, Examples) {
  const auto id = tensor(KrausChannel({identity(2)}), KrausChannel({identity(3)}));
  EXPECT_EQ(id.dim(), 6);
  EXPECT_EQ(superoperator(id).matrix, identity(36));

  GaussianSource rng(3);
  const CMatrix u = rng.unitary(2), v = rng.unitary(2);
  const auto uv = tensor(KrausChannel({u}), KrausChannel({v}));
  ASSERT_EQ(uv.size(), 1u);
  EXPECT_LE(op_norm(uv.kraus()[0] - kron(u, v)), 1e-15);

  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto t = tensor(testing::random_unital(2, 2, seed), testing::random_unital(3, 2, seed + 10));
    EXPECT_LE(validate(t).unitality_defect, 1e-10);
  }
}

TEST(ChannelProperties, StarPreservingSchwarzAndContraction) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(seed % 4);
    const auto c = testing::random_unital(d, 2 + seed % 3, seed);
    ASSERT_TRUE(validate(c).pass);
    GaussianSource rng(seed + 300);
    const CMatrix x = rng.matrix(d, d);
    EXPECT_LE(op_norm(periph::apply(c, x.adjoint()) - periph::apply(c, x).adjoint()), 1e-12 * op_norm(x));
    const CMatrix tx = periph::apply(c, x);
    const CMatrix gap = periph::apply(c, x.adjoint() * x) - tx.adjoint() * tx;
    EXPECT_GE(min_hermitian_eigenvalue(0.5 * (gap + gap.adjoint())), -1e-9 * op_norm(x) * op_norm(x));
    EXPECT_LE(spectral_radius(superoperator(c).matrix), 1.0 + 1e-8);
  }
}

}  // namespace
}  // namespace periph
