#include <gtest/gtest.h>

#include <cmath>

#include "periph/examples.hpp"
#include "periph/spectral.hpp"
#include "test_support.hpp"

namespace periph {
namespace {

using examples::GroupSpec;
using examples::SymbolSpec;
using examples::ToeplitzTerm;
using testing::pauli_z;

double membership(const KrausChannel& c, Complex lambda, const CMatrix& x) {
  const auto e = eigenspace(c, lambda);
  return distance_to_span(e.columns(), vec(x)) / std::max(1.0, hs_norm(x));
}

std::size_t peripheral_span_dim(const KrausChannel& c) {
  std::size_t total = 0;
  for (const auto& ev : peripheral_spectrum(c).eigenvalues) total += ev.geometric_multiplicity;
  return total;
}

TEST(UnitaryChannel, IdentityGivesFullFixedAlgebra) {
  const auto f = examples::unitary_channel(identity(3));
  EXPECT_EQ(f.fixed_dim, 9u);
  ASSERT_EQ(f.predicted.size(), 1u);
  EXPECT_EQ(f.predicted[0].dim, 9u);
}

TEST(UnitaryChannel, DiagOneIMatchesMatrixUnitAction) {
  const auto f = examples::unitary_channel(examples::diagonal({1.0, kI}));
  EXPECT_EQ(f.fixed_dim, 2u);
  EXPECT_EQ(f.peripheral_total, 4u);
  // U^H E_ab U = conj(u_a) u_b E_ab
  const std::vector<std::pair<Complex, std::size_t>> oracle{{1.0, 2}, {kI, 1}, {-kI, 1}};
  ASSERT_EQ(f.predicted.size(), oracle.size());
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    EXPECT_LE(std::abs(f.predicted[k].lambda - oracle[k].first), 1e-12);
    EXPECT_EQ(f.predicted[k].dim, oracle[k].second);
  }
  const auto spec = peripheral_spectrum(f.channel);
  ASSERT_EQ(spec.size(), oracle.size());
  for (std::size_t k = 0; k < oracle.size(); ++k)
    EXPECT_EQ(spec.eigenvalues[k].geometric_multiplicity, oracle[k].second);
}

TEST(UnitaryChannel, ZPlusIrrationalRotationSpansEverything) {
  const double alpha = std::sqrt(2.0);
  CMatrix u = CMatrix::Zero(4, 4);
  u(0, 0) = 1.0;
  u(1, 1) = -1.0;
  u(2, 2) = std::cos(alpha);
  u(2, 3) = -std::sin(alpha);
  u(3, 2) = std::sin(alpha);
  u(3, 3) = std::cos(alpha);
  const auto f = examples::unitary_channel(u);
  EXPECT_EQ(f.fixed_dim, 4u);
  EXPECT_EQ(peripheral_span_dim(f.channel), 16u);
  for (const auto& p : f.predicted) {
    const auto s = peripheral_spectrum(f.channel);
    const auto hit = s.matches(p.lambda, 1e-7);
    ASSERT_EQ(hit.size(), 1u);
    EXPECT_EQ(s.eigenvalues[hit[0]].geometric_multiplicity, p.dim);
  }
}

TEST(UnitaryChannel, RejectsNonUnitary) {
  EXPECT_THROW(examples::unitary_channel(2.0 * identity(2)), PreconditionError);
  EXPECT_THROW(examples::unitary_channel(CMatrix::Zero(2, 3)), ShapeError);
}

TEST(WeylChannel, QubitFlipsV) {
  const auto w = examples::weyl_channel(2, 1, {1.0});
  EXPECT_LE(op_norm(periph::apply(w.channel, w.v) + w.v), 1e-12);
}

TEST(WeylChannel, TwoQutritsTensorPowerIsEigenvector) {
  const auto w = examples::weyl_channel(3, 2, {0.5, 0.5});
  const Complex omega = std::polar(1.0, 2.0 * kPi / 3.0);
  const CMatrix vv = kron(w.v, w.v);
  EXPECT_EQ(w.v_tensor, vv);
  EXPECT_LE(op_norm(periph::apply(w.channel, vv) - omega * vv), 1e-10);
  EXPECT_LE(membership(w.channel, omega, vv), 1e-8);
}

TEST(WeylChannel, RelationAndUnitalityAcrossSizes) {
  for (Eigen::Index d = 2; d <= 5; ++d)
    for (std::size_t n = 1; n <= 2; ++n) {
      SCOPED_TRACE(::testing::Message() << "d=" << d << " n=" << n);
      std::vector<double> probs(n, 1.0 / static_cast<double>(n));
      const auto w = examples::weyl_channel(d, n, probs);
      const Complex omega = std::polar(1.0, 2.0 * kPi / static_cast<double>(d));
      EXPECT_LE(op_norm(w.v * w.u - omega * w.u * w.v), 1e-12);
      EXPECT_LE(op_norm(w.u.adjoint() * w.u - identity(d)), 1e-12);
      EXPECT_LE(op_norm(w.v.adjoint() * w.v - identity(d)), 1e-12);
      EXPECT_LE(validate(w.channel).unitality_defect, 1e-10);
      EXPECT_LE(op_norm(periph::apply(w.channel, w.v_tensor) - omega * w.v_tensor), 1e-10);
    }
}

TEST(WeylChannel, RejectsBadProbabilities) {
  EXPECT_THROW(examples::weyl_channel(3, 2, {0.5, 0.6}), PreconditionError);
  EXPECT_THROW(examples::weyl_channel(3, 2, {1.0, 0.0}), PreconditionError);
  EXPECT_THROW(examples::weyl_channel(3, 2, {1.0}), PreconditionError);
}

TEST(GroupSpec, ValidatesTables) {
  EXPECT_NO_THROW(GroupSpec::cyclic(5).validate());
  EXPECT_NO_THROW(GroupSpec::symmetric3().validate());
  EXPECT_NO_THROW(GroupSpec::direct_product(GroupSpec::cyclic(2), GroupSpec::cyclic(3)).validate());
  EXPECT_FALSE(GroupSpec::symmetric3().abelian());
  GroupSpec bad = GroupSpec::cyclic(3);
  bad.table[1][1] = 0;
  EXPECT_THROW(bad.validate(), PreconditionError);
}

TEST(GroupSpec, RightRegularIsRepresentation) {
  const auto g = GroupSpec::symmetric3();
  for (std::size_t a = 0; a < g.order; ++a)
    for (std::size_t b = 0; b < g.order; ++b)
      EXPECT_EQ(examples::right_regular(g, a) * examples::right_regular(g, b),
                examples::right_regular(g, g.mul(a, b)));
}

TEST(GroupSpec, OneDimensionalCharactersOfS3) {
  const auto g = GroupSpec::symmetric3();
  const auto chars = examples::one_dimensional_characters(g);
  ASSERT_EQ(chars.size(), 2u);
  // Oracle: the sign of each permutation, by counting inversions of its label.
  std::vector<double> sign(g.order);
  for (std::size_t a = 0; a < g.order; ++a) {
    const auto& s = g.labels[a];
    int inv = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) inv += s[i] > s[j];
    sign[a] = inv % 2 ? -1.0 : 1.0;
  }
  int trivial = 0, signed_char = 0;
  for (const auto& chi : chars) {
    double dt = 0.0, ds = 0.0;
    for (std::size_t a = 0; a < g.order; ++a) {
      dt = std::max(dt, std::abs(chi[a] - 1.0));
      ds = std::max(ds, std::abs(chi[a] - sign[a]));
    }
    trivial += dt <= 1e-10;
    signed_char += ds <= 1e-10;
  }
  EXPECT_EQ(trivial, 1);
  EXPECT_EQ(signed_char, 1);
}

TEST(GroupWalk, Z2DeltaOneGivesPauliZ) {
  const auto f = examples::group_walk_channel(GroupSpec::cyclic(2), {0.0, 1.0});
  EXPECT_LE(op_norm(periph::apply(f.channel, pauli_z()) + pauli_z()), 1e-12);
  bool found = false;
  for (const auto& p : f.predicted)
    if (std::abs(p.lambda + 1.0) <= 1e-12) {
      found = true;
      EXPECT_LE(op_norm(p.v_chi - pauli_z()), 1e-12);
    }
  EXPECT_TRUE(found);
}

TEST(GroupWalk, Z3UniformOnGeneratorsOnlyTrivialCharacter) {
  const auto f = examples::group_walk_channel(GroupSpec::cyclic(3), {0.0, 0.5, 0.5});
  ASSERT_EQ(f.predicted.size(), 1u);
  EXPECT_LE(std::abs(f.predicted[0].lambda - 1.0), 1e-12);
}

TEST(GroupWalk, Z4DeltaOneCharacterTable) {
  const auto f = examples::group_walk_channel(GroupSpec::cyclic(4), {0.0, 1.0, 0.0, 0.0});
  ASSERT_EQ(f.predicted.size(), 4u);
  const std::vector<Complex> oracle{1.0, kI, -1.0, -kI};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_LE(std::abs(f.predicted[k].lambda - oracle[k]), 1e-12);
    // chi(h) = lambda^h
    for (std::size_t h = 0; h < 4; ++h)
      EXPECT_LE(std::abs(f.predicted[k].character[h] - std::pow(oracle[k], static_cast<double>(h))), 1e-10);
    const CMatrix& v = f.predicted[k].v_chi;
    EXPECT_LE(op_norm(periph::apply(f.channel, v) - oracle[k] * v), 1e-10);
    EXPECT_LE(membership(f.channel, oracle[k], v), 1e-8);
  }
}

TEST(GroupWalk, RejectsBadMeasure) {
  const auto g = GroupSpec::cyclic(3);
  EXPECT_THROW(examples::group_walk_channel(g, {0.5, 0.5}), PreconditionError);
  EXPECT_THROW(examples::group_walk_channel(g, {1.2, -0.2, 0.0}), PreconditionError);
  EXPECT_THROW(examples::group_walk_channel(g, {0.2, 0.2, 0.2}), PreconditionError);
}

TEST(CharacterScan, Z2DeltaOne) {
  const auto s = examples::character_scan(GroupSpec::cyclic(2), {0.0, 1.0});
  EXPECT_EQ(s.predicted.size(), 2u);
  EXPECT_TRUE(s.missing.empty());
  EXPECT_LE(s.max_eigvec_residual, 1e-12);
}

TEST(CharacterScan, Z3ReportsWithoutAsserting) {
  const auto s = examples::character_scan(GroupSpec::cyclic(3), {0.0, 0.5, 0.5});
  ASSERT_EQ(s.predicted.size(), 1u);
  EXPECT_TRUE(s.missing.empty());
  EXPECT_EQ(s.agreement, s.unexplained.empty());
}

TEST(CharacterScan, KleinFourUniformOnGenerators) {
  const auto g = GroupSpec::direct_product(GroupSpec::cyclic(2), GroupSpec::cyclic(2));
  // index = 2 * first + second; generators (1,0) and (0,1)
  const auto s = examples::character_scan(g, {0.0, 0.5, 0.5, 0.0});
  // characters (a, b) -> (+-1)^a (+-1)^b; constant on the generators iff both signs agree
  ASSERT_EQ(s.predicted.size(), 2u);
  std::vector<double> re;
  for (auto z : s.predicted) re.push_back(z.real());
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], -1.0, 1e-12);
  EXPECT_NEAR(re[1], 1.0, 1e-12);
  EXPECT_TRUE(s.missing.empty());
}

TEST(Generators, AllValidateAndPredictionsHold) {
  std::vector<KrausChannel> chans{
      examples::unitary_channel(examples::diagonal({1.0, kI, -1.0})).channel,
      examples::weyl_channel(2, 2, {0.25, 0.75}).channel,
      examples::group_walk_channel(GroupSpec::symmetric3(), {0.0, 0.5, 0.5, 0.0, 0.0, 0.0}).channel,
      examples::group_walk_channel(GroupSpec::direct_product(GroupSpec::cyclic(2), GroupSpec::cyclic(3)),
                                   {0.0, 0.0, 0.0, 0.0, 1.0, 0.0})
          .channel,
      examples::dephasing_channel(), examples::identity_channel(2)};
  for (const auto& c : chans) {
    SCOPED_TRACE(c.label());
    EXPECT_LE(validate(c).unitality_defect, 1e-10);
  }
  const auto s3 = examples::group_walk_channel(GroupSpec::symmetric3(), {0.0, 0.5, 0.5, 0.0, 0.0, 0.0});
  for (const auto& p : s3.predicted) EXPECT_LE(membership(s3.channel, p.lambda, p.v_chi), 1e-8);
  const auto uf = examples::unitary_channel(examples::diagonal({1.0, kI, -1.0}));
  const auto spec = peripheral_spectrum(uf.channel);
  for (const auto& p : uf.predicted) {
    const auto hit = spec.matches(p.lambda, 1e-7);
    ASSERT_EQ(hit.size(), 1u);
    EXPECT_EQ(spec.eigenvalues[hit[0]].geometric_multiplicity, p.dim);
  }
}

SymbolSpec symbol(std::initializer_list<std::pair<const int, Complex>> c) { return SymbolSpec{c}; }

TEST(Toeplitz, ConstantSymbolIsExact) {
  const Complex lam = std::polar(1.0, 0.7), mu = std::polar(1.0, -1.9);
  const auto rep = examples::toeplitz_demo({4, 9, 16}, {ToeplitzTerm{1.0, symbol({{0, 1.0}}), lam},
                                                        ToeplitzTerm{1.0, symbol({{0, 1.0}}), mu}});
  for (const auto& row : rep.rows) EXPECT_LE(row.product_defect, 1e-12);
  const auto single = examples::toeplitz_demo({7}, {ToeplitzTerm{1.0, symbol({{0, 1.0}}), lam}});
  EXPECT_NEAR(single.rows[0].ratio, 1.0, 1e-12);
  const CMatrix t = examples::detail::rotation_matrix(lam, 7).block(7, 7, 8, 8);
  for (int k = 0; k <= 7; ++k) EXPECT_LE(std::abs(t(k, k) - std::pow(lam, static_cast<double>(k))), 1e-12);
}

TEST(Toeplitz, ScaledConstantRatioOne) {
  const auto rep = examples::toeplitz_demo({3, 10}, {ToeplitzTerm{2.5, symbol({{0, Complex(0.3, -1.0)}}), 1.0}});
  for (const auto& row : rep.rows) EXPECT_NEAR(row.ratio, 1.0, 1e-12);
}

TEST(Toeplitz, CosineSymbolMatchesTridiagonalSpectrum) {
  const std::vector<int> ms{32, 64, 128, 256};
  const auto rep = examples::toeplitz_demo(ms, {ToeplitzTerm{1.0, symbol({{1, 1.0}, {-1, 1.0}}), 1.0}});
  EXPECT_NEAR(rep.symbol_sup_norm, 2.0, 1e-12);
  ASSERT_EQ(rep.rows.size(), ms.size());
  double last = 0.0;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    const double m = ms[k];
    // path graph on n vertices has largest eigenvalue 2 cos(pi / (n + 1))
    EXPECT_NEAR(rep.rows[k].compressed_norm, 2.0 * std::cos(kPi / (m + 2.0)), 1e-9);
    EXPECT_NEAR(rep.rows[k].full_norm, 2.0 * std::cos(kPi / (2.0 * m + 2.0)), 1e-9);
    EXPECT_GE(rep.rows[k].ratio, last - 1e-3);
    last = rep.rows[k].ratio;
    EXPECT_LE(rep.rows[k].product_defect, 1e-10);
  }
  EXPECT_LE(2.0 - rep.rows.back().compressed_norm, 0.05);
}

TEST(Toeplitz, ProductSymbolLawAgainstPointEvaluation) {
  const auto f = symbol({{1, 1.0}, {-1, Complex(0.0, 2.0)}});
  const auto g = symbol({{0, 1.0}, {2, Complex(-0.5, 0.5)}});
  const Complex lam = std::polar(1.0, 1.1);
  const auto h = examples::detail::product_symbol(f, g, lam);
  for (int t = 0; t < 17; ++t) {
    const Complex z = std::polar(1.0, 0.37 * t);
    EXPECT_LE(std::abs(h(z) - f(z) * g(lam * z)), 1e-12);
  }
  const auto rep = examples::toeplitz_demo({8, 20}, {ToeplitzTerm{1.0, f, lam}, ToeplitzTerm{1.0, g, -kI}});
  for (const auto& row : rep.rows) EXPECT_LE(row.product_defect, 1e-10);
}

TEST(Toeplitz, Errors) {
  EXPECT_THROW(examples::toeplitz_demo({1}, {ToeplitzTerm{1.0, symbol({{3, 1.0}}), 1.0}}), PreconditionError);
  EXPECT_THROW(examples::toeplitz_demo({8}, {ToeplitzTerm{1.0, symbol({{0, 1.0}}), 2.0}}), PreconditionError);
  EXPECT_THROW(examples::toeplitz_demo({8}, {}), PreconditionError);
}

}  // namespace
}  // namespace periph
