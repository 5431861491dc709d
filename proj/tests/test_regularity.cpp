#include "cmps/regularity.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace cmps;
using testutil::make_rng;

TEST(FirstOrder, SingleBosonAlwaysPasses) {
  auto rng = make_rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = testutil::random_uniform(rng, 4, 1);
    const auto rep = check_first_order(s);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.maxResidual(), 0.0);
  }
}

TEST(FirstOrder, NilpotentFermionPasses) {
  UniformCMPS s;
  s.species = testutil::single_fermion();
  s.Q = Matrix::Zero(2, 2);
  Matrix r = Matrix::Zero(2, 2);
  r(0, 1) = 1;
  s.R = {r};
  EXPECT_TRUE(check_first_order(s).passed);
}

TEST(FirstOrder, FermionIdentityFails) {
  UniformCMPS s;
  s.species = testutil::single_fermion();
  const int D = 3;
  s.Q = Matrix::Zero(D, D);
  s.R = {Matrix::Identity(D, D)};
  const auto rep = check_first_order(s);
  EXPECT_FALSE(rep.passed);
  EXPECT_NEAR(rep.maxResidual(), 2.0 * std::sqrt(double(D)), 1e-12);
}

TEST(FirstOrder, PauliEquivalence) {
  // single fermion: passing is the same statement as ||R^2|| below tolerance
  auto rng = make_rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    UniformCMPS s;
    s.species = testutil::single_fermion();
    s.Q = testutil::random_matrix(rng, 3, 3);
    s.R = {testutil::random_matrix(rng, 3, 3)};
    const auto rep = check_first_order(s);
    const double r2 = (s.R[0] * s.R[0]).norm();
    EXPECT_EQ(rep.passed, 2.0 * r2 <= rep.tolerance);
  }
}

TEST(FirstOrder, RegularityPreservedUnderGauge) {
  // a regular two-boson state (commuting R's) stays regular after any gauge
  auto rng = make_rng(3);
  UniformCMPS s;
  s.species = testutil::bosons(2);
  s.Q = testutil::random_matrix(rng, 3, 3);
  const Matrix r = testutil::random_matrix(rng, 3, 3);
  s.R = {r, r * r + Complex(0.3, 0.1) * r};  // polynomial in r commutes with r
  ASSERT_TRUE(check_first_order(s).passed);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix g = testutil::random_gauge(rng, 3, 3.0);  // cond <= 1e3
    const auto rep = check_first_order(gauge_uniform(s, g));
    EXPECT_LE(rep.maxResidual(), 1e-8);
  }
}

TEST(FirstOrder, UnitaryGaugePreservesResidualValue) {
  auto rng = make_rng(31);
  const auto s = testutil::random_uniform(rng, 3, 2);
  const auto rep = check_first_order(s);
  const Matrix u = Eigen::HouseholderQR<Matrix>(testutil::random_matrix(rng, 3, 3))
                       .householderQ();
  const auto rep2 = check_first_order(gauge_uniform(s, u));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      EXPECT_NEAR(rep2.residuals(a, b), rep.residuals(a, b), 1e-12 * (1 + rep.residuals(a, b)));
}

TEST(HigherOrder, ScalarAlwaysRegular) {
  auto rng = make_rng(4);
  const auto s = testutil::random_uniform(rng, 1, 1);
  for (int order = 2; order <= 4; ++order) {
    const auto rep = check_higher_order(s, order);
    EXPECT_NEAR(rep.maxResidual(), 0.0, 1e-14);
  }
}

TEST(HigherOrder, CommutingPairVanishes) {
  // [Q, R] = 0 with one species: the order-2 bracket is identically zero
  auto rng = make_rng(5);
  const Matrix q = testutil::random_matrix(rng, 3, 3);
  UniformCMPS s;
  s.species = testutil::bosons(1);
  s.Q = q;
  s.R = {q * q + 2.0 * q + Matrix::Identity(3, 3)};  // polynomial in Q commutes with Q
  const auto rep = check_higher_order(s, 2);
  EXPECT_LT(rep.maxResidual(), 1e-12);
}

TEST(HigherOrder, MatchesNaiveCommutatorAssembly) {
  auto rng = make_rng(6);
  const auto s = testutil::random_uniform(rng, 2, 2);
  const auto rep = check_higher_order(s, 2);
  using testutil::NaiveMatrix;
  for (int a = 0; a < 2; ++a) {
    const NaiveMatrix Q = testutil::to_naive(s.Q);
    const NaiveMatrix Ra = testutil::to_naive(s.R[a]);
    // [Q, R_a] with the naive multiply
    NaiveMatrix qr = testutil::naive_mul(Q, Ra);
    const NaiveMatrix rq = testutil::naive_mul(Ra, Q);
    for (size_t i = 0; i < qr.size(); ++i)
      for (size_t j = 0; j < qr.size(); ++j) qr[i][j] -= rq[i][j];
    for (int b = 0; b < 2; ++b) {
      const NaiveMatrix Rb = testutil::to_naive(s.R[b]);
      NaiveMatrix lhs = testutil::naive_mul(qr, Rb);
      const NaiveMatrix rhs = testutil::naive_mul(Rb, qr);
      for (size_t i = 0; i < lhs.size(); ++i)
        for (size_t j = 0; j < lhs.size(); ++j) lhs[i][j] -= rhs[i][j];
      EXPECT_NEAR(rep.residuals(a, b), testutil::naive_frobenius(lhs), 1e-12);
    }
  }
}

TEST(HigherOrder, RejectsLowOrder) {
  auto rng = make_rng(7);
  const auto s = testutil::random_uniform(rng, 2, 1);
  try {
    check_higher_order(s, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::bad_order);
  }
}

TEST(HigherOrder, OrderCapEnforced) {
  auto rng = make_rng(10);
  const auto s = testutil::random_uniform(rng, 2, 1);
  EXPECT_NO_THROW(check_higher_order(s, 4));
  EXPECT_THROW(check_higher_order(s, 5), Error);
  EXPECT_NO_THROW(check_higher_order(s, 5, 1e-10, 6));  // cap is configurable
}

TEST(HigherOrder, FiniteUsesSuppliedDerivatives) {
  auto rng = make_rng(8);
  const auto s = testutil::random_finite(rng, 2, 64);
  const auto rep_numeric = check_higher_order(s, 2);
  // supplying the central-difference track reproduces the default path
  std::vector<std::vector<Matrix>> dr(1);
  {
    const int n = static_cast<int>(s.R[0].size());
    const double h = s.dx();
    dr[0].resize(n);
    dr[0][0] = (-3.0 * s.R[0][0] + 4.0 * s.R[0][1] - s.R[0][2]) / (2.0 * h);
    for (int k = 1; k + 1 < n; ++k) dr[0][k] = (s.R[0][k + 1] - s.R[0][k - 1]) / (2.0 * h);
    dr[0][n - 1] = (3.0 * s.R[0][n - 1] - 4.0 * s.R[0][n - 2] + s.R[0][n - 3]) / (2.0 * h);
  }
  const auto rep_supplied = check_higher_order(s, 2, dr);
  EXPECT_NEAR(rep_numeric.maxResidual(), rep_supplied.maxResidual(), 1e-12);
}

TEST(Parity, OffDiagonalFermionPasses) {
  UniformCMPS s;
  s.species = testutil::single_fermion();
  s.Q = Matrix::Zero(2, 2);
  s.Q(0, 0) = Complex(0.3, -0.1);
  s.Q(1, 1) = Complex(-0.2, 0.4);
  Matrix r = Matrix::Zero(2, 2);
  r(0, 1) = 1;
  r(1, 0) = 1;
  s.R = {r};
  const auto parity = ParityStructure::blocks(1, 1);
  const auto rep = check_parity(s, parity);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.max_residual, 0.0);
}

TEST(Parity, DiagonalFermionFails) {
  UniformCMPS s;
  s.species = testutil::single_fermion();
  s.Q = Matrix::Zero(2, 2);
  s.R = {Matrix::Identity(2, 2)};
  const auto rep = check_parity(s, ParityStructure::blocks(1, 1));
  EXPECT_FALSE(rep.passed);
  EXPECT_DOUBLE_EQ(rep.max_residual, 1.0);
}

TEST(Parity, OffBlockEntryReported) {
  UniformCMPS s;
  s.species = testutil::bosons(1);
  const double eps = 3e-4;
  s.Q = Matrix::Zero(2, 2);
  s.Q(0, 1) = eps;
  s.R = {Matrix::Identity(2, 2)};
  const auto rep = check_parity(s, ParityStructure::blocks(1, 1));
  EXPECT_FALSE(rep.passed);
  EXPECT_DOUBLE_EQ(rep.q_residual, eps);
}

TEST(ParityBuild, FermionAntidiagonal) {
  ParityBlocks blk;
  blk.first = Matrix::Constant(1, 1, Complex(1, 0));
  blk.second = Matrix::Constant(1, 1, Complex(1, 0));
  const auto [s, parity] = build_parity_state(Matrix::Zero(1, 1), Matrix::Zero(1, 1), {blk},
                                              testutil::single_fermion());
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 1) = 1;
  expected(1, 0) = 1;
  EXPECT_EQ((s.R[0] - expected).norm(), 0.0);
  EXPECT_TRUE(check_parity(s, parity).passed);
}

TEST(ParityBuild, BosonBlockDiagonal) {
  ParityBlocks blk;
  blk.first = Matrix::Constant(1, 1, Complex(2, 0));
  blk.second = Matrix::Constant(1, 1, Complex(3, 0));
  const auto [s, parity] = build_parity_state(Matrix::Zero(1, 1), Matrix::Zero(1, 1), {blk},
                                              testutil::bosons(1));
  EXPECT_DOUBLE_EQ(s.R[0](0, 0).real(), 2.0);
  EXPECT_DOUBLE_EQ(s.R[0](1, 1).real(), 3.0);
  EXPECT_DOUBLE_EQ(std::abs(s.R[0](0, 1)), 0.0);
  EXPECT_TRUE(check_parity(s, parity).passed);
}

TEST(ParityBuild, RandomRoundTrip) {
  auto rng = make_rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    ParityBlocks bos, fer;
    bos.first = testutil::random_matrix(rng, 2, 2);
    bos.second = testutil::random_matrix(rng, 3, 3);
    fer.first = testutil::random_matrix(rng, 2, 3);
    fer.second = testutil::random_matrix(rng, 3, 2);
    const auto species = SpeciesTable::build(
        {{"b", Statistics::boson}, {"f", Statistics::fermion}});
    const auto [s, parity] =
        build_parity_state(testutil::random_matrix(rng, 2, 2),
                           testutil::random_matrix(rng, 3, 3), {bos, fer}, species);
    const auto rep = check_parity(s, parity);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.max_residual, 0.0);
  }
}
