#include <gtest/gtest.h>

#include "skg/fock.hpp"

using namespace skg;

namespace {
long binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace

TEST(Fock, CountOccupationsIsStarsAndBars) {
  for (int m = 1; m <= 5; ++m)
    for (int n = 0; n <= 8; ++n) EXPECT_EQ(count_occupations(m, n), binomial(n + m - 1, m - 1));
  EXPECT_EQ(count_occupations(0, 0), 1);
  EXPECT_EQ(count_occupations(0, 2), 0);
}

TEST(Fock, BasisSizesAndOrder) {
  const OccupationBasis b(3, 0, 4);
  EXPECT_EQ(b.size(), binomial(7, 3));  // sum_{n<=4} C(n+2,2) = C(7,3)
  for (int i = 1; i < b.size(); ++i) EXPECT_LT(b[i - 1], b[i]);
  for (int i = 0; i < b.size(); ++i) EXPECT_EQ(b.index_of(b[i]), i);
  EXPECT_EQ(b.index_of({5, 0, 0}), -1);

  const OccupationBasis sector(3, 2, 2);
  EXPECT_EQ(sector.size(), 6);
  for (int i = 0; i < sector.size(); ++i) EXPECT_EQ(sector[i][0] + sector[i][1] + sector[i][2], 2);
}

TEST(Fock, ProductBasis) {
  FockSpec s;
  s.nucleon_modes = 2;
  s.meson_modes = 2;
  s.nucleon_cap = 2;
  s.meson_cap = 3;
  const FockBasis b(s);
  EXPECT_EQ(b.nucleons().size(), 6);
  EXPECT_EQ(b.mesons().size(), 10);
  EXPECT_EQ(b.dimension(), 60);
  EXPECT_EQ(b.index(2, 3), 23);

  s.nucleon_sector = 1;
  EXPECT_EQ(FockBasis(s).dimension(), 20);
}

TEST(Fock, SpecViolationsAndDimensionGuard) {
  FockSpec s;
  s.nucleon_modes = 0;
  s.meson_cap = -1;
  s.hbar = 2.0;
  EXPECT_EQ(s.violations().size(), 3u);
  EXPECT_THROW(FockBasis{s}, ConfigError);

  FockSpec big;
  big.nucleon_modes = 8;
  big.meson_modes = 8;
  big.nucleon_cap = 10;
  big.meson_cap = 10;
  EXPECT_THROW(FockBasis{big}, ConfigError);
}

TEST(Fock, SparseOperatorHermiticityFlag) {
  SparseOperator::Matrix m(3, 3);
  m.insert(0, 1) = cplx(1.0, 2.0);
  m.insert(1, 0) = cplx(1.0, -2.0);
  m.insert(2, 2) = 3.0;
  EXPECT_TRUE(SparseOperator(m).hermitian());
  SparseOperator::Matrix n(3, 3);
  n.insert(0, 1) = 1.0;
  EXPECT_FALSE(SparseOperator(n).hermitian());
  const SparseOperator op(m);
  CVec v(3);
  v << 1.0, I, 0.0;
  EXPECT_NEAR(op.expectation(v).imag(), 0.0, 1e-15);
  CVec out;
  op.as_linear_op()(v, out);
  EXPECT_LT((out - op.apply(v)).norm(), 1e-15);
}
