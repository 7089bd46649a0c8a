#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "skg/qyukawa.hpp"
#include "skg/rng.hpp"

using namespace skg;

namespace {

const SkgSystem& default_system() {
  static const SkgSystem sys(build_grids(ModelParams{}));
  return sys;
}

const ModeSet& default_modes() {
  static const ModeSet modes = [] {
    const TestDictionary d = make_test_dictionary(default_system().grid(), 0.4, 1.95, 3);
    return build_modes(default_system(), 3, dictionary_centers(d));
  }();
  return modes;
}

FockSpec small_spec(double hbar) {
  FockSpec s;
  s.nucleon_modes = 3;
  s.meson_modes = 3;
  s.nucleon_cap = 3;
  s.meson_cap = 4;
  s.hbar = hbar;
  return s;
}

// Smallest c with P(N > c) < tail for N ~ Poisson(mean), summing the tail directly.
int poisson_quantile(double mean, double tail) {
  for (int c = 0;; ++c) {
    double p = 0.0;
    for (int n = c + 1; n < c + 400; ++n) p += std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
    if (p < tail) return c;
  }
}

}  // namespace

TEST(Modes, NucleonAndMesonSpectra) {
  const ModeSet& m = default_modes();
  ASSERT_EQ(m.nucleon_count(), 3);
  ASSERT_EQ(m.meson_count(), 3);
  EXPECT_NEAR(m.nucleon_energies[0], 2.0, 1e-8);
  EXPECT_NEAR(m.nucleon_energies[1], 4.0, 1e-8);
  EXPECT_NEAR(m.nucleon_energies[2], 6.0, 1e-7);
  const Grid& g = default_system().grid();
  for (int q = 0; q < 3; ++q) {
    EXPECT_GT(m.meson_k[q], 0.0);
    EXPECT_GT(g.chi[m.meson_nodes[q]], 0.0);
    EXPECT_DOUBLE_EQ(m.meson_omega[q], g.omega[m.meson_nodes[q]]);
  }
  // modes are orthonormal in the dx inner product
  const Eigen::MatrixXcd gram = g.dx * m.nucleon_modes.adjoint() * m.nucleon_modes;
  EXPECT_LT((gram - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-10);
}

TEST(Hamiltonian, HermitianAndNumberConserving) {
  const auto ham = build_hamiltonian(default_modes(), small_spec(0.5));
  EXPECT_TRUE(ham->h->hermitian());
  EXPECT_LT(number_commutator(*ham), 1e-10);
  const Eigen::MatrixXcd H(ham->h->matrix());
  EXPECT_LT((H - H.adjoint()).norm(), 1e-12);
}

TEST(Hamiltonian, DecoupledSectorEnergyIsNHbarE0) {
  ModeSet free = default_modes();
  for (auto& g : free.coupling) g.setZero();
  for (int n : {1, 2, 3}) {
    FockSpec s = small_spec(0.25);
    s.nucleon_sector = n;
    const auto ham = build_hamiltonian(free, s);
    const GroundState gs = ground_state(*ham);
    EXPECT_NEAR(gs.energy, n * 0.25 * free.nucleon_energies[0], 1e-10);
    EXPECT_FALSE(gs.degenerate);
  }
}

TEST(Hamiltonian, GroundStateMatchesDense) {
  FockSpec s = small_spec(0.5);
  s.nucleon_sector = 2;
  const auto ham = build_hamiltonian(default_modes(), s);
  const GroundState gs = ground_state(*ham);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(ham->h->matrix())};
  EXPECT_NEAR(gs.energy, es.eigenvalues()[0], 1e-10);
  EXPECT_NEAR(gs.second_energy, es.eigenvalues()[1], 1e-8);
  EXPECT_NEAR(std::abs(gs.state.coeffs.dot(es.eigenvectors().col(0))), 1.0, 1e-10);
}

TEST(Hamiltonian, PropagatorMatchesDense) {
  const FockSpec s = small_spec(0.5);
  const auto ham = build_hamiltonian(default_modes(), s);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(ham->h->matrix())};
  Rng rng = make_rng(1);
  QuantumState psi;
  psi.coeffs = random_complex(rng, ham->basis.dimension()).normalized();
  const double t = 1.3;
  const CVec ph = es.eigenvalues().unaryExpr([&](double l) { return std::polar(1.0, -t * l / s.hbar); });
  const CVec dense = es.eigenvectors() * (ph.asDiagonal() * (es.eigenvectors().adjoint() * psi.coeffs));
  EXPECT_LT((propagate(*ham->h, psi, t, s.hbar).coeffs - dense).norm(), 1e-10);
}

TEST(Ladder, CanonicalCommutatorBelowCap) {
  const FockSpec s = small_spec(0.25);
  const FockBasis b(s);
  // a vector living on states well below both caps
  CVec v = CVec::Zero(b.dimension());
  Rng rng = make_rng(2);
  for (int i = 0; i < b.nucleons().size(); ++i)
    for (int j = 0; j < b.mesons().size(); ++j) {
      int nt = 0, mt = 0;
      for (int c : b.nucleons()[i]) nt += c;
      for (int c : b.mesons()[j]) mt += c;
      if (nt < 3 && mt < 4) v[b.index(i, j)] = random_complex(rng, 1)[0];
    }
  for (int mode = 0; mode < 6; ++mode) {
    const CVec ca = apply_annihilator(b, mode, apply_creator(b, mode, v));
    const CVec ac = apply_creator(b, mode, apply_annihilator(b, mode, v));
    EXPECT_LT((ca - ac - s.hbar * v).norm(), 1e-13) << "mode " << mode;
  }
}

TEST(Coherent, IsApproximateEigenvectorOfAnnihilators) {
  ModeAmplitudes a{CVec::Zero(3), CVec::Zero(3)};
  a.nucleon[0] = {0.3, 0.1};
  a.meson[1] = {-0.2, 0.15};
  FockSpec s = small_spec(0.25);
  s.nucleon_cap = 8;
  s.meson_cap = 8;
  const FockBasis b(s);
  const QuantumState psi = coherent_state(b, a);
  EXPECT_NEAR(psi.coeffs.norm(), 1.0, 1e-14);
  EXPECT_GT(psi.captured_norm, 1.0 - 1e-8);
  const CVec an = apply_annihilator(b, 0, psi.coeffs);
  EXPECT_LT((an - a.nucleon[0] * psi.coeffs).norm(), 1e-4);
  const CVec am = apply_annihilator(b, 4, psi.coeffs);
  EXPECT_LT((am - a.meson[1] * psi.coeffs).norm(), 1e-4);
}

TEST(Coherent, CharacteristicFunctionMatchesFormula) {
  ModeAmplitudes a{CVec::Zero(3), CVec::Zero(3)};
  a.nucleon[0] = {0.3, 0.1};
  a.meson[1] = {-0.2, 0.15};
  FockSpec s = small_spec(0.25);
  s.nucleon_cap = 8;
  s.meson_cap = 8;
  const FockBasis b(s);
  const QuantumState psi = coherent_state(b, a);
  CVec en(3), em(3);
  en << cplx(0.5, 0.2), cplx(0.1, 0.0), cplx(0.0, 0.3);
  em << cplx(0.2, -0.1), cplx(0.4, 0.1), cplx(-0.3, 0.0);
  EXPECT_LT(std::abs(weyl_expectation(b, en, em, psi) - coherent_characteristic(a, en, em, 0.25)),
            1e-6);
  // W(0) = 1
  EXPECT_NEAR(std::abs(coherent_characteristic(a, CVec::Zero(3), CVec::Zero(3), 0.25) - 1.0), 0.0,
              1e-15);
}

TEST(Coherent, TruncationIsReported) {
  ModeAmplitudes a{CVec::Zero(3), CVec::Zero(3)};
  a.meson[0] = 1.5;
  FockSpec s = small_spec(0.25);
  s.meson_cap = 2;
  const FockBasis b(s);
  try {
    coherent_state(b, a);
    FAIL() << "expected a truncation error";
  } catch (const TruncationError& e) {
    EXPECT_LT(e.captured(), 1.0 - 1e-8);
    EXPECT_GE(e.suggested_meson_cap(), 36);  // 4 |beta|^2 / hbar
  }
}

TEST(Caps, AdequateCapMatchesPoissonTail) {
  for (double mean : {0.25, 1.0, 3.0, 9.0}) {
    const int expected = std::max(static_cast<int>(std::ceil(4.0 * mean)), poisson_quantile(mean, 1e-10));
    EXPECT_EQ(adequate_cap(mean), expected) << "mean " << mean;
  }
  EXPECT_EQ(adequate_cap(0.0), 0);
}

TEST(Truncated, RungeKuttaConservesEnergyAndNorm) {
  const TruncatedSkg model(default_modes());
  ModeAmplitudes a{CVec::Zero(3), CVec::Zero(3)};
  a.nucleon << cplx(0.4, 0.1), cplx(0.1, -0.2), cplx(0.05, 0.0);
  a.meson << cplx(0.1, 0.0), cplx(0.0, -0.05), cplx(0.02, 0.02);
  const double e0 = model.energy(a), n0 = a.nucleon.squaredNorm();
  for (int i = 0; i < 2000; ++i) model.step(a, 1e-3);
  EXPECT_NEAR(model.energy(a), e0, 1e-10);
  EXPECT_NEAR(a.nucleon.squaredNorm(), n0, 1e-10);
}

TEST(Truncated, MinimumLiesInEnergyBracket) {
  const TruncatedSkg model(default_modes());
  const TruncatedMinimum m = minimize_truncated(model, 0.5);
  const auto [lo, hi] = energy_bracket(default_modes(), 0.5);
  EXPECT_GE(m.energy, lo);
  EXPECT_LE(m.energy, hi);
  EXPECT_LT(m.residual, 1e-8);
  EXPECT_LT(m.max_distance, 1e-6);
  EXPECT_NEAR(m.state.nucleon.norm(), 0.5, 1e-12);
}

TEST(Truncated, CookAndDirectRoutesAgree) {
  const TruncatedSkg model(default_modes());
  ModeAmplitudes a{CVec::Zero(3), CVec::Zero(3)};
  a.nucleon[0] = 0.5;
  a.meson[1] = cplx(0.05, 0.02);
  std::vector<CVec> etas{CVec::Unit(3, 0), CVec::Unit(3, 2)};
  for (auto d : {Direction::Forward, Direction::Backward})
    for (const auto& p : truncated_pairings(model, a, etas, 3.0, d))
      EXPECT_LT(std::abs(p.cook - p.direct), 1e-9);
}

TEST(Sweep, ConfigViolationsAndNames) {
  SweepConfig c;
  c.hbars = {0.5, 2.0};
  c.observable = Observable::Ground;
  c.delta = 0.0;
  EXPECT_EQ(c.violations().size(), 3u);
  for (auto o : {Observable::Weyl, Observable::Field, Observable::Correlation, Observable::Ground})
    EXPECT_EQ(observable_from_string(to_string(o)), o);
  EXPECT_THROW(observable_from_string("spin"), ConfigError);
}

TEST(Sweep, SmallWeylSweepRowsAreComplete) {
  SweepConfig c;
  c.hbars = {0.5};
  c.meson_modes = 2;
  c.nucleon_modes = 2;
  c.asymptotic.horizon = 1.0;
  std::vector<SweepRow> seen;
  const SweepReport r = semiclassical_sweep(default_system(), c, [&](const SweepRow& row) { seen.push_back(row); });
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(seen.size(), r.rows.size());
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.observable_id.rfind("weyl:", 0), 0u);
    EXPECT_GT(row.dims, 0);
    EXPECT_TRUE(std::isfinite(row.gap));
    EXPECT_NEAR(std::abs(row.classical), 1.0, 1e-12);
  }
}
