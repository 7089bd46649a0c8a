#include <cmath>

#include <gtest/gtest.h>

#include "skg/hartree.hpp"
#include "skg/rng.hpp"

using namespace skg;

namespace {
const SkgSystem& default_system() {
  static const SkgSystem sys(build_grids(ModelParams{}));
  return sys;
}
}  // namespace

TEST(Hartree, KernelIsEvenAndMatchesQuadrature) {
  const Grid& g = default_system().grid();
  const KernelW w = build_kernel(g);
  const int c = g.zero_mode();  // x = 0
  // W(0) = int chi^2/omega^2 dk
  EXPECT_NEAR(w.samples[c], g.dk * w.profile.sum(), 1e-12);
  for (int i = 1; i < g.n / 2; ++i) EXPECT_NEAR(w.samples[c + i], w.samples[c - i], 1e-13);
}

TEST(Hartree, GradientMatchesFiniteDifferences) {
  const SkgSystem& sys = default_system();
  Rng rng = make_rng(3);
  CVec u = random_complex(rng, sys.grid().n);
  u /= sys.grid().norm_x(u);
  EXPECT_LT(gradient_check(sys, u), 1e-6);
  // a wrong quartic coefficient is detected
  GradientCheckOptions wrong;
  wrong.quartic_coefficient = 2.0;
  EXPECT_GT(gradient_check(sys, u, wrong), 1e-6);
}

TEST(Hartree, ReducedEnergyEqualsFullEnergyAtOptimalField) {
  const SkgSystem& sys = default_system();
  Rng rng = make_rng(9);
  CVec u = random_complex(rng, sys.grid().n);
  u *= 0.4 / sys.grid().norm_x(u);
  const CVec z = reconstruct_field(sys, u);
  EXPECT_NEAR(sys.energy({u, z, 0.0}).total, hartree_energy(sys, u).value, 1e-10);
  // any other field costs more
  CVec z2 = z;
  z2[sys.grid().zero_mode()] += 0.01;
  EXPECT_GT(sys.energy({u, z2, 0.0}).total, hartree_energy(sys, u).value);
}

TEST(Hartree, ScfConvergesAtSmallDelta) {
  const SkgSystem& sys = default_system();
  for (double delta : {0.3, 0.5}) {
    const HartreeResult r = minimize(sys, delta);
    EXPECT_LT(r.residual, 1e-8);
    EXPECT_NEAR(sys.grid().norm_x(r.u0), delta, 1e-12);
    EXPECT_GE(r.energy, r.lower_bound);
    EXPECT_NEAR(r.lambda, r.lambda_from_energy, 1e-8);
    EXPECT_LT(r.energy, delta * delta * lowest_mode(sys).value);
  }
}

TEST(Hartree, ProjectedGradientAgreesWithScf) {
  const SkgSystem& sys = default_system();
  const HartreeResult a = minimize(sys, 0.3);
  MinimizeOptions pg;
  pg.method = HartreeMethod::ProjectedGradient;
  pg.tol = 1e-8;
  pg.max_iterations = 20000;
  const HartreeResult b = minimize(sys, 0.3, pg);
  EXPECT_NEAR(a.energy, b.energy, 1e-12);
  EXPECT_LT(phase_distance(sys.grid(), a.u0, b.u0), 1e-6);
}

TEST(Hartree, MultiStartAgreesModuloPhase) {
  const MultiStartReport ms = multi_start(default_system(), 0.3, 3, 1);
  ASSERT_EQ(ms.results.size(), 3u);
  EXPECT_EQ(ms.pairwise.size(), 3u);
  EXPECT_LT(ms.max_distance, 1e-6);
}

TEST(Hartree, PhaseDistanceIgnoresGlobalPhase) {
  const Grid& g = default_system().grid();
  Rng rng = make_rng(4);
  const CVec a = random_complex(rng, g.n);
  EXPECT_LT(phase_distance(g, a, a * std::polar(1.0, 2.1)), 1e-12);
  const CVec c = canonical_phase(a * std::polar(1.0, 0.7));
  Eigen::Index imax;
  c.cwiseAbs().maxCoeff(&imax);
  EXPECT_NEAR(c[imax].imag(), 0.0, 1e-15);
  EXPECT_GT(c[imax].real(), 0.0);
}

TEST(Hartree, LowerBoundFormula) {
  const SkgSystem& sys = default_system();
  const double e0 = lowest_mode(sys).value;
  const double k = sys.kernel_norm();
  EXPECT_NEAR(energy_lower_bound(sys, 0.5), e0 * 0.25 - 0.0625 * k * k, 1e-10);
  EXPECT_DOUBLE_EQ(energy_lower_bound(sys, 0.5, 2.0), 0.5 - 0.0625 * k * k);
}

TEST(Hartree, LowestModeOfHarmonicLikePotential) {
  // V = 1 + x^2 (nu = 1): -Lap + V has ground energy 2 on the whole line
  EXPECT_NEAR(lowest_mode(default_system()).value, 2.0, 1e-8);
}
