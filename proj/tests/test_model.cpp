#include <cmath>

#include <gtest/gtest.h>

#include "skg/fourier.hpp"
#include "skg/model.hpp"
#include "skg/rng.hpp"

using namespace skg;

namespace {

Grid default_grid() { return build_grids(ModelParams{}); }

CVec random_field(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return random_complex(rng, n);
}

}  // namespace

TEST(Model, GridLayout) {
  const Grid g = default_grid();
  EXPECT_EQ(g.n, 256);
  EXPECT_DOUBLE_EQ(g.dx, 2.0 * 16.0 / 256);
  EXPECT_DOUBLE_EQ(g.dk, kPi / 16.0);
  EXPECT_DOUBLE_EQ(g.x[0], -16.0);
  EXPECT_EQ(g.k[g.zero_mode()], 0.0);
  EXPECT_DOUBLE_EQ(g.k[0], -128 * kPi / 16.0);
  for (int j = 1; j < g.n; ++j) EXPECT_GT(g.k[j], g.k[j - 1]);
}

TEST(Model, DispersionPotentialCutoff) {
  EXPECT_DOUBLE_EQ(dispersion(0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(dispersion(3.0, 4.0), 5.0);
  // (1 + x^2)^{(1+nu)/2} with nu = 1 is 1 + x^2
  EXPECT_NEAR(confining_potential(2.0, 1.0, 1.0), 5.0, 1e-14);
  EXPECT_NEAR(confining_potential(0.0, 2.5, 3.0), 2.5, 1e-14);
  const CutoffSpec c{2.0, 0.7};
  EXPECT_DOUBLE_EQ(cutoff_profile(0.0, c), 0.7);
  EXPECT_EQ(cutoff_profile(2.0, c), 0.0);
  EXPECT_EQ(cutoff_profile(-2.5, c), 0.0);
  EXPECT_NEAR(cutoff_profile(1.0, c), 0.7 * std::exp(1.0 - 4.0 / 3.0), 1e-15);
}

TEST(Model, ChiIsEvenAndCompactlySupported) {
  const Grid g = default_grid();
  for (int j = 1; j < g.n; ++j) {
    const int mirror = g.n - j;
    EXPECT_EQ(g.chi[j], g.chi[mirror]);
    if (std::abs(g.k[j]) >= g.params.cutoff.radius) {
      EXPECT_EQ(g.chi[j], 0.0);
    }
  }
}

TEST(Model, ViolationsAreCollected) {
  ModelParams p;
  p.grid_size = 100;
  p.mass = -1.0;
  p.cutoff.amplitude = -0.5;
  const auto v = p.violations();
  EXPECT_EQ(v.size(), 3u);
  EXPECT_THROW(build_grids(p), ConfigError);

  ModelParams nyq;
  nyq.grid_size = 16;
  nyq.cutoff.radius = 2.0;  // pi N / 2L = 1.57
  EXPECT_EQ(nyq.violations().size(), 1u);
}

TEST(Fourier, DftMatchesDirectSum) {
  const int n = 32;
  const Dft dft(n);
  const CVec f = random_field(n, 2);
  ModelParams p;
  p.grid_size = n;
  p.box_half_length = 5.0;
  p.cutoff.radius = 1.0;
  const Grid g = build_grids(p);
  for (int sign : {-1, 1}) {
    const CVec fast = g.dft->to_momentum(f, sign);
    const CVec back = g.dft->to_position(f, sign);
    for (int j = 0; j < n; ++j) {
      cplx a = 0.0, b = 0.0;
      for (int i = 0; i < n; ++i) {
        a += std::polar(1.0, sign * g.k[j] * g.x[i]) * f[i];
        b += std::polar(1.0, sign * g.k[i] * g.x[j]) * f[i];
      }
      EXPECT_LT(std::abs(fast[j] - a), 1e-12);
      EXPECT_LT(std::abs(back[j] - b), 1e-12);
    }
  }
  EXPECT_EQ(dft.size(), n);
}

TEST(Fourier, UnitaryTransformRoundTrip) {
  const Grid g = default_grid();
  const CVec u = random_field(g.n, 3);
  const CVec uh = transform(g, u, TransformDirection::ToMomentum);
  EXPECT_NEAR(g.norm_x(u), g.norm_k(uh), 1e-12 * g.norm_x(u));
  const CVec back = transform(g, uh, TransformDirection::ToPosition);
  EXPECT_LT((back - u).norm(), 1e-12 * u.norm());
}

TEST(Fourier, GaussianTransformIsAnalytic) {
  const Grid g = default_grid();
  CVec u(g.n);
  for (int i = 0; i < g.n; ++i) u[i] = std::exp(-0.5 * g.x[i] * g.x[i]);
  const CVec uh = transform(g, u, TransformDirection::ToMomentum);
  for (int j = 0; j < g.n; ++j)
    EXPECT_NEAR(std::abs(uh[j] - std::exp(-0.5 * g.k[j] * g.k[j])), 0.0, 1e-12);
}

TEST(Fourier, DensityTransformConvention) {
  const Grid g = default_grid();
  RVec rho(g.n);
  for (int i = 0; i < g.n; ++i) rho[i] = std::exp(-(g.x[i] - 1.0) * (g.x[i] - 1.0));
  const CVec rt = density_transform(g, rho);
  // int e^{ikx} e^{-(x-1)^2} dx = sqrt(pi) e^{ik} e^{-k^2/4}
  for (int j = 0; j < g.n; j += 7) {
    const cplx exact = std::sqrt(kPi) * std::polar(std::exp(-0.25 * g.k[j] * g.k[j]), g.k[j]);
    EXPECT_LT(std::abs(rt[j] - exact), 1e-12);
  }
  const CVec rh = transform(g, rho.cast<cplx>(), TransformDirection::ToMomentum);
  for (int j = 0; j < g.n; ++j)
    EXPECT_LT(std::abs(rt[j] - std::sqrt(2.0 * kPi) * std::conj(rh[j])), 1e-12);
}

TEST(Model, FormFactorPairingMatchesSum) {
  const Grid g = default_grid();
  const CVec eta = random_field(g.n, 4);
  const double x = 0.37;
  cplx acc = 0.0;
  for (int j = 0; j < g.n; ++j)
    acc += std::conj(eta[j]) * std::polar(g.form_factor[j], g.k[j] * x);
  EXPECT_LT(std::abs(form_factor_pairing(g, eta, x) - g.dk * acc), 1e-12);
}
