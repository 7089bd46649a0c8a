#include <cmath>

#include <gtest/gtest.h>

#include "skg/scatter.hpp"

using namespace skg;

namespace {

ClassicalState bump(const Grid& g, double x0, double zamp) {
  ClassicalState s{CVec(g.n), CVec::Zero(g.n), 0.0};
  for (int i = 0; i < g.n; ++i) {
    const double x = g.x[i] - x0;
    s.u[i] = std::polar(std::exp(-0.5 * x * x), 0.5 * g.x[i]);
  }
  s.u *= 0.5 / g.norm_x(s.u);
  for (int j = 0; j < g.n; ++j) {
    const double d = g.k[j] - 1.2;
    s.z[j] = zamp * std::exp(-d * d / 0.08);
  }
  return s;
}

}  // namespace

TEST(DecayFit, RecoversPowerLaw) {
  std::vector<double> tau, g;
  for (int i = 0; i <= 8000; ++i) {
    const double t = 0.01 * i;
    tau.push_back(t);
    g.push_back(3.0 * std::pow(1.0 + t, -2.5));
  }
  const DecayFit f = fit_decay(tau, g, 10.0, 80.0, 1.0);
  EXPECT_NEAR(f.exponent, 2.5, 0.1);
  EXPECT_GT(f.bins_used, 10);
  EXPECT_DOUBLE_EQ(f.envelope_power, 2.0);  // min(p, 1 + nu)
  EXPECT_GE(f.envelope, 3.0 * std::pow(81.0, -2.5) * 80.0 * 80.0 * 0.99);
}

TEST(DecayFit, ZeroProfileHasInfiniteExponentAndNoTail) {
  std::vector<double> tau{0.0, 1.0, 2.0, 3.0}, g(4, 0.0);
  const DecayFit f = fit_decay(tau, g, 1.0, 3.0, 1.0);
  EXPECT_TRUE(std::isinf(f.exponent));
  EXPECT_EQ(tail_bound(f, 3.0), 0.0);
}

TEST(DecayFit, TailBoundFormula) {
  DecayFit f;
  f.envelope = 2.0;
  f.envelope_power = 2.0;
  EXPECT_DOUBLE_EQ(tail_bound(f, 10.0), 0.2);
  f.envelope_power = 1.0;
  EXPECT_TRUE(std::isinf(tail_bound(f, 10.0)));
}

TEST(Scatter, RecurrenceHorizonScalesWithBox) {
  ModelParams p;
  p.box_half_length = 64.0;
  p.grid_size = 512;
  const SkgSystem small(build_grids(p));
  p.box_half_length = 128.0;
  const SkgSystem large(build_grids(p));
  const double vmax = 2.0 / std::sqrt(5.0);
  const double a = recurrence_horizon(small, bump(small.grid(), 1.0, 0.0).u);
  const double b = recurrence_horizon(large, bump(large.grid(), 1.0, 0.0).u);
  EXPECT_GT(a, 0.0);
  // same radii, box doubled: the horizon grows by 2 L / vmax
  EXPECT_NEAR(b - a, 128.0 / vmax, 2.0 * large.grid().dx / vmax + 1.0);
}

TEST(Scatter, FreeFieldPairingsAreInitialData) {
  ModelParams p;
  p.cutoff.amplitude = 0.0;
  const SkgSystem sys(build_grids(p));
  const Grid& g = sys.grid();
  const ClassicalState s = bump(g, 1.0, 0.2);
  const TestDictionary d = make_test_dictionary(g, 0.4, 1.95, 4);
  PairingOptions po;
  po.initial_horizon = 5.0;
  po.max_horizon = 5.0;
  for (Direction dir : {Direction::Forward, Direction::Backward}) {
    const auto pairs = pair_wave_operator(sys, s, d.functions, dir, po);
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      EXPECT_LT(std::abs(pairs[q].value - g.inner_k(d[q].values, s.z)), 1e-13);
      EXPECT_LT(std::abs(pairs[q].direct_proxy - pairs[q].value), 1e-12);
      EXPECT_TRUE(pairs[q].certified);
    }
  }
}

TEST(Scatter, CookIntegralMatchesDirectProxyWithoutTail) {
  // Both routes are exact for the split-step flow, up to the quadrature rule.
  ModelParams p;
  p.box_half_length = 64.0;
  p.grid_size = 512;
  const SkgSystem sys(build_grids(p));
  const Grid& g = sys.grid();
  const TestDictionary d = make_test_dictionary(g, 0.4, 1.95, 3);
  std::vector<CVec> probes;
  for (const auto& f : d.functions) probes.push_back(f.values);
  ScatteringRun run(sys, bump(g, 1.0, 0.1), Direction::Forward, 1e-3, probes);
  run.advance_to(5.0);
  EXPECT_EQ(run.steps(), 5000);
  for (std::size_t q = 0; q < probes.size(); ++q) {
    const double gap = std::abs(run.cook_value(q, 5.0) - run.direct_proxy(q));
    EXPECT_LT(gap, 1e-5) << d[q].label;
    EXPECT_LT(run.quadrature_error(q, 5.0), 1e-5);
  }
}

TEST(Scatter, ProfileLengthFollowsSteps) {
  const SkgSystem sys(build_grids(ModelParams{}));
  const TestDictionary d = make_test_dictionary(sys.grid(), 0.4, 1.95, 2);
  const DecayProfile prof = decay_profile(sys, bump(sys.grid(), 0.0, 0.0), d[0], 20.0);
  EXPECT_EQ(prof.tau.size(), prof.g.size());
  EXPECT_EQ(prof.tau.size(), 20001u);
  EXPECT_DOUBLE_EQ(prof.tau.back(), 20.0);
}

TEST(Scatter, DirectionNames) {
  EXPECT_STREQ(to_string(Direction::Forward), "forward");
  EXPECT_STREQ(to_string(Direction::Backward), "backward");
}
