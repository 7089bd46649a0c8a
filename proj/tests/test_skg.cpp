#include <cmath>

#include <gtest/gtest.h>

#include "skg/dictionary.hpp"
#include "skg/fourier.hpp"
#include "skg/hartree.hpp"
#include "skg/skg.hpp"

using namespace skg;

namespace {

ClassicalState sample_state(const Grid& g, double zamp = 0.2) {
  ClassicalState s{CVec(g.n), CVec::Zero(g.n), 0.0};
  for (int i = 0; i < g.n; ++i) {
    const double x = g.x[i] - 1.0;
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

TEST(Skg, EnergyPartsAddUp) {
  const SkgSystem sys(build_grids(ModelParams{}));
  const ClassicalState s = sample_state(sys.grid());
  const EnergyParts e = sys.energy(s);
  EXPECT_NEAR(e.total, e.free + e.interaction, 1e-14);
  EXPECT_NEAR(e.free, e.kinetic + e.field, 1e-14);
  EXPECT_NEAR(e.mass, 0.25, 1e-14);
  EXPECT_TRUE(check_energy_bounds(sys, s, e).holds);
}

TEST(Skg, InteractionEqualsSmearedFieldIntegral) {
  // 2 Re int conj(z) F dk = int phi |u|^2 dx with the documented convention
  const SkgSystem sys(build_grids(ModelParams{}));
  const Grid& g = sys.grid();
  const ClassicalState s = sample_state(g);
  const RVec phi = sys.smeared_field(s.z);
  const double direct = g.dx * (phi.array() * s.u.array().abs2()).sum();
  EXPECT_NEAR(sys.energy(s).interaction, direct, 1e-13);
}

TEST(Skg, PairConvolutionMatchesDirectKernel) {
  const SkgSystem sys(build_grids(ModelParams{}));
  const Grid& g = sys.grid();
  const RVec rho = sample_state(g).u.array().abs2();
  const RVec fast = sys.pair_convolution(rho);
  const RVec slow = convolve_direct(g, build_kernel(g), rho);
  EXPECT_LT((fast - slow).norm(), 1e-12 * slow.norm());
}

TEST(Skg, ShortFlowConservesMassAndEnergy) {
  const SkgSystem sys(build_grids(ModelParams{}));
  FlowConfig fc;
  fc.horizon = 2.0;
  fc.stride = 100;
  const Trajectory tr = evolve(sys, sample_state(sys.grid()), fc);
  ASSERT_EQ(tr.samples.size(), 21u);
  for (const auto& s : tr.samples) {
    EXPECT_NEAR(s.mass, tr.samples[0].mass, 1e-13);
    EXPECT_NEAR(s.energy, tr.samples[0].energy, 1e-6 * std::abs(tr.samples[0].energy));
  }
  EXPECT_NEAR(tr.final_state.t, 2.0, 1e-12);
}

TEST(Skg, BackwardFlowUndoesForwardFlow) {
  const SkgSystem sys(build_grids(ModelParams{}));
  const ClassicalState s0 = sample_state(sys.grid());
  FlowConfig fc;
  fc.horizon = 1.0;
  const ClassicalState s1 = evolve(sys, s0, fc).final_state;
  fc.backward = true;
  const ClassicalState s2 = evolve(sys, s1, fc).final_state;
  EXPECT_LT((s2.u - s0.u).norm(), 1e-10);
  EXPECT_LT((s2.z - s0.z).norm(), 1e-10);
}

TEST(Skg, StrangStepIsSecondOrder) {
  const SkgSystem sys(build_grids(ModelParams{}));
  const ClassicalState s0 = sample_state(sys.grid());
  auto run = [&](double dt) {
    FlowConfig fc;
    fc.dt = dt;
    fc.horizon = 0.5;
    fc.stride = 100000;
    return evolve(sys, s0, fc).final_state;
  };
  const ClassicalState ref = run(1.25e-4);
  const double e1 = (run(4e-3).u - ref.u).norm();
  const double e2 = (run(2e-3).u - ref.u).norm();
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.15);
}

TEST(Skg, FreeFieldIsExact) {
  ModelParams p;
  p.cutoff.amplitude = 0.0;
  const SkgSystem sys(build_grids(p));
  const Grid& g = sys.grid();
  const ClassicalState s = sample_state(g);
  FlowConfig fc;
  fc.horizon = 3.0;
  const Trajectory tr = evolve(sys, s, fc);
  EXPECT_LT(g.norm_k(tr.final_state.z - free_evolve(g, s.z, 3.0)), 1e-12);
  EXPECT_EQ(sys.energy(s).interaction, 0.0);
}

TEST(Skg, FlowConfigViolations) {
  FlowConfig fc;
  fc.dt = 0.0;
  fc.horizon = -1.0;
  fc.stride = 0;
  EXPECT_EQ(fc.violations().size(), 3u);
}

TEST(Skg, HartreePairIsStationary) {
  const SkgSystem sys(build_grids(ModelParams{}));
  const HartreeResult r = minimize(sys, 0.5);
  const StationaryResidual res = stationary_residual(sys, {r.u0, r.z0, 0.0});
  EXPECT_LT(res.r_u, 1e-8);
  EXPECT_LT(res.r_z, 1e-12);
  EXPECT_NEAR(res.lambda, r.lambda, 1e-9);
}
