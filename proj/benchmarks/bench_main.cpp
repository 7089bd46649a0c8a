#include <benchmark/benchmark.h>

#include "skg/hartree.hpp"
#include "skg/qyukawa.hpp"
#include "skg/rng.hpp"
#include "skg/scatter.hpp"

using namespace skg;

namespace {

ClassicalState gaussian_state(const Grid& g) {
  ClassicalState s{CVec(g.n), CVec::Zero(g.n), 0.0};
  for (int i = 0; i < g.n; ++i) {
    const double x = g.x[i] - 1.0;
    s.u[i] = std::polar(std::exp(-0.5 * x * x), 0.5 * g.x[i]);
  }
  s.u *= 0.5 / g.norm_x(s.u);
  return s;
}

ModelParams box(int n, double L) {
  ModelParams p;
  p.grid_size = n;
  p.box_half_length = L;
  return p;
}

const ModeSet& default_modes() {
  static const SkgSystem sys(build_grids(ModelParams{}));
  static const ModeSet modes = build_modes(
      sys, 3, dictionary_centers(make_test_dictionary(sys.grid(), 0.4, 1.95, 3)));
  return modes;
}

}  // namespace

static void BM_StrangStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SkgSystem sys(build_grids(box(n, n / 4.0)));
  ClassicalState s = gaussian_state(sys.grid());
  const StrangStepper stepper(sys, 1e-3);
  for (auto _ : state) {
    stepper.step(s);
    benchmark::DoNotOptimize(s.u.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StrangStep)->Arg(256)->Arg(512)->Arg(1024);

static void BM_ScatteringStep(benchmark::State& state) {
  const SkgSystem sys(build_grids(box(512, 128.0)));
  const TestDictionary d = make_test_dictionary(sys.grid(), 0.4, 1.95, 8);
  std::vector<CVec> probes;
  for (const auto& f : d.functions) probes.push_back(f.values);
  ScatteringRun run(sys, gaussian_state(sys.grid()), Direction::Forward, 1e-3, probes);
  double T = 0.0;
  for (auto _ : state) {
    T += 0.1;
    run.advance_to(T);
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_ScatteringStep)->Unit(benchmark::kMillisecond);

static void BM_HartreeScf(benchmark::State& state) {
  const SkgSystem sys(build_grids(ModelParams{}));
  for (auto _ : state) benchmark::DoNotOptimize(minimize(sys, 0.5).energy);
}
BENCHMARK(BM_HartreeScf)->Unit(benchmark::kMillisecond);

static void BM_BuildHamiltonian(benchmark::State& state) {
  FockSpec spec;
  spec.nucleon_modes = 3;
  spec.meson_modes = 3;
  spec.nucleon_cap = static_cast<int>(state.range(0));
  spec.meson_cap = static_cast<int>(state.range(0));
  spec.hbar = 0.25;
  for (auto _ : state) benchmark::DoNotOptimize(build_hamiltonian(default_modes(), spec));
  state.counters["dim"] = FockBasis(spec).dimension();
}
BENCHMARK(BM_BuildHamiltonian)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Expv(benchmark::State& state) {
  FockSpec spec;
  spec.nucleon_modes = 3;
  spec.meson_modes = 3;
  spec.nucleon_cap = static_cast<int>(state.range(0));
  spec.meson_cap = static_cast<int>(state.range(0));
  spec.hbar = 0.25;
  const auto ham = build_hamiltonian(default_modes(), spec);
  Rng rng = make_rng(1);
  QuantumState psi;
  psi.coeffs = random_complex(rng, ham->basis.dimension()).normalized();
  for (auto _ : state) benchmark::DoNotOptimize(propagate(*ham->h, psi, 0.025, spec.hbar).coeffs.data());
  state.counters["dim"] = ham->basis.dimension();
}
BENCHMARK(BM_Expv)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
