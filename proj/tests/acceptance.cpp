// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: skg_acceptance [criterion ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "skg/hartree.hpp"
#include "skg/qyukawa.hpp"
#include "skg/rng.hpp"
#include "skg/scatter.hpp"

using namespace skg;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ModelParams scatter_box() {
  ModelParams p;
  p.box_half_length = 128.0;
  p.grid_size = 512;
  return p;
}

ClassicalState gaussian(const Grid& g, double center, double momentum, double norm) {
  ClassicalState s{CVec(g.n), CVec::Zero(g.n), 0.0};
  for (int i = 0; i < g.n; ++i) {
    const double x = g.x[i] - center;
    s.u[i] = std::polar(std::exp(-0.5 * x * x), momentum * g.x[i]);
  }
  s.u *= norm / g.norm_x(s.u);
  return s;
}

void add_meson_bump(const Grid& g, ClassicalState& s, double amplitude, double center) {
  for (int j = 0; j < g.n; ++j) {
    const double d = g.k[j] - center;
    s.z[j] = amplitude * std::exp(-d * d / 0.08);
  }
}

// Gaussian nucleon with random center, width and momentum plus a random meson bump.
ClassicalState random_state(const Grid& g, std::uint64_t seed) {
  Rng rng = make_rng(seed, 41);
  const double center = -2.0 + 4.0 * uniform_open(rng);
  const double width = 0.6 + 0.8 * uniform_open(rng);
  const double momentum = -1.0 + 2.0 * uniform_open(rng);
  ClassicalState s{CVec(g.n), CVec::Zero(g.n), 0.0};
  for (int i = 0; i < g.n; ++i) {
    const double x = (g.x[i] - center) / width;
    s.u[i] = std::polar(std::exp(-0.5 * x * x), momentum * g.x[i]);
  }
  s.u *= 0.5 / g.norm_x(s.u);
  add_meson_bump(g, s, 0.05 + 0.1 * uniform_open(rng), 0.8 + 0.7 * uniform_open(rng));
  return s;
}

double relative_drift(const Trajectory& tr, double FlowSample::*field) {
  const double ref = tr.samples.front().*field;
  double d = 0.0;
  for (const auto& s : tr.samples) d = std::max(d, std::abs(s.*field - ref) / std::abs(ref));
  return d;
}

// 1. Conservation at default parameters.
Verdict conservation() {
  const SkgSystem sys(build_grids(ModelParams{}));
  const Grid& g = sys.grid();
  ClassicalState s = gaussian(g, 1.0, 0.5, 0.5);
  add_meson_bump(g, s, 0.2, 1.2);
  FlowConfig fc;
  fc.dt = 1e-3;
  fc.horizon = 50.0;
  fc.stride = 100;
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory tr = evolve(sys, s, fc);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double dm = relative_drift(tr, &FlowSample::mass);
  const double de = relative_drift(tr, &FlowSample::energy);
  return {dm <= 1e-12 && de <= 1e-6 && secs <= 60.0,
          "mass drift " + fmt("%.2e", dm) + ", energy drift " + fmt("%.2e", de) + ", " +
              fmt("%.1f", secs) + " s"};
}

// 2. chi = 0: z evolves freely and pairings reduce to <xi, z0>.
Verdict free_field() {
  ModelParams p;
  p.cutoff.amplitude = 0.0;
  const SkgSystem sys(build_grids(p));
  const Grid& g = sys.grid();
  ClassicalState s = gaussian(g, 1.0, 0.5, 0.5);
  add_meson_bump(g, s, 0.2, 1.2);
  double zerr = 0.0;
  for (double T : {1.0, 10.0}) {
    FlowConfig fc;
    fc.horizon = T;
    fc.stride = 1000;
    const Trajectory tr = evolve(sys, s, fc);
    zerr = std::max(zerr, g.norm_k(tr.final_state.z - free_evolve(g, s.z, T)));
  }
  const TestDictionary dict = make_test_dictionary(g, 0.4, 1.95, 8);
  PairingOptions po;
  po.max_horizon = 20.0;
  double perr = 0.0;
  for (Direction d : {Direction::Forward, Direction::Backward}) {
    const auto pairs = pair_wave_operator(sys, s, dict.functions, d, po);
    for (std::size_t q = 0; q < pairs.size(); ++q)
      perr = std::max(perr, std::abs(pairs[q].value - g.inner_k(dict[q].values, s.z)));
  }
  return {zerr <= 1e-12 && perr <= 1e-12,
          "|z(t) - e^{-it omega} z0| " + fmt("%.2e", zerr) + ", pairing error " + fmt("%.2e", perr)};
}

// 3. Dispersive decay of the Cook integrand.
Verdict dispersive_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  const SkgSystem sys(build_grids(scatter_box()));
  const Grid& g = sys.grid();
  ClassicalState s = gaussian(g, 1.0, 0.5, 0.5);
  add_meson_bump(g, s, 0.1, 1.2);
  const TestDictionary dict = make_test_dictionary(g, 0.4, 1.95, 5);
  std::vector<CVec> probes;
  for (const auto& f : dict.functions) probes.push_back(f.values);
  ScatteringRun run(sys, s, Direction::Forward, 1e-3, probes);
  run.advance_to(80.0);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < probes.size(); ++q)
    worst = std::min(worst, run.profile(q, 10.0, 80.0, 1.0).fit.exponent);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst >= 1.8 && secs <= 300.0,
          "min exponent " + fmt("%.3f", worst) + " over 5 probes, " + fmt("%.1f", secs) + " s"};
}

// 4. Cook integral against the direct proxy.
Verdict two_routes() {
  const SkgSystem sys(build_grids(scatter_box()));
  const Grid& g = sys.grid();
  const TestDictionary dict = make_test_dictionary(g, 0.4, 1.95, 8);
  bool ok = true;
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_gap = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const ClassicalState s = random_state(g, seed);
    for (const auto& p : pair_wave_operator(sys, s, dict.functions, Direction::Forward)) {
      const double gap = std::abs(p.value - p.direct_proxy);
      const double allowed = p.tail_bound + 1e-6;
      ok = ok && gap <= allowed;
      worst_gap = std::max(worst_gap, gap);
      worst_excess = std::max(worst_excess, gap - allowed);
    }
  }
  return {ok, "max gap " + fmt("%.2e", worst_gap) + ", max(gap - bound) " +
                  fmt("%.2e", worst_excess) + " over 3 states x 8 probes"};
}

// 5. Intertwining with the free flow.
Verdict intertwining() {
  const SkgSystem sys(build_grids(scatter_box()));
  const Grid& g = sys.grid();
  const TestDictionary dict = make_test_dictionary(g, 0.4, 1.95, 8);
  PairingOptions po;
  po.max_horizon = 60.0;
  bool ok = true;
  double worst_ratio = 0.0, worst_dev = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const ClassicalState s = random_state(g, seed);
    for (const auto& r : intertwining_check(sys, s, dict.functions, {1.0, 5.0, 10.0},
                                            Direction::Forward, po)) {
      ok = ok && r.deviation <= r.certificate;
      worst_dev = std::max(worst_dev, r.deviation);
      worst_ratio = std::max(worst_ratio, r.deviation / r.certificate);
    }
  }
  return {ok, "max deviation " + fmt("%.2e", worst_dev) + ", max deviation/certificate " +
                  fmt("%.3f", worst_ratio)};
}

// 6. Hartree suite.
Verdict hartree_suite() {
  const SkgSystem sys(build_grids(ModelParams{}));
  const Grid& g = sys.grid();
  std::ostringstream os;
  bool ok = true;

  Rng rng = make_rng(3);
  CVec u = random_complex(rng, g.n);
  u /= g.norm_x(u);
  const double gc = gradient_check(sys, u);
  ok = ok && gc <= 1e-6;
  os << "(a) " << fmt("%.1e", gc);

  double worst_res = 0.0, worst_id = 0.0, worst_lb = -std::numeric_limits<double>::infinity();
  auto check_bound = [&](const HartreeResult& r) {
    for (double e : r.energy_history) worst_lb = std::max(worst_lb, r.lower_bound - e);
    worst_lb = std::max(worst_lb, r.lower_bound - r.energy);
  };
  for (double delta : {0.3, 0.5}) {
    const HartreeResult r = minimize(sys, delta);
    worst_res = std::max(worst_res, r.residual);
    const double e = sys.energy({r.u0, r.z0, 0.0}).total;
    worst_id = std::max(worst_id, std::abs(e - r.energy));
    check_bound(r);
  }
  ok = ok && worst_res <= 1e-8 && worst_id <= 1e-10;
  os << ", (b) " << fmt("%.1e", worst_res) << ", (c) " << fmt("%.1e", worst_id);

  const MultiStartReport ms = multi_start(sys, 0.3, 5, 1);
  for (const auto& r : ms.results) check_bound(r);
  ok = ok && ms.max_distance <= 1e-6;
  os << ", (d) " << fmt("%.1e", ms.max_distance);

  // random unit-mass states never undercut the bound either
  for (int i = 0; i < 20; ++i) {
    CVec v = random_complex(rng, g.n);
    v *= 0.5 / g.norm_x(v);
    worst_lb = std::max(worst_lb, energy_lower_bound(sys, 0.5) - hartree_energy(sys, v).value);
  }
  ok = ok && worst_lb <= 0.0;
  os << ", (e) max(bound - E) " << fmt("%.2e", worst_lb);
  return {ok, os.str()};
}

// 7. Radiationless minimizer against a generic state of the same mass.
Verdict radiationless() {
  const SkgSystem sys(build_grids(scatter_box()));
  const Grid& g = sys.grid();
  MinimizeOptions mo;
  mo.tol = 1e-11;
  const HartreeResult r = minimize(sys, 0.5, mo);
  const TestDictionary dict = make_test_dictionary(g, 0.4, 1.95, 8);
  const RadiationlessVerdict ground = is_radiationless(sys, {r.u0, r.z0, 0.0}, dict, 0.0);
  const RadiationlessVerdict generic = is_radiationless(sys, gaussian(g, 2.0, 0.0, 0.5), dict, 0.0);
  const double separation = generic.max_pairing / std::max(ground.max_pairing, 1e-300);
  return {ground.radiationless && generic.max_pairing >= 1e-2 && separation >= 1e4,
          "minimizer " + fmt("%.2e", ground.max_pairing) + " (threshold " +
              fmt("%.2e", ground.threshold) + "), generic " + fmt("%.2e", generic.max_pairing) +
              ", separation " + fmt("%.1e", separation)};
}

// 8. Quantum kernels against dense linear algebra.
Verdict quantum_kernels() {
  const SkgSystem sys(build_grids(ModelParams{}));
  const TestDictionary dict = make_test_dictionary(sys.grid(), 0.4, 1.95, 3);
  const ModeSet modes = build_modes(sys, 3, dictionary_centers(dict));
  FockSpec spec;
  spec.nucleon_modes = 3;
  spec.meson_modes = 3;
  spec.nucleon_cap = 3;
  spec.meson_cap = 4;
  spec.hbar = 0.5;
  const auto ham = build_hamiltonian(modes, spec);
  const Eigen::MatrixXcd H(ham->h->matrix());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  Rng rng = make_rng(1);
  QuantumState psi;
  psi.coeffs = random_complex(rng, static_cast<int>(H.rows())).normalized();
  double prop_err = 0.0;
  for (double t : {0.3, 1.3, 4.0}) {
    const CVec phases = es.eigenvalues().unaryExpr(
        [&](double l) { return std::polar(1.0, -t * l / spec.hbar); });
    const CVec dense = es.eigenvectors() * (phases.asDiagonal() * (es.eigenvectors().adjoint() * psi.coeffs));
    prop_err = std::max(prop_err, (propagate(*ham->h, psi, t, spec.hbar).coeffs - dense).norm());
  }

  FockSpec sec = spec;
  sec.nucleon_sector = 2;
  const auto hs = build_hamiltonian(modes, sec);
  const GroundState gs = ground_state(*hs);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ds{Eigen::MatrixXcd(hs->h->matrix())};
  const double e_err = std::abs(gs.energy - ds.eigenvalues()[0]);
  const double v_err = std::abs(1.0 - std::abs(gs.state.coeffs.dot(ds.eigenvectors().col(0))));

  const double comm = number_commutator(*ham);

  ModeAmplitudes a{CVec::Zero(3), CVec::Zero(3)};
  a.nucleon[0] = {0.3, 0.1};
  a.meson[1] = {-0.2, 0.15};
  FockSpec cs = spec;
  cs.hbar = 0.25;
  cs.nucleon_cap = 8;
  cs.meson_cap = 8;
  const FockBasis basis(cs);
  const QuantumState coh = coherent_state(basis, a);
  CVec en(3), em(3);
  en << cplx(0.5, 0.2), cplx(0.1, 0.0), cplx(0.0, 0.3);
  em << cplx(0.2, -0.1), cplx(0.4, 0.1), cplx(-0.3, 0.0);
  const double ch_err =
      std::abs(weyl_expectation(basis, en, em, coh) - coherent_characteristic(a, en, em, cs.hbar));

  const bool ok = H.rows() <= 2000 && hs->basis.dimension() <= 2000 && prop_err <= 1e-10 &&
                  e_err <= 1e-10 && v_err <= 1e-10 && comm <= 1e-10 && ch_err <= 1e-6;
  return {ok, "dims " + std::to_string(H.rows()) + "/" + std::to_string(hs->basis.dimension()) +
                  ", expv " + fmt("%.1e", prop_err) + ", ground energy " + fmt("%.1e", e_err) +
                  " vector " + fmt("%.1e", v_err) + ", [H,N1] " + fmt("%.1e", comm) +
                  ", characteristic " + fmt("%.1e", ch_err)};
}

Verdict sweep_verdict(const SweepReport& rep, bool need_certificates) {
  std::ostringstream os;
  double seconds = 0.0;
  std::set<double> seen;
  for (const auto& r : rep.rows)
    if (seen.insert(r.hbar).second) seconds += r.seconds;
  int monotone = 0;
  for (const auto& [id, ok] : rep.monotone) monotone += ok ? 1 : 0;
  os << monotone << "/" << rep.monotone.size() << " observables monotone";
  std::map<std::string, std::vector<double>> gaps;
  for (const auto& r : rep.rows) gaps[r.observable_id].push_back(r.gap);
  for (const auto& [id, g] : gaps) {
    os << "; " << id << ":";
    for (double v : g) os << " " << fmt("%.2e", v);
  }
  if (need_certificates) os << "; certificates " << (rep.certificates_hold ? "hold" : "violated");
  return {rep.all_monotone && (!need_certificates || rep.certificates_hold), os.str()};
}

// 9. Weyl and field sweeps.
Verdict semiclassical() {
  const auto t0 = std::chrono::steady_clock::now();
  const SkgSystem sys(build_grids(ModelParams{}));
  SweepConfig c;
  c.hbars = {0.5, 0.25, 0.125};
  c.delta = 0.5;
  c.observable = Observable::Weyl;
  const Verdict w = sweep_verdict(semiclassical_sweep(sys, c), false);
  c.observable = Observable::Field;
  const Verdict f = sweep_verdict(semiclassical_sweep(sys, c), false);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {w.pass && f.pass && secs <= 1800.0,
          "weyl: " + w.detail + " | field: " + f.detail + " | " + fmt("%.0f", secs) + " s"};
}

// 10. Ground-state energy trend and annihilator proxies.
Verdict ground_trend() {
  const SkgSystem sys(build_grids(ModelParams{}));
  SweepConfig c;
  c.observable = Observable::Ground;
  c.delta = 0.5;
  c.hbars = {0.25, 0.125, 0.0625};
  c.sectors = {1, 2, 4};
  return sweep_verdict(semiclassical_sweep(sys, c), true);
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "conservation", conservation},
      {2, "free-field exactness", free_field},
      {3, "dispersive decay", dispersive_decay},
      {4, "wave-operator two-route agreement", two_routes},
      {5, "intertwining", intertwining},
      {6, "hartree suite", hartree_suite},
      {7, "radiationless concentration", radiationless},
      {8, "quantum kernels", quantum_kernels},
      {9, "semiclassical weyl/field convergence", semiclassical},
      {10, "ground-state energy trend", ground_trend},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-38s %s  %s  [%.1f s]\n", c.id, c.name, v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
