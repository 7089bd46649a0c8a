#include "skg/harness.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skg/rng.hpp"

#ifndef SKG_VERSION
#define SKG_VERSION "0.0.0"
#endif

namespace skg {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string software_version() { return SKG_VERSION; }

ClassicalState initial_state(const SkgSystem& sys, const InitialSpec& spec, std::uint64_t seed) {
  const Grid& g = sys.grid();
  if (spec.type == "hartree") {
    const HartreeResult r = minimize(sys, spec.norm);
    return {r.u0, r.z0, 0.0};
  }
  double center = spec.center, width = spec.width, momentum = spec.momentum;
  if (spec.type == "random") {
    Rng rng = make_rng(seed, 0x5eed);
    center = -2.0 + 4.0 * uniform_open(rng);
    width = 0.6 + 0.8 * uniform_open(rng);
    momentum = -1.0 + 2.0 * uniform_open(rng);
  } else if (spec.type != "gaussian") {
    throw ConfigError({"initial: type must be gaussian | random | hartree"});
  }
  CVec u(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double s = (g.x[i] - center) / width;
    u[i] = std::polar(std::exp(-0.5 * s * s), momentum * g.x[i]);
  }
  u *= spec.norm / g.norm_x(u);
  return {u, CVec::Zero(g.n), 0.0};
}

// --- tables ---------------------------------------------------------------------

Table trajectory_table(const Trajectory& traj) {
  Table t({"t", "mass", "energy", "energy0", "boundary_mass"});
  for (const auto& s : traj.samples) t.add_row({s.t, s.mass, s.energy, s.energy0, s.boundary_mass});
  return t;
}

Table sweep_table(const std::vector<SweepRow>& rows) {
  Table t({"hslash", "observable_id", "quantum_value_re", "quantum_value_im",
           "classical_target_re", "classical_target_im", "gap", "tail_bound", "dims", "sector",
           "quadrature_error", "certificate"});
  for (const auto& r : rows)
    t.add_row({r.hbar, r.observable_id, r.quantum.real(), r.quantum.imag(), r.classical.real(),
               r.classical.imag(), r.gap, r.tail_bound, static_cast<long long>(r.dims),
               static_cast<long long>(r.sector), r.quadrature_error, r.certificate});
  return t;
}

Table grid_position_table(const Grid& grid) {
  Table t({"index", "x", "V"});
  for (int i = 0; i < grid.n; ++i)
    t.add_row({static_cast<long long>(i), grid.x[i], grid.potential[i]});
  return t;
}

Table grid_momentum_table(const Grid& grid) {
  Table t({"index", "k", "omega", "chi"});
  for (int j = 0; j < grid.n; ++j)
    t.add_row({static_cast<long long>(j), grid.k[j], grid.omega[j], grid.chi[j]});
  return t;
}

Table decay_table(const DecayProfile& p) {
  Table t({"tau", "g", "fit"});
  const bool fitted = std::isfinite(p.fit.exponent) && p.fit.prefactor > 0.0;
  for (std::size_t i = 0; i < p.tau.size(); ++i) {
    const double tau = p.tau[i];
    const double fit = fitted && tau > 0.0 ? p.fit.prefactor * std::pow(tau, -p.fit.exponent)
                                           : std::numeric_limits<double>::quiet_NaN();
    t.add_row({tau, p.g[i], fit});
  }
  return t;
}

// --- JSON reports -----------------------------------------------------------------

namespace {

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson complex_array(const CVec& v) {
  std::vector<double> re(v.size()), im(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  return {{"re", re}, {"im", im}};
}

ojson pairing_json(const WaveOperatorPairing& p) {
  return {{"label", p.label},
          {"direction", to_string(p.direction)},
          {"value_re", p.value.real()},
          {"value_im", p.value.imag()},
          {"T", p.horizon},
          {"tail_bound", finite_or_null(p.tail_bound)},
          {"exponent", finite_or_null(p.decay_exponent)},
          {"cauchy_gap", finite_or_null(p.cauchy_gap)},
          {"quadrature_error", p.quadrature_error},
          {"direct_proxy_re", p.direct_proxy.real()},
          {"direct_proxy_im", p.direct_proxy.imag()},
          {"certified", p.certified},
          {"warning", p.warning}};
}

}  // namespace

std::string scatter_report_json(const RadiationlessVerdict& v) {
  ojson j;
  j["schema"] = "skg-scatter/1";
  ojson probes = ojson::array();
  bool certified = true;
  for (const auto& p : v.pairings) {
    probes.push_back(pairing_json(p));
    certified = certified && p.certified;
  }
  j["pairings"] = probes;
  j["max_pairing"] = v.max_pairing;
  j["threshold"] = v.threshold;
  j["radiationless"] = v.radiationless;
  j["all_certified"] = certified;
  return j.dump(2) + "\n";
}

std::string hartree_report_json(const HartreeResult& r, const Grid& grid,
                                const MultiStartReport* starts) {
  (void)grid;
  ojson j;
  j["schema"] = "skg-hartree/1";
  j["delta"] = r.delta;
  j["E_delta"] = r.energy;
  j["lambda"] = r.lambda;
  j["lambda_from_energy"] = r.lambda_from_energy;
  j["lambda_printed"] = r.lambda_printed;
  j["residual_printed"] = r.residual_printed;
  j["Q"] = r.quartic;
  j["lower_bound"] = r.lower_bound;
  j["residual"] = r.residual;
  j["iterations"] = r.iterations;
  j["method"] = to_string(r.method);
  j["u0"] = complex_array(canonical_phase(r.u0));
  j["z0"] = complex_array(r.z0);
  if (starts) {
    j["multi_start"] = {{"starts", starts->results.size()},
                        {"max_distance", starts->max_distance},
                        {"pairwise", starts->pairwise}};
  }
  return j.dump(2) + "\n";
}

// --- snapshots --------------------------------------------------------------------

namespace {

constexpr char kSnapMagic[8] = {'S', 'K', 'G', 'S', 'N', 'A', 'P', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out += static_cast<char>((v >> (8 * b)) & 0xff);
}
void put_i32(std::string& out, std::int32_t v) {
  const auto u = static_cast<std::uint32_t>(v);
  for (int b = 0; b < 4; ++b) out += static_cast<char>((u >> (8 * b)) & 0xff);
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw Error("snapshot file is truncated");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  pos += 8;
  return v;
}
std::int32_t get_i32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw Error("snapshot file is truncated");
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  pos += 4;
  return static_cast<std::int32_t>(v);
}
double get_f64(const std::string& in, std::size_t& pos) {
  return std::bit_cast<double>(get_u64(in, pos));
}

}  // namespace

std::string encode_snapshot(const Grid& grid, const ClassicalState& s) {
  std::string out(kSnapMagic, sizeof kSnapMagic);
  put_i32(out, grid.params.dimension);
  put_i32(out, grid.n);
  put_f64(out, grid.L);
  put_f64(out, s.t);
  for (const CVec* v : {&s.u, &s.z})
    for (Eigen::Index i = 0; i < v->size(); ++i) {
      put_f64(out, (*v)[i].real());
      put_f64(out, (*v)[i].imag());
    }
  return out;
}

void write_snapshots(const fs::path& path, const Grid& grid,
                     const std::vector<ClassicalState>& states) {
  std::string out;
  for (const auto& s : states) out += encode_snapshot(grid, s);
  write_atomic(path, out);
}

std::vector<Snapshot> read_snapshots(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  std::vector<Snapshot> out;
  std::size_t pos = 0;
  while (pos < data.size()) {
    if (pos + 8 > data.size() || std::memcmp(data.data() + pos, kSnapMagic, 8) != 0)
      throw Error("bad snapshot magic at byte " + std::to_string(pos));
    pos += 8;
    Snapshot s;
    s.dimension = get_i32(data, pos);
    s.n = get_i32(data, pos);
    if (s.n <= 0) throw Error("bad snapshot grid size");
    s.L = get_f64(data, pos);
    s.state.t = get_f64(data, pos);
    for (CVec* v : {&s.state.u, &s.state.z}) {
      v->resize(s.n);
      for (int i = 0; i < s.n; ++i) {
        const double re = get_f64(data, pos);
        (*v)[i] = cplx(re, get_f64(data, pos));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

// --- runner -----------------------------------------------------------------------

namespace {

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point t0) {
  return std::chrono::duration<double>(clock::now() - t0).count();
}

struct Context {
  const RunConfig& config;
  fs::path dir;
  RunManifest& manifest;
  ojson summary = ojson::object();
};

void run_flow(Context& c, const SkgSystem& sys) {
  const Grid& g = sys.grid();
  write_csv(grid_position_table(g), c.dir / "grid_x.csv");
  write_csv(grid_momentum_table(g), c.dir / "grid_k.csv");
  const ClassicalState s = initial_state(sys, c.config.initial, c.config.seed);
  const Trajectory traj = evolve(sys, s, c.config.flow);
  write_csv(trajectory_table(traj), c.dir / "trajectory.csv");
  if (c.config.flow.keep_snapshots) write_snapshots(c.dir / "snapshots.bin", g, traj.snapshots);
  for (const auto& w : traj.warnings) c.manifest.warnings.push_back(w);
  double mass_drift = 0.0, energy_drift = 0.0;
  if (!traj.samples.empty()) {
    const FlowSample& first = traj.samples.front();
    for (const auto& smp : traj.samples) {
      mass_drift = std::max(mass_drift, std::abs(smp.mass - first.mass) / first.mass);
      energy_drift = std::max(energy_drift, std::abs(smp.energy - first.energy) /
                                                std::max(std::abs(first.energy), 1e-300));
    }
  }
  c.summary["samples"] = traj.samples.size();
  c.summary["max_mass_drift"] = mass_drift;
  c.summary["max_energy_drift"] = energy_drift;
  c.summary["max_boundary_mass"] = traj.max_boundary_mass;
}

void run_scatter(Context& c, const SkgSystem& sys) {
  const Grid& g = sys.grid();
  const ScatterSpec& spec = c.config.scatter;
  const TestDictionary dict = make_test_dictionary(g, spec.r_in, spec.r_out, spec.count, {spec.width});
  const ClassicalState s = initial_state(sys, c.config.initial, c.config.seed);
  std::vector<Direction> dirs;
  if (spec.directions != "backward") dirs.push_back(Direction::Forward);
  if (spec.directions != "forward") dirs.push_back(Direction::Backward);

  RadiationlessVerdict v;
  v.threshold = spec.threshold > 0.0 ? spec.threshold : 1e-6 * (sys.mass(s.u) + g.norm_k(s.z));
  for (Direction d : dirs) {
    auto p = pair_wave_operator(sys, s, dict.functions, d, spec.pairing);
    v.pairings.insert(v.pairings.end(), p.begin(), p.end());
  }
  for (const auto& p : v.pairings) {
    v.max_pairing = std::max(v.max_pairing, std::abs(p.value));
    if (!p.warning.empty()) c.manifest.warnings.push_back(p.label + ": " + p.warning);
  }
  v.radiationless = v.max_pairing <= v.threshold;
  write_atomic(c.dir / "scatter.json", scatter_report_json(v));

  if (spec.profiles) {
    std::vector<CVec> probes;
    for (const auto& f : dict.functions) probes.push_back(f.values);
    for (Direction d : dirs) {
      double horizon = 0.0;
      for (const auto& p : v.pairings)
        if (p.direction == d) horizon = std::max(horizon, p.horizon);
      ScatteringRun run(sys, s, d, spec.pairing.dt, probes);
      run.advance_to(horizon);
      for (std::size_t p = 0; p < probes.size(); ++p) {
        const DecayProfile prof = run.profile(p, spec.pairing.fit_fraction * horizon, horizon, spec.nu);
        write_csv(decay_table(prof), c.dir / ("decay_" + dict[p].label + "_" + to_string(d) + ".csv"));
      }
    }
  }
  c.summary["probes"] = dict.size();
  c.summary["max_pairing"] = v.max_pairing;
  c.summary["threshold"] = v.threshold;
  c.summary["radiationless"] = v.radiationless;
}

void run_hartree(Context& c, const SkgSystem& sys) {
  const HartreeSpec& h = c.config.hartree;
  const HartreeResult r = minimize(sys, h.delta, h.options);
  std::optional<MultiStartReport> ms;
  if (h.starts > 1) ms = multi_start(sys, h.delta, h.starts, c.config.seed, h.options);
  write_atomic(c.dir / "hartree.json", hartree_report_json(r, sys.grid(), ms ? &*ms : nullptr));
  c.summary["E_delta"] = r.energy;
  c.summary["lambda"] = r.lambda;
  c.summary["residual"] = r.residual;
  c.summary["iterations"] = r.iterations;
  c.summary["method"] = to_string(r.method);
  if (ms) c.summary["max_start_distance"] = ms->max_distance;
}

void run_sweep(Context& c, const SkgSystem& sys) {
  std::vector<SweepRow> rows;
  try {
    const SweepReport rep =
        semiclassical_sweep(sys, c.config.sweep, [&](const SweepRow& r) { rows.push_back(r); });
    ojson mono = ojson::object();
    for (const auto& [id, ok] : rep.monotone) mono[id] = ok;
    c.summary["all_monotone"] = rep.all_monotone;
    c.summary["certificates_hold"] = rep.certificates_hold;
    c.summary["monotone"] = mono;
    for (const auto& n : rep.notes) c.manifest.warnings.push_back(n);
  } catch (...) {
    write_csv(sweep_table(rows), c.dir / "sweep.csv");
    throw;
  }
  ojson dims = ojson::object();
  for (const auto& r : rows) dims[format_double(r.hbar)] = r.dims;
  c.summary["dims"] = dims;
  write_csv(sweep_table(rows), c.dir / "sweep.csv");
}

}  // namespace

RunManifest run_experiment(const RunConfig& config) {
  RunManifest m;
  m.version = software_version();
  m.config_json = config.resolved_json.empty() ? "{}" : config.resolved_json;
  const fs::path dir = config.output;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  fs::remove(dir / kManifestName, ec);

  Context c{config, dir, m};
  auto t0 = clock::now();
  try {
    const SkgSystem sys(build_grids(config.model));
    m.timings.emplace_back("setup", seconds_since(t0));
    t0 = clock::now();
    switch (config.kind) {
      case ExperimentKind::Flow: run_flow(c, sys); break;
      case ExperimentKind::Scatter: run_scatter(c, sys); break;
      case ExperimentKind::Hartree: run_hartree(c, sys); break;
      case ExperimentKind::QuantumSweep:
      case ExperimentKind::GroundSweep: run_sweep(c, sys); break;
    }
    m.timings.emplace_back("compute", seconds_since(t0));
  } catch (const ConfigError& e) {
    m.failure = e.what();
    m.exit_code = kExitValidation;
  } catch (const NumericalError& e) {
    m.failure = e.what();
    m.exit_code = kExitNumerical;
  }
  m.summary_json = c.summary.dump();
  m.files = inventory(dir);
  write_manifest(dir, m);
  return m;
}

RunReport report_run(const fs::path& dir) {
  RunReport r;
  r.manifest = read_manifest(dir);
  r.check = verify_manifest(dir, r.manifest);
  std::ostringstream os;
  const ojson cfg = ojson::parse(r.manifest.config_json);
  os << "run " << dir.string() << "\n";
  os << "  kind      " << cfg.value("kind", std::string("?")) << "\n";
  os << "  version   " << r.manifest.version << "\n";
  os << "  exit code " << r.manifest.exit_code << "\n";
  if (r.manifest.failure) os << "  failure   " << *r.manifest.failure << "\n";
  for (const auto& [phase, s] : r.manifest.timings) os << "  time " << phase << " " << s << " s\n";
  const ojson summary = ojson::parse(r.manifest.summary_json);
  for (const auto& [k, v] : summary.items()) os << "  " << k << " = " << v.dump() << "\n";
  for (const auto& w : r.manifest.warnings) os << "  warning: " << w << "\n";
  os << "  files     " << r.manifest.files.size() << " listed";
  if (r.check.intact()) {
    os << ", all hashes match\n";
  } else {
    os << "\n";
    for (const auto& f : r.check.missing) os << "  missing:  " << f << "\n";
    for (const auto& f : r.check.changed) os << "  changed:  " << f << "\n";
    for (const auto& f : r.check.unlisted) os << "  unlisted: " << f << "\n";
  }
  r.text = os.str();
  return r;
}

}  // namespace skg
