#include "skg/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skg/fourier.hpp"

namespace skg {

const char* to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

DispersiveDecayError::DispersiveDecayError(std::string label, DecayProfile profile,
                                           double threshold)
    : NumericalError([&] {
        std::ostringstream os;
        os << "dispersive-decay violation for " << label << ": fitted exponent "
           << profile.fit.exponent << " < " << threshold << " on [" << profile.fit.window_lo
           << ", " << profile.fit.window_hi << "]";
        return os.str();
      }()),
      label_(std::move(label)),
      profile_(std::move(profile)) {}

DecayFit fit_decay(const std::vector<double>& tau, const std::vector<double>& g, double lo,
                   double hi, double nu, double noise_floor) {
  DecayFit fit;
  fit.window_lo = lo;
  fit.window_hi = hi;
  const double gmax = g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
  if (!(gmax > 0.0) || !(hi > lo) || !(lo > 0.0)) {
    fit.envelope_power = 1.0 + nu;
    return fit;
  }
  const double floor = std::max(1e-11 * gmax, noise_floor);
  constexpr int kBins = 16;
  std::vector<double> bmax(kBins, 0.0), btau(kBins, 0.0);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < lo || tau[i] > hi) continue;
    int b = static_cast<int>((std::log(tau[i]) - llo) / (lhi - llo) * kBins);
    b = std::clamp(b, 0, kBins - 1);
    if (g[i] > bmax[b]) {
      bmax[b] = g[i];
      btau[b] = tau[i];
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int b = 0; b < kBins; ++b) {
    if (bmax[b] <= floor) continue;
    const double x = std::log(btau[b]), y = std::log(bmax[b]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  fit.bins_used = n;
  if (n >= 3) {
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.exponent = -slope;
    fit.prefactor = std::exp((sy - slope * sx) / n);
  }
  const double q = std::min(fit.exponent, 1.0 + nu);
  fit.envelope_power = q;
  for (std::size_t i = 0; i < tau.size(); ++i)
    if (tau[i] >= lo && tau[i] <= hi)
      fit.envelope = std::max(fit.envelope, g[i] * std::pow(tau[i], q));
  return fit;
}

double tail_bound(const DecayFit& fit, double horizon) {
  if (fit.envelope == 0.0) return 0.0;
  const double q = fit.envelope_power;
  if (!(q > 1.0)) return std::numeric_limits<double>::infinity();
  return fit.envelope * std::pow(horizon, 1.0 - q) / (q - 1.0);
}

namespace {
/// Smallest R with all but `level` of sum |f_i|^2 inside |x| <= R.
double mass_radius(const Grid& g, const CVec& f, double level) {
  const double total = f.squaredNorm();
  if (!(total > 0.0)) return 0.0;
  std::vector<std::pair<double, double>> by_r;
  by_r.reserve(g.n);
  for (int i = 0; i < g.n; ++i) by_r.emplace_back(std::abs(g.x[i]), std::norm(f[i]));
  std::sort(by_r.begin(), by_r.end(), [](auto& a, auto& b) { return a.first > b.first; });
  double outside = 0.0;
  for (const auto& [r, w] : by_r) {
    outside += w;
    if (outside > level * total) return r;
  }
  return 0.0;
}
}  // namespace

double recurrence_horizon(const SkgSystem& sys, const CVec& u) {
  const Grid& g = sys.grid();
  const double K = g.params.cutoff.radius;
  const double vmax = K / std::sqrt(K * K + g.params.mass * g.params.mass);
  const CVec source_x =
      transform(g, sys.source_term(u), TransformDirection::ToPosition);
  const double radius = mass_radius(g, u, 1e-12) + mass_radius(g, source_x, 1e-8);
  return std::max(0.0, (2.0 * g.L - 2.0 * radius) / vmax);
}

ScatteringRun::ScatteringRun(const SkgSystem& sys, ClassicalState initial, Direction direction,
                             double dt, std::vector<CVec> probes)
    : sys_(sys), direction_(direction), dt_(dt), probes_(std::move(probes)),
      state_(std::move(initial)) {
  const Grid& g = sys.grid();
  if (!(dt > 0.0)) throw ConfigError({"scatter dt must be > 0"});
  if (state_.u.size() != g.n || state_.z.size() != g.n)
    throw ConfigError({"state size does not match grid"});
  for (const auto& p : probes_)
    if (p.size() != g.n) throw ConfigError({"probe size does not match grid"});
  for (int j = 0; j < g.n; ++j)
    for (const auto& p : probes_)
      if (p[j] != cplx(0.0)) {
        support_.push_back(j);
        break;
      }
  for (const auto& p : probes_) initial_pairing_.push_back(g.inner_k(p, state_.z));
  integrand_.assign(probes_.size(), {});
  scale_.assign(probes_.size(), 0.0);
  state_.t = 0.0;
  stepper_ = std::make_unique<StrangStepper>(sys, direction == Direction::Forward ? dt : -dt);
  record(sys.source_term(state_.u));
}

ScatteringRun::~ScatteringRun() = default;

void ScatteringRun::record(const CVec& source) {
  const Grid& g = sys_.grid();
  const double tau = state_.t;
  std::vector<cplx> phased(support_.size());
  for (std::size_t s = 0; s < support_.size(); ++s) {
    const int j = support_[s];
    phased[s] = std::polar(1.0, tau * g.omega[j]) * source[j];
  }
  double source_norm = 0.0;
  for (std::size_t s = 0; s < support_.size(); ++s) source_norm += std::norm(phased[s]);
  source_norm = std::sqrt(source_norm);
  for (std::size_t p = 0; p < probes_.size(); ++p) {
    cplx acc = 0.0;
    double probe_norm = 0.0;
    for (std::size_t s = 0; s < support_.size(); ++s) {
      acc += std::conj(probes_[p][support_[s]]) * phased[s];
      probe_norm += std::norm(probes_[p][support_[s]]);
    }
    integrand_[p].push_back(g.dk * acc);
    scale_[p] = std::max(scale_[p], g.dk * std::sqrt(probe_norm) * source_norm);
  }
}

long ScatteringRun::steps() const {
  return integrand_.empty() ? std::lround(std::abs(state_.t) / dt_)
                            : static_cast<long>(integrand_.front().size()) - 1;
}

double ScatteringRun::horizon() const { return std::abs(state_.t); }

const ClassicalState& ScatteringRun::state() const { return state_; }

void ScatteringRun::advance_to(double horizon) {
  const long target = std::lround(horizon / dt_);
  long n = steps();
  while (n < target) {
    stepper_->step(state_);
    ++n;
    // keep tau an exact multiple of dt
    state_.t = (direction_ == Direction::Forward ? 1.0 : -1.0) * n * dt_;
    record(sys_.source_term(state_.u));
    if (n % 200 == 0 || n == target) {
      const double m = sys_.mass(state_.u);
      if (!std::isfinite(m) || !std::isfinite(state_.z.squaredNorm())) {
        std::ostringstream os;
        os << "non-finite state in scattering run at tau = " << state_.t;
        throw NumericalError(os.str());
      }
      const double b = sys_.boundary_mass_fraction(state_.u);
      if (b > 1e-8 && max_boundary_mass_ <= 1e-8) {
        std::ostringstream os;
        os << "boundary mass fraction " << b << " at tau = " << state_.t;
        warnings_.push_back(os.str());
      }
      max_boundary_mass_ = std::max(max_boundary_mass_, b);
    }
  }
}

long ScatteringRun::step_index(double horizon) const {
  const long n = std::lround(horizon / dt_);
  if (n < 0 || n > steps()) throw Error("scatter: horizon outside the recorded trajectory");
  return n;
}

namespace {
cplx trapezoid(const std::vector<cplx>& f, long n, long stride, double h) {
  if (n == 0) return 0.0;
  cplx acc = 0.5 * (f[0] + f[n]);
  for (long i = stride; i < n; i += stride) acc += f[i];
  return h * static_cast<double>(stride) * acc;
}
}  // namespace

cplx ScatteringRun::cook_value(std::size_t p, double horizon) const {
  const long n = step_index(horizon);
  const double sign = direction_ == Direction::Forward ? 1.0 : -1.0;
  return initial_pairing_[p] - I * sign * trapezoid(integrand_[p], n, 1, dt_);
}

double ScatteringRun::quadrature_error(std::size_t p, double horizon) const {
  long n = step_index(horizon);
  if (n % 2 == 1) --n;
  if (n < 2) return 0.0;
  const cplx fine = trapezoid(integrand_[p], n, 1, dt_);
  const cplx coarse = trapezoid(integrand_[p], n, 2, dt_);
  return std::abs(fine - coarse) / 3.0;
}

cplx ScatteringRun::direct_proxy(std::size_t p) const {
  const Grid& g = sys_.grid();
  cplx acc = 0.0;
  for (int j = 0; j < g.n; ++j)
    if (probes_[p][j] != cplx(0.0))
      acc += std::conj(probes_[p][j]) * std::polar(1.0, state_.t * g.omega[j]) * state_.z[j];
  return g.dk * acc;
}

DecayProfile ScatteringRun::profile(std::size_t p, double lo, double hi, double nu) const {
  DecayProfile out;
  const auto& f = integrand_[p];
  out.tau.resize(f.size());
  out.g.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.tau[i] = static_cast<double>(i) * dt_;
    out.g[i] = std::abs(f[i]);
  }
  out.fit = fit_decay(out.tau, out.g, lo, hi, nu, 1e-13 * scale_[p]);
  return out;
}

std::vector<WaveOperatorPairing> pair_wave_operator(const SkgSystem& sys,
                                                    const ClassicalState& state,
                                                    const std::vector<TestFunction>& probes,
                                                    Direction direction,
                                                    const PairingOptions& options) {
  std::vector<std::string> bad;
  if (!(options.tol > 0.0)) bad.push_back("pairing tol must be > 0");
  if (!(options.initial_horizon > 0.0)) bad.push_back("initial horizon must be > 0");
  if (!(options.fit_fraction > 0.0 && options.fit_fraction < 1.0))
    bad.push_back("fit fraction must lie in (0, 1)");
  if (!bad.empty()) throw ConfigError(bad);

  const double nu = sys.grid().params.nu;
  std::string warning;
  double tmax = options.max_horizon;
  if (!(tmax > 0.0)) {
    tmax = recurrence_horizon(sys, state.u);
    if (tmax < options.initial_horizon) {
      warning = "initial horizon exceeds the box recurrence estimate " + std::to_string(tmax);
      tmax = options.initial_horizon;
    }
  }
  std::vector<CVec> values;
  for (const auto& p : probes) values.push_back(p.values);
  ScatteringRun run(sys, state, direction, options.dt, std::move(values));

  double T = std::min(options.initial_horizon, tmax);
  std::vector<DecayProfile> profiles(probes.size());
  for (;;) {
    run.advance_to(T);
    bool done = true;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      profiles[p] = run.profile(p, options.fit_fraction * T, T, nu);
      if (!(tail_bound(profiles[p].fit, T) < options.tol)) done = false;
    }
    if (done || T >= tmax) break;
    T = std::min(2.0 * T, tmax);
  }

  std::vector<WaveOperatorPairing> out;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const DecayFit& fit = profiles[p].fit;
    const double threshold = 1.0 + 0.5 * nu;
    if (options.check_decay && fit.exponent < threshold)
      throw DispersiveDecayError(probes[p].label, profiles[p], threshold);
    WaveOperatorPairing w;
    w.label = probes[p].label;
    w.direction = direction;
    w.horizon = T;
    w.value = run.cook_value(p, T);
    w.tail_bound = tail_bound(fit, T);
    w.decay_exponent = fit.exponent;
    w.envelope = fit.envelope;
    w.cauchy_gap = std::abs(w.value - run.cook_value(p, 0.5 * T));
    w.quadrature_error = run.quadrature_error(p, T);
    w.direct_proxy = run.direct_proxy(p);
    w.certified = w.tail_bound < options.tol;
    w.warning = warning;
    out.push_back(w);
  }
  return out;
}

WaveOperatorPairing pair_wave_operator(const SkgSystem& sys, const ClassicalState& state,
                                       const TestFunction& xi, Direction direction,
                                       const PairingOptions& options) {
  return pair_wave_operator(sys, state, std::vector<TestFunction>{xi}, direction, options)
      .front();
}

DecayProfile decay_profile(const SkgSystem& sys, const ClassicalState& state,
                           const TestFunction& xi, double horizon, double dt, double lo,
                           double hi, Direction direction) {
  if (!(horizon >= 20.0)) throw ConfigError({"decay_profile needs T >= 20"});
  ScatteringRun run(sys, state, direction, dt, {xi.values});
  run.advance_to(horizon);
  if (!(lo > 0.0)) lo = 0.25 * horizon;
  if (!(hi > 0.0)) hi = horizon;
  return run.profile(0, lo, hi, sys.grid().params.nu);
}

std::vector<IntertwiningResult> intertwining_check(const SkgSystem& sys,
                                                   const ClassicalState& state,
                                                   const std::vector<TestFunction>& probes,
                                                   const std::vector<double>& times,
                                                   Direction direction,
                                                   const PairingOptions& options) {
  std::vector<TestFunction> shifted;
  for (double t : times)
    for (const auto& xi : probes) {
      TestFunction f = xi;
      f.values = free_evolve(sys.grid(), xi.values, t);
      f.label = xi.label + "_shifted";
      shifted.push_back(std::move(f));
    }
  const auto shifted_pairs = pair_wave_operator(sys, state, shifted, direction, options);

  std::vector<IntertwiningResult> out;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    ClassicalState moved = state;
    if (t != 0.0) {
      FlowConfig fc;
      fc.dt = options.dt;
      fc.horizon = std::abs(t);
      fc.backward = t < 0.0;
      fc.stride = std::max(1L, std::lround(std::abs(t) / options.dt));
      moved = evolve(sys, state, fc).final_state;
    }
    moved.t = 0.0;
    const auto evolved = pair_wave_operator(sys, moved, probes, direction, options);
    for (std::size_t p = 0; p < probes.size(); ++p) {
      IntertwiningResult r;
      r.t = t;
      r.evolved = evolved[p];
      r.shifted = shifted_pairs[ti * probes.size() + p];
      r.deviation = std::abs(r.evolved.value - r.shifted.value);
      r.certificate = 2.0 * (r.evolved.tail_bound + r.shifted.tail_bound) + options.tol;
      out.push_back(std::move(r));
    }
  }
  return out;
}

IntertwiningResult intertwining_check(const SkgSystem& sys, const ClassicalState& state,
                                      const TestFunction& xi, double t, Direction direction,
                                      const PairingOptions& options) {
  return intertwining_check(sys, state, std::vector<TestFunction>{xi}, std::vector<double>{t},
                            direction, options)
      .front();
}

RadiationlessVerdict is_radiationless(const SkgSystem& sys, const ClassicalState& state,
                                      const TestDictionary& dictionary, double threshold,
                                      bool both_directions, const PairingOptions& options) {
  RadiationlessVerdict v;
  v.threshold = threshold > 0.0
                    ? threshold
                    : 1e-6 * (sys.mass(state.u) + sys.grid().norm_k(state.z));
  v.pairings = pair_wave_operator(sys, state, dictionary.functions, Direction::Forward, options);
  if (both_directions) {
    auto back = pair_wave_operator(sys, state, dictionary.functions, Direction::Backward, options);
    v.pairings.insert(v.pairings.end(), back.begin(), back.end());
  }
  for (const auto& p : v.pairings) v.max_pairing = std::max(v.max_pairing, std::abs(p.value));
  v.radiationless = v.max_pairing <= v.threshold;
  return v;
}

}  // namespace skg
