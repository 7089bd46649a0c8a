#include "skg/skg.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <fftw3.h>

#include "fftw_mutex.hpp"
#include "skg/fourier.hpp"

namespace skg {

SkgSystem::SkgSystem(Grid grid) : grid_(std::move(grid)) {
  k2_ = grid_.k.array().square();
  form_factor_norm_ = std::sqrt(grid_.dk * grid_.form_factor.squaredNorm());
  kernel_norm_ = std::sqrt(grid_.dk * (grid_.chi.array() / grid_.omega.array()).square().sum());
}

CVec SkgSystem::apply_schrodinger(const CVec& u) const {
  CVec uh = transform(grid_, u, TransformDirection::ToMomentum);
  uh.array() *= k2_.array().cast<cplx>();
  CVec out = transform(grid_, uh, TransformDirection::ToPosition);
  out.array() += grid_.potential.array().cast<cplx>() * u.array();
  return out;
}

double SkgSystem::kinetic_energy(const CVec& u) const {
  const CVec uh = transform(grid_, u, TransformDirection::ToMomentum);
  const double kin = grid_.dk * (k2_.array() * uh.array().abs2()).sum();
  const double pot = grid_.dx * (grid_.potential.array() * u.array().abs2()).sum();
  return kin + pot;
}

CVec SkgSystem::source_term(const CVec& u) const {
  const RVec rho = u.array().abs2();
  CVec f = density_transform(grid_, rho);
  f.array() *= grid_.form_factor.array().cast<cplx>();
  return f;
}

RVec SkgSystem::smeared_field(const CVec& z) const {
  CVec g = z;
  g.array() *= grid_.form_factor.array().cast<cplx>();
  return 2.0 * grid_.dk * grid_.dft->to_position(g, -1).real();
}

RVec SkgSystem::pair_convolution(const RVec& rho) const {
  CVec r = density_transform(grid_, rho).conjugate();
  r.array() *= (grid_.chi.array() / grid_.omega.array()).square().cast<cplx>();
  return grid_.dk * grid_.dft->to_position(r, +1).real();
}

double SkgSystem::boundary_mass_fraction(const CVec& u) const {
  const double total = u.squaredNorm();
  if (total == 0.0) return 0.0;
  double outer = 0.0;
  for (int i = 0; i < grid_.n; ++i)
    if (std::abs(grid_.x[i]) > 0.9 * grid_.L) outer += std::norm(u[i]);
  return outer / total;
}

EnergyParts SkgSystem::energy(const ClassicalState& s) const {
  EnergyParts e;
  e.mass = mass(s.u);
  e.kinetic = kinetic_energy(s.u);
  e.field = grid_.dk * (grid_.omega.array() * s.z.array().abs2()).sum();
  const CVec f = source_term(s.u);
  e.interaction = 2.0 * grid_.dk * s.z.dot(f).real();
  e.free = e.kinetic + e.field;
  e.total = e.free + e.interaction;
  return e;
}

EnergyBoundCheck check_energy_bounds(const SkgSystem& sys, const ClassicalState& s,
                                     const EnergyParts& e) {
  EnergyBoundCheck c;
  const double ff = sys.form_factor_norm();
  const double c1 = ff * ff / sys.grid().params.mass;
  const double m2 = e.mass * e.mass;
  c.interaction_bound = 2.0 * e.mass * ff * sys.grid().norm_k(s.z);
  c.rough_upper = std::max(1.0, c1) * (e.free + m2);
  c.rough_free = 2.0 * (e.total + 2.0 * c1 * m2);
  const double slack = 1e-12 * (1.0 + std::abs(e.free));
  const double diff = std::abs(e.total - e.free);
  c.holds = diff <= c.interaction_bound + slack && diff <= c.rough_upper + slack &&
            e.free <= c.rough_free + slack;
  return c;
}

std::vector<std::string> FlowConfig::violations() const {
  std::vector<std::string> out;
  if (!(dt > 0.0) || !std::isfinite(dt)) out.push_back("flow.dt must be > 0");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) out.push_back("flow.horizon must be >= 0");
  if (stride < 1) out.push_back("flow.stride must be >= 1");
  return out;
}

namespace detail {

class ExtendedFft {
 public:
  using lcplx = std::complex<long double>;
  explicit ExtendedFft(int n) : n_(n), a_(n), b_(n) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    auto* a = reinterpret_cast<fftwl_complex*>(a_.data());
    auto* b = reinterpret_cast<fftwl_complex*>(b_.data());
    forward_ = fftwl_plan_dft_1d(n, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftwl_plan_dft_1d(n, b, a, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!forward_ || !backward_) throw Error("extended FFT planning failed");
  }
  ~ExtendedFft() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftwl_destroy_plan(forward_);
    fftwl_destroy_plan(backward_);
  }
  ExtendedFft(const ExtendedFft&) = delete;
  ExtendedFft& operator=(const ExtendedFft&) = delete;

  /// a <- IFFT(factor * FFT(a))
  void multiply(std::vector<lcplx>& a, const std::vector<lcplx>& factor) const {
    std::vector<lcplx> b(n_);
    fftwl_execute_dft(forward_, reinterpret_cast<fftwl_complex*>(a.data()),
                      reinterpret_cast<fftwl_complex*>(b.data()));
    for (int m = 0; m < n_; ++m) {
      const long double re = b[m].real() * factor[m].real() - b[m].imag() * factor[m].imag();
      const long double im = b[m].real() * factor[m].imag() + b[m].imag() * factor[m].real();
      b[m] = lcplx(re, im);
    }
    fftwl_execute_dft(backward_, reinterpret_cast<fftwl_complex*>(b.data()),
                      reinterpret_cast<fftwl_complex*>(a.data()));
  }

 private:
  int n_;
  std::vector<lcplx> a_, b_;  // planning buffers only
  fftwl_plan forward_ = nullptr;
  fftwl_plan backward_ = nullptr;
};

}  // namespace detail

StrangStepper::StrangStepper(const SkgSystem& sys, double dt)
    : sys_(sys), dt_(dt), fft_(std::make_unique<detail::ExtendedFft>(sys.grid().n)) {
  const Grid& g = sys.grid();
  kinetic_half_.resize(g.n);
  field_half_.resize(g.n);
  source_half_.resize(g.n);
  for (int m = 0; m < g.n; ++m) {
    const long double k = kPi * static_cast<long double>(m < g.n / 2 ? m : m - g.n) / g.L;
    kinetic_half_[m] = std::polar(1.0L, -0.5L * dt * k * k) / static_cast<long double>(g.n);
  }
  for (int j = 0; j < g.n; ++j) {
    field_half_[j] = std::polar(1.0, -0.5 * dt * g.omega[j]);
    source_half_[j] = -(1.0 - field_half_[j]) / g.omega[j];
  }
}

StrangStepper::~StrangStepper() = default;

void StrangStepper::step(ClassicalState& s) const {
  const Grid& g = sys_.grid();
  std::vector<lcplx> a(g.n);
  for (int i = 0; i < g.n; ++i) a[i] = lcplx(s.u[i].real(), s.u[i].imag());
  fft_->multiply(a, kinetic_half_);

  CVec u(g.n);
  for (int i = 0; i < g.n; ++i)
    u[i] = cplx(static_cast<double>(a[i].real()), static_cast<double>(a[i].imag()));
  const CVec f = sys_.source_term(u);
  s.z = field_half_.cwiseProduct(s.z) + source_half_.cwiseProduct(f);
  const RVec phi = sys_.smeared_field(s.z);
  for (int i = 0; i < g.n; ++i) {
    const double theta = -dt_ * (g.potential[i] + phi[i]);
    long double c = std::cos(theta), sn = std::sin(theta);
    const long double r = 1.0L / std::sqrt(c * c + sn * sn);
    c *= r;
    sn *= r;
    a[i] = lcplx(a[i].real() * c - a[i].imag() * sn, a[i].real() * sn + a[i].imag() * c);
  }
  // |u|^2 is unchanged by the phase, so the frozen source is still f
  s.z = field_half_.cwiseProduct(s.z) + source_half_.cwiseProduct(f);

  fft_->multiply(a, kinetic_half_);
  for (int i = 0; i < g.n; ++i)
    s.u[i] = cplx(static_cast<double>(a[i].real()), static_cast<double>(a[i].imag()));
  s.t += dt_;
}

namespace {
FlowSample sample_of(const SkgSystem& sys, const ClassicalState& s) {
  const EnergyParts e = sys.energy(s);
  return {s.t, e.mass, e.total, e.free, sys.boundary_mass_fraction(s.u)};
}
}  // namespace

Trajectory evolve(const SkgSystem& sys, ClassicalState s, const FlowConfig& config,
                  StepObserver* observer) {
  auto bad = config.violations();
  if (s.u.size() != sys.grid().n || s.z.size() != sys.grid().n)
    bad.push_back("state size does not match grid");
  if (!bad.empty()) throw ConfigError(bad);

  Trajectory traj;
  const double wmax = sys.grid().omega.maxCoeff();
  if (config.dt * wmax >= 1.0) {
    std::ostringstream os;
    os << "dt*max(omega) = " << config.dt * wmax << " >= 1";
    traj.warnings.push_back(os.str());
  }
  const double dt = config.backward ? -config.dt : config.dt;
  const StrangStepper stepper(sys, dt);
  const long steps = std::lround(config.horizon / config.dt);

  auto record = [&](long n) {
    FlowSample fs = sample_of(sys, s);
    if (!std::isfinite(fs.mass) || !std::isfinite(fs.energy)) {
      std::ostringstream os;
      os << "non-finite state at step " << n << " (t = " << s.t << "), mass = " << fs.mass
         << ", energy = " << fs.energy;
      throw NumericalError(os.str());
    }
    traj.max_boundary_mass = std::max(traj.max_boundary_mass, fs.boundary_mass);
    traj.samples.push_back(fs);
    if (config.keep_snapshots) traj.snapshots.push_back(s);
  };

  record(0);
  if (observer) observer->on_step(s, sys.source_term(s.u));
  for (long n = 1; n <= steps; ++n) {
    stepper.step(s);
    if (observer) observer->on_step(s, sys.source_term(s.u));
    if (n % config.stride == 0 || n == steps) record(n);
  }
  if (traj.max_boundary_mass > 1e-8) {
    std::ostringstream os;
    os << "boundary mass fraction reached " << traj.max_boundary_mass << " (> 1e-8)";
    traj.warnings.push_back(os.str());
  }
  traj.final_state = std::move(s);
  return traj;
}

StationaryResidual stationary_residual(const SkgSystem& sys, const ClassicalState& s,
                                       std::optional<double> lambda) {
  const Grid& g = sys.grid();
  StationaryResidual r;
  const RVec rho = s.u.array().abs2();
  const RVec w = sys.pair_convolution(rho);
  CVec mu = sys.apply_schrodinger(s.u);
  mu.array() -= 2.0 * w.array().cast<cplx>() * s.u.array();
  const double unorm = g.norm_x(s.u);
  r.lambda = lambda ? *lambda
                    : (unorm > 0.0 ? g.inner_x(s.u, mu).real() / (unorm * unorm) : 0.0);
  r.r_u = unorm > 0.0 ? g.norm_x(mu - r.lambda * s.u) / unorm : 0.0;
  CVec rz = g.omega.cast<cplx>().cwiseProduct(s.z) + sys.source_term(s.u);
  r.r_z = g.norm_k(rz) / std::max(g.norm_k(s.z), 1.0);
  return r;
}

}  // namespace skg
