#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "skg/dictionary.hpp"
#include "skg/skg.hpp"

namespace skg {

enum class Direction { Forward, Backward };

const char* to_string(Direction d);

struct DecayFit {
  /// Least-squares slope of log g against log tau over the window, negated.
  /// +infinity when the profile is zero or below the noise floor.
  double exponent = std::numeric_limits<double>::infinity();
  double prefactor = 0.0;  // least-squares exp(intercept)
  /// max over the window of g(tau) tau^q with q = min(exponent, 1 + nu).
  double envelope = 0.0;
  double envelope_power = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int bins_used = 0;
};

/// g(tau) = |<xi_tau, F(tau)>| sampled at every step, with the fit.
struct DecayProfile {
  std::vector<double> tau;
  std::vector<double> g;
  DecayFit fit;
};

class DispersiveDecayError : public NumericalError {
 public:
  DispersiveDecayError(std::string label, DecayProfile profile, double threshold);
  const DecayProfile& profile() const { return profile_; }
  const std::string& label() const { return label_; }

 private:
  std::string label_;
  DecayProfile profile_;
};

/// Fit over [lo, hi]: block maxima on 16 log-spaced bins; bins under 1e-11 of the
/// record maximum or under noise_floor are dropped.
DecayFit fit_decay(const std::vector<double>& tau, const std::vector<double>& g, double lo,
                   double hi, double nu, double noise_floor = 0.0);

/// Integral of the fitted envelope beyond T: C T^{1-q} / (q - 1).
double tail_bound(const DecayFit& fit, double horizon);

struct PairingOptions {
  double tol = 1e-6;
  double dt = 1e-3;
  double initial_horizon = 20.0;
  /// 0 selects the recurrence horizon of the box.
  double max_horizon = 0.0;
  double fit_fraction = 0.25;
  bool check_decay = true;
};

struct WaveOperatorPairing {
  std::string label;
  Direction direction = Direction::Forward;
  cplx value{};
  double horizon = 0.0;
  double tail_bound = 0.0;
  double decay_exponent = std::numeric_limits<double>::infinity();
  double envelope = 0.0;
  double cauchy_gap = 0.0;
  double quadrature_error = 0.0;
  cplx direct_proxy{};
  bool certified = false;
  std::string warning;
};

/// Time the first meson radiation launched from the nucleon region can wrap around the
/// periodic box: (2L - 2R) / v_max with v_max = K / sqrt(K^2 + m^2) and R the sum of the
/// radius holding all but 1e-12 of |u|^2 and the radius holding all but 1e-8 of the
/// position-space source.
double recurrence_horizon(const SkgSystem& sys, const CVec& u);

/// One flow trajectory with running Cook integrands for a set of probes.
class ScatteringRun {
 public:
  ScatteringRun(const SkgSystem& sys, ClassicalState initial, Direction direction, double dt,
                std::vector<CVec> probes);
  ~ScatteringRun();

  /// Extend the trajectory so that |tau| reaches horizon.
  void advance_to(double horizon);
  double horizon() const;
  double dt() const { return dt_; }
  long steps() const;
  const ClassicalState& state() const;
  std::size_t probe_count() const { return probes_.size(); }

  /// <xi, z0> - i int_0^{+-T} <xi_tau, F(tau)> dtau, trapezoid rule.
  cplx cook_value(std::size_t p, double horizon) const;
  /// Richardson estimate |Trap(h) - Trap(2h)| / 3.
  double quadrature_error(std::size_t p, double horizon) const;
  /// <xi, e^{i tau omega} z(tau)> at the current horizon.
  cplx direct_proxy(std::size_t p) const;
  /// Samples below 1e-13 of the Cauchy-Schwarz bound count as rounding noise in the fit.
  DecayProfile profile(std::size_t p, double lo, double hi, double nu) const;
  const std::vector<std::string>& warnings() const { return warnings_; }
  double max_boundary_mass() const { return max_boundary_mass_; }

 private:
  long step_index(double horizon) const;
  void record(const CVec& source);

  const SkgSystem& sys_;
  Direction direction_;
  double dt_;
  std::vector<CVec> probes_;
  std::vector<int> support_;
  std::vector<cplx> initial_pairing_;
  std::vector<std::vector<cplx>> integrand_;
  std::vector<double> scale_;  // running max of the Cauchy-Schwarz bound |xi| |F|
  ClassicalState state_;
  std::unique_ptr<StrangStepper> stepper_;
  std::vector<std::string> warnings_;
  double max_boundary_mass_ = 0.0;
};

/// Pairings of Lambda^{+-}(state) with every probe from one shared trajectory. The
/// horizon doubles until every tail bound is below tol or the maximum is reached.
std::vector<WaveOperatorPairing> pair_wave_operator(const SkgSystem& sys,
                                                    const ClassicalState& state,
                                                    const std::vector<TestFunction>& probes,
                                                    Direction direction,
                                                    const PairingOptions& options = {});

WaveOperatorPairing pair_wave_operator(const SkgSystem& sys, const ClassicalState& state,
                                       const TestFunction& xi, Direction direction,
                                       const PairingOptions& options = {});

/// Profile over [0, T] with the fit on window [lo, hi] (defaults to [T/4, T]).
DecayProfile decay_profile(const SkgSystem& sys, const ClassicalState& state,
                           const TestFunction& xi, double horizon, double dt = 1e-3,
                           double lo = 0.0, double hi = 0.0,
                           Direction direction = Direction::Forward);

struct IntertwiningResult {
  double t = 0.0;
  double deviation = 0.0;
  double certificate = 0.0;
  WaveOperatorPairing evolved;  // <xi, Lambda(Phi_t(s))>
  WaveOperatorPairing shifted;  // <e^{-it omega} xi, Lambda(s)>
};

/// |<xi, Lambda(Phi_t(s))> - <e^{-it omega} xi, Lambda(s)>| with certificate
/// 2 (sum of tails) + tol.
IntertwiningResult intertwining_check(const SkgSystem& sys, const ClassicalState& state,
                                      const TestFunction& xi, double t, Direction direction,
                                      const PairingOptions& options = {});

/// Every (t, xi) combination; the shifted probes share one trajectory of the state.
/// Results are ordered by t, then by probe.
std::vector<IntertwiningResult> intertwining_check(const SkgSystem& sys,
                                                   const ClassicalState& state,
                                                   const std::vector<TestFunction>& probes,
                                                   const std::vector<double>& times,
                                                   Direction direction,
                                                   const PairingOptions& options = {});

struct RadiationlessVerdict {
  double max_pairing = 0.0;
  std::vector<WaveOperatorPairing> pairings;
  double threshold = 0.0;
  bool radiationless = false;
};

/// threshold <= 0 selects 1e-6 (|u|^2 + |z|).
RadiationlessVerdict is_radiationless(const SkgSystem& sys, const ClassicalState& state,
                                      const TestDictionary& dictionary, double threshold,
                                      bool both_directions = true,
                                      const PairingOptions& options = {});

}  // namespace skg
