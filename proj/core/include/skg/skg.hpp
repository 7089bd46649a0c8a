#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skg/model.hpp"

namespace skg {

/// Nucleon field u on the position grid, meson field z on the momentum grid.
struct ClassicalState {
  CVec u;
  CVec z;
  double t = 0.0;
};

struct EnergyParts {
  double total = 0.0;
  double free = 0.0;         // <u,(-Lap+V)u> + <z,omega z>
  double interaction = 0.0;  // 2 Re int conj(z) F dk
  double mass = 0.0;         // |u|^2
  double kinetic = 0.0;      // <u,(-Lap+V)u>
  double field = 0.0;        // <z,omega z>
};

/// Spectral operators of the coupled system on one grid.
///
/// Coupling convention: rho~(k) = int e^{ikx} |u|^2 dx, source F = omega^{-1/2} chi rho~,
/// interaction 2 Re int conj(z) F dk, smeared field
/// phi(x) = 2 Re int e^{-ikx} omega^{-1/2} chi z dk. With these the discrete
/// equations i u_t = (-Lap+V+phi)u, i z_t = omega z + F are exactly the Hamiltonian
/// equations of the discrete energy.
class SkgSystem {
 public:
  explicit SkgSystem(Grid grid);

  const Grid& grid() const { return grid_; }

  EnergyParts energy(const ClassicalState& s) const;
  CVec source_term(const CVec& u) const;
  RVec smeared_field(const CVec& z) const;
  /// (-Lap + V) u
  CVec apply_schrodinger(const CVec& u) const;
  double kinetic_energy(const CVec& u) const;
  /// (W * rho)(x) with W(x) = int e^{ikx} chi^2/omega^2 dk
  RVec pair_convolution(const RVec& rho) const;
  /// Fraction of |u|^2 with |x| > 0.9 L.
  double boundary_mass_fraction(const CVec& u) const;
  double mass(const CVec& u) const { return grid_.dx * u.squaredNorm(); }

  /// |omega^{-1/2} chi|_2
  double form_factor_norm() const { return form_factor_norm_; }
  /// |chi/omega|_2
  double kernel_norm() const { return kernel_norm_; }

 private:
  Grid grid_;
  RVec k2_;
  double form_factor_norm_ = 0.0;
  double kernel_norm_ = 0.0;
};

/// Comparison constants between the interacting and the free energy.
struct EnergyBoundCheck {
  double interaction_bound = 0.0;  // 2 |u|^2 |omega^{-1/2} chi| |z|
  double rough_upper = 0.0;        // max(1,c1)(E0 + |u|^4), c1 = |omega^{-1/2} chi|^2 / m
  double rough_free = 0.0;         // 2(E + 2 c1 |u|^4), bounds E0
  bool holds = false;
};
EnergyBoundCheck check_energy_bounds(const SkgSystem& sys, const ClassicalState& s,
                                     const EnergyParts& e);

struct FlowConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  int stride = 100;
  bool backward = false;
  bool keep_snapshots = false;

  std::vector<std::string> violations() const;
};

struct FlowSample {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double energy0 = 0.0;
  double boundary_mass = 0.0;
};

/// Receives the state after every step (and at t = 0) with the source at that time.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_step(const ClassicalState& s, const CVec& source) = 0;
};

struct Trajectory {
  std::vector<FlowSample> samples;
  std::vector<ClassicalState> snapshots;
  std::vector<std::string> warnings;
  ClassicalState final_state;
  double max_boundary_mass = 0.0;
};

namespace detail {
class ExtendedFft;
}

/// Strang step: half kinetic, half z (frozen source), full potential-plus-coupling
/// phase on u, half z, half kinetic. Negative dt runs time backwards.
///
/// The u substeps run in long double; u is rounded back to double once per step.
class StrangStepper {
 public:
  StrangStepper(const SkgSystem& sys, double dt);
  ~StrangStepper();
  void step(ClassicalState& s) const;
  double dt() const { return dt_; }

 private:
  using lcplx = std::complex<long double>;
  const SkgSystem& sys_;
  double dt_;
  std::unique_ptr<detail::ExtendedFft> fft_;
  std::vector<lcplx> kinetic_half_;  // natural FFT order, includes 1/N
  CVec field_half_;
  CVec source_half_;  // -(1 - e^{-i dt/2 omega}) / omega
};

Trajectory evolve(const SkgSystem& sys, ClassicalState s, const FlowConfig& config,
                  StepObserver* observer = nullptr);

struct StationaryResidual {
  double r_u = 0.0;
  double r_z = 0.0;
  double lambda = 0.0;
};

/// r_u = |(-Lap+V)u - 2(W*|u|^2)u - lambda u| / |u|, r_z = |omega z + F| / max(|z|, 1).
/// lambda defaults to the Rayleigh quotient of the mean-field operator.
StationaryResidual stationary_residual(const SkgSystem& sys, const ClassicalState& s,
                                       std::optional<double> lambda = std::nullopt);

}  // namespace skg
