#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skg/krylov.hpp"
#include "skg/skg.hpp"

namespace skg {

/// Pair potential W(x) = int e^{ikx} chi^2/omega^2 dk sampled on the position grid.
struct KernelW {
  RVec samples;  // W(x_i)
  RVec profile;  // chi^2 / omega^2 on the k-grid
};

KernelW build_kernel(const Grid& grid);

/// (W * rho)(x_i) = dx sum_l W(x_i - x_l) rho_l by direct periodic summation.
RVec convolve_direct(const Grid& grid, const KernelW& kernel, const RVec& rho);

struct HartreeEnergy {
  double value = 0.0;    // kinetic - quartic
  double kinetic = 0.0;  // <u, (-Lap+V) u>
  double quartic = 0.0;  // int int |u|^2 W |u|^2
};

HartreeEnergy hartree_energy(const SkgSystem& sys, const CVec& u);

/// z0(u) = -chi omega^{-3/2} rho~, the unique minimizer of the energy in z.
CVec reconstruct_field(const SkgSystem& sys, const CVec& u);

/// 2(-Lap+V)u - c (W*|u|^2) u with c = quartic_coefficient (4 for the true gradient).
CVec hartree_gradient(const SkgSystem& sys, const CVec& u, double quartic_coefficient = 4.0);

/// Mean-field operator -Lap + V - 2 (W*|u|^2).
LinearOp mean_field_operator(const SkgSystem& sys, const CVec& u);

/// e0 delta^2 - delta^4 |chi/omega|^2 with e0 = inf spec(-Lap+V), computed when not given.
double energy_lower_bound(const SkgSystem& sys, double delta,
                          std::optional<double> e0 = std::nullopt);

/// Lowest eigenpair of -Lap + V on the grid.
EigenPair lowest_mode(const SkgSystem& sys);

struct GradientCheckOptions {
  double h = 1e-5;
  int directions = 20;
  std::uint64_t seed = 7;
  double quartic_coefficient = 4.0;
};

/// Max over random directions v of |FD - <grad, v>| / (|grad| |v|).
double gradient_check(const SkgSystem& sys, const CVec& u,
                      const GradientCheckOptions& options = {});

enum class HartreeMethod { Scf, ProjectedGradient };
const char* to_string(HartreeMethod m);

struct MinimizeOptions {
  HartreeMethod method = HartreeMethod::Scf;
  double tol = 1e-10;
  int max_iterations = 400;
  double damping = 0.5;
  /// Used as the initial guess when non-empty; otherwise the lowest eigenmode.
  CVec guess;
};

struct HartreeResult {
  CVec u0;
  CVec z0;
  double delta = 0.0;
  double energy = 0.0;
  double lambda = 0.0;           // Rayleigh quotient of the mean-field operator
  double lambda_from_energy = 0.0;  // (E - Q) / delta^2, same value when stationary
  double lambda_printed = 0.0;   // E / delta^2
  double residual_printed = 0.0;  // EL residual with coefficient 1 and lambda_printed
  double quartic = 0.0;
  double lower_bound = 0.0;
  int iterations = 0;
  double residual = 0.0;
  HartreeMethod method = HartreeMethod::Scf;
  std::vector<double> residual_history;
  std::vector<double> energy_history;
};

class HartreeConvergenceError : public NumericalError {
 public:
  HartreeConvergenceError(const std::string& what, std::vector<double> history)
      : NumericalError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Minimizer of the Hartree functional on the sphere |u| = delta. SCF falls back to
/// projected gradient when it stalls.
HartreeResult minimize(const SkgSystem& sys, double delta, const MinimizeOptions& options = {});

/// Rotate u so its largest-magnitude sample is real positive.
CVec canonical_phase(const CVec& u);

/// min over theta of |a - e^{i theta} b|_2.
double phase_distance(const Grid& grid, const CVec& a, const CVec& b);

struct MultiStartReport {
  std::vector<HartreeResult> results;
  std::vector<double> pairwise;  // upper triangle, row-major
  double max_distance = 0.0;
};

/// Minimize from random initial data; start s uses stream s of seed.
MultiStartReport multi_start(const SkgSystem& sys, double delta, int starts, std::uint64_t seed,
                             const MinimizeOptions& options = {});

struct UniquenessEstimate {
  double delta_star = 0.0;  // largest delta with agreement seen
  double first_disagreement = 0.0;  // 0 when every probe agreed
  std::vector<std::pair<double, double>> probes;  // (delta, max pairwise distance)
};

/// Bisection on delta in [lo, hi] over multi-start agreement at distance agree_tol.
UniquenessEstimate estimate_uniqueness_threshold(const SkgSystem& sys, double lo, double hi,
                                                 int starts, std::uint64_t seed,
                                                 int bisections = 5, double agree_tol = 1e-6);

}  // namespace skg
