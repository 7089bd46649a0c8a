#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skg/dictionary.hpp"
#include "skg/fock.hpp"
#include "skg/scatter.hpp"
#include "skg/skg.hpp"

namespace skg {

/// Retained one-particle modes shared by the quantum model and its classical truncation.
///
/// Nucleon modes are the lowest eigenvectors of -Lap+V on the grid, normalized with
/// the dx weight. Meson mode q is the grid node k_q with quadrature weight dk; its
/// amplitude is beta_q = sqrt(dk) z(k_q). The coupling matrices are
/// g_q[p,p'] = sqrt(dk) omega_q^{-1/2} chi_q dx sum_i conj(phi_p) e^{i k_q x_i} phi_p'.
struct ModeSet {
  RVec nucleon_energies;
  Eigen::MatrixXcd nucleon_modes;  // grid.n x d_u
  std::vector<int> meson_nodes;
  RVec meson_k;
  RVec meson_omega;
  double meson_weight = 0.0;
  std::vector<Eigen::MatrixXcd> coupling;

  int nucleon_count() const { return static_cast<int>(nucleon_energies.size()); }
  int meson_count() const { return static_cast<int>(meson_nodes.size()); }
};

/// Meson nodes are the positive-k nodes nearest to each center, distinct, with chi > 0.
ModeSet build_modes(const SkgSystem& sys, int nucleon_modes,
                    const std::vector<double>& meson_centers);

std::vector<double> dictionary_centers(const TestDictionary& dict);

struct ModeAmplitudes {
  CVec nucleon;  // alpha_p = <phi_p, u>
  CVec meson;    // beta_q = sqrt(dk) z(k_q)
};

ModeAmplitudes project_state(const ModeSet& modes, const Grid& grid, const ClassicalState& s);

/// eta_q = sqrt(dk) xi(k_q)
CVec project_probe(const ModeSet& modes, const TestFunction& xi);

/// Classical S-KG flow restricted to the retained modes.
class TruncatedSkg {
 public:
  explicit TruncatedSkg(ModeSet modes);

  const ModeSet& modes() const { return modes_; }
  /// G_q = <alpha, g_q alpha>
  CVec source(const CVec& alpha) const;
  double energy(const ModeAmplitudes& a) const;
  /// diag(e) - sum_q (conj(G_q) g_q + G_q g_q^*) / omega_q: the alpha-equation after
  /// eliminating beta = -G / omega.
  Eigen::MatrixXcd mean_field(const CVec& alpha) const;
  /// One RK4 step of i alpha' = dE/d conj(alpha), i beta' = dE/d conj(beta).
  void step(ModeAmplitudes& a, double dt) const;

 private:
  ModeSet modes_;
};

struct TruncatedPairing {
  cplx cook{};    // <eta, beta0> - i int <eta_tau, G(tau)>, Simpson rule
  cplx direct{};  // <eta, e^{iT omega} beta(T)>
};

/// Finite-horizon pairings <eta, Lambda_T> of the truncated flow, T = horizon.
std::vector<TruncatedPairing> truncated_pairings(const TruncatedSkg& model,
                                                 const ModeAmplitudes& initial,
                                                 const std::vector<CVec>& etas, double horizon,
                                                 Direction direction, double dt = 1e-3);

struct TruncatedMinimum {
  double energy = 0.0;
  ModeAmplitudes state;
  double residual = 0.0;
  double max_distance = 0.0;  // between starts, modulo phase
};

/// min E over |alpha| = delta, beta = -G / omega; damped SCF from several starts.
TruncatedMinimum minimize_truncated(const TruncatedSkg& model, double delta, int starts = 5,
                                    std::uint64_t seed = 3);

/// [e0 delta^2 - delta^4 sum_q |g_q|^2 / omega_q, e0 delta^2], operator norms; brackets
/// both the truncated classical minimum and the sector ground energy at n hbar = delta^2.
std::pair<double, double> energy_bracket(const ModeSet& modes, double delta);

struct YukawaHamiltonian {
  explicit YukawaHamiltonian(FockBasis b) : basis(std::move(b)) {}
  FockBasis basis;
  std::optional<SparseOperator> h;
  std::optional<SparseOperator> h0;
  std::optional<SparseOperator> n1;
  std::optional<SparseOperator> n2;
};

/// H = H0 + H_I with hbar-scaled ladder operators:
/// H0 = sum e_p b*_p b_p + sum omega_q a*_q a_q,
/// H_I = sum_q sum_{p p'} g_q[p,p'] b*_p b_p' a*_q + h.c.
std::shared_ptr<const YukawaHamiltonian> build_hamiltonian(const ModeSet& modes,
                                                           const FockSpec& spec);

/// max |[H, N1] v| / |v| over random v.
double number_commutator(const YukawaHamiltonian& ham, int samples = 50, std::uint64_t seed = 5);

struct QuantumState {
  CVec coeffs;
  bool normalized = true;
  std::optional<int> sector;
  double captured_norm = 1.0;
};

class TruncationError : public NumericalError {
 public:
  TruncationError(double captured, int nucleon_cap, int meson_cap);
  double captured() const { return captured_; }
  int suggested_nucleon_cap() const { return nucleon_cap_; }
  int suggested_meson_cap() const { return meson_cap_; }

 private:
  double captured_;
  int nucleon_cap_;
  int meson_cap_;
};

/// Smallest cap with Poisson(mean) tail below tail and at least ceil(4 mean).
int adequate_cap(double mean, double tail = 1e-10);

/// Truncated, renormalized coherent state with a_hbar,p |.> = amplitude_p.
/// Throws TruncationError when the captured squared norm is below 1 - 1e-8.
QuantumState coherent_state(const FockBasis& basis, const ModeAmplitudes& a);

/// exp(-i t H / hbar) psi by Krylov.
QuantumState propagate(const SparseOperator& h, const QuantumState& psi, double t, double hbar,
                       double tol = 1e-12);

/// hbar-scaled ladder operators; mode index p < d_u is a nucleon mode, d_u + q a meson.
CVec apply_annihilator(const FockBasis& basis, int mode, const CVec& psi);
CVec apply_creator(const FockBasis& basis, int mode, const CVec& psi);

/// phi(eta) = a*(eta) + a(eta) on the whole basis.
SparseOperator field_operator(const FockBasis& basis, const CVec& eta_nucleon,
                              const CVec& eta_meson);

/// <psi, W(eta) psi> with W(eta) = exp(i phi(eta) / sqrt 2) on the truncated space.
cplx weyl_expectation(const FockBasis& basis, const CVec& eta_nucleon, const CVec& eta_meson,
                      const QuantumState& psi);

/// exp(sqrt2 i Re<eta, alpha + beta> - hbar |eta|^2 / 4)
cplx coherent_characteristic(const ModeAmplitudes& a, const CVec& eta_nucleon,
                             const CVec& eta_meson, double hbar);

/// A state split over fixed nucleon-number sectors; squared norms sum to one.
struct Sector {
  int n = 0;
  std::shared_ptr<const YukawaHamiltonian> ham;
  CVec coeffs;
};

struct SectoredState {
  std::vector<Sector> sectors;
  double hbar = 1.0;
  double captured_norm = 1.0;
  long dimension() const;
};

/// Coherent state over sectors 0..spec.nucleon_cap, each with its own Hamiltonian.
SectoredState coherent_sectors(const ModeSet& modes, const FockSpec& spec,
                               const ModeAmplitudes& a);

struct AsymptoticOptions {
  double horizon = 4.0;
  double checkpoint = 0.025;
  Direction direction = Direction::Forward;
  double krylov_tol = 1e-12;
};

struct AsymptoticValue {
  cplx value{};     // initial + integral
  cplx initial{};
  cplx integral{};
  cplx direct{};    // the observable evaluated on the state at the horizon
  double quadrature_error = 0.0;  // |Simpson - trapezoid|
  double tail_bound = 0.0;        // +inf when the integrand does not decay
  double decay_exponent = 0.0;
  bool decaying = false;
  std::vector<double> tau;
  std::vector<double> integrand_abs;
};

/// <W(xi)> + sqrt2 i int <Psi(tau), W(xi_tau) dGamma(Im <xi_tau, lambda>) Psi(tau)> dtau
/// for meson-mode probes, one entry per eta.
std::vector<AsymptoticValue> asymptotic_weyl_expectation(const SectoredState& psi,
                                                         const ModeSet& modes,
                                                         const std::vector<CVec>& etas,
                                                         const AsymptoticOptions& options = {});

/// <phi(xi)> + 2 int <Psi(tau), dGamma(Im <xi_tau, lambda>) Psi(tau)> dtau.
std::vector<AsymptoticValue> asymptotic_field_expectation(const SectoredState& psi,
                                                          const ModeSet& modes,
                                                          const std::vector<CVec>& etas,
                                                          const AsymptoticOptions& options = {});

/// <prod_j phi(xi_j)> with the commutator corrections integrated along the flow;
/// at most three factors.
AsymptoticValue asymptotic_correlation(const SectoredState& psi, const ModeSet& modes,
                                       const std::vector<CVec>& etas,
                                       const AsymptoticOptions& options = {});

struct GroundState {
  double energy = 0.0;
  QuantumState state;
  double residual = 0.0;
  bool degenerate = false;
  double second_energy = 0.0;
  std::optional<QuantumState> second_state;
};

/// Lowest eigenpair of a fixed-sector Hamiltonian, with a deflated second eigenvalue
/// to detect degeneracy within 1e-10.
GroundState ground_state(const YukawaHamiltonian& ham, double tol = 1e-10);

struct AnnihilatorProxy {
  double averaged = 0.0;       // |(1/T) int_0^T a^+_tau(eta) psi dtau|
  double instantaneous = 0.0;  // |a(eta_T) psi|
  double certificate = 0.0;    // sum_q |eta_q| min(1, 2/(T omega_q)) |a_q psi| + 1e-8
  bool below = false;
};

AnnihilatorProxy ground_annihilator_proxy(const YukawaHamiltonian& ham, const GroundState& gs,
                                          const ModeSet& modes, const CVec& eta,
                                          double horizon, double checkpoint = 0.02);

enum class Observable { Weyl, Field, Correlation, Ground };
const char* to_string(Observable o);
Observable observable_from_string(const std::string& s);

struct SweepConfig {
  Observable observable = Observable::Weyl;
  std::vector<double> hbars{0.5, 0.25, 0.125};
  /// Nucleon sector per hbar for the ground observable.
  std::vector<int> sectors{1, 2, 4};
  double delta = 0.5;
  int nucleon_modes = 3;
  int meson_modes = 3;
  double r_in = 0.4;
  double r_out = 1.95;
  /// 0 picks the truncation-adequacy rule.
  int nucleon_cap = 0;
  int meson_cap = 0;
  AsymptoticOptions asymptotic;
  double classical_dt = 1e-3;
  /// Averaging window of the ground-state annihilator proxy.
  double annihilator_horizon = 50.0;

  std::vector<std::string> violations() const;
};

struct SweepRow {
  double hbar = 0.0;
  int sector = -1;  // -1 for sums over sectors
  std::string observable_id;
  cplx quantum{};
  cplx classical{};
  double gap = 0.0;
  double tail_bound = 0.0;
  double quadrature_error = 0.0;
  double certificate = 0.0;
  long dims = 0;
  double seconds = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// observable_id -> gaps strictly decreasing along the hbar list
  std::map<std::string, bool> monotone;
  bool all_monotone = false;
  bool certificates_hold = true;
  std::vector<std::string> notes;
};

/// hbar sweep against classical targets on the same retained modes. The coherent
/// preparation is the Hartree minimizer (u0, z0) at delta projected on the modes.
/// on_row sees every row as soon as it is computed.
SweepReport semiclassical_sweep(const SkgSystem& sys, const SweepConfig& config,
                                const std::function<void(const SweepRow&)>& on_row = {});

}  // namespace skg
