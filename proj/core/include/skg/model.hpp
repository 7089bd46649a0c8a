#pragma once

#include <memory>
#include <string>
#include <vector>

#include "skg/types.hpp"

namespace skg {

class Dft;

/// Smooth bump chi(k) = A exp(1/((k/K)^2 - 1)) on |k| < K, scaled so chi(0) = amplitude.
/// amplitude = 0 switches the coupling off.
struct CutoffSpec {
  double radius = 2.0;
  double amplitude = 1.0;
};

struct ModelParams {
  int dimension = 1;
  double box_half_length = 16.0;
  int grid_size = 256;
  double mass = 1.0;
  double c0 = 1.0;
  double nu = 1.0;
  CutoffSpec cutoff;

  /// All violated invariants, empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;
};

double dispersion(double k, double mass);
double confining_potential(double x, double c0, double nu);
double cutoff_profile(double k, const CutoffSpec& cutoff);

/// Position and momentum grids of the periodic box with the model samples.
///
/// x_i = -L + i dx, i in [0, N).  k_j = pi j / L, j in [-N/2, N/2), stored ascending,
/// so index jj corresponds to j = jj - N/2 and k = 0 sits at jj = N/2.
struct Grid {
  ModelParams params;
  int n = 0;
  double L = 0.0;
  double dx = 0.0;
  double dk = 0.0;
  RVec x;
  RVec k;
  RVec omega;
  RVec potential;
  RVec chi;
  RVec form_factor;  // omega^{-1/2} chi
  std::shared_ptr<const Dft> dft;

  int zero_mode() const { return n / 2; }
  /// sqrt(dx sum |u|^2)
  double norm_x(const CVec& u) const;
  double norm_k(const CVec& f) const;
  /// dk sum conj(a) b
  cplx inner_k(const CVec& a, const CVec& b) const;
  cplx inner_x(const CVec& a, const CVec& b) const;
};

Grid build_grids(const ModelParams& params);

/// Write index, x, V and index, k, omega, chi as two CSV files.
void export_grids_csv(const Grid& grid, const std::string& position_path,
                      const std::string& momentum_path);

/// <eta, lambda_x> = int conj(eta(k)) e^{ikx} omega^{-1/2}(k) chi(k) dk on the k-grid.
cplx form_factor_pairing(const Grid& grid, const CVec& eta, double x);

}  // namespace skg
