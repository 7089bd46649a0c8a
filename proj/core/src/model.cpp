#include "skg/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "skg/fourier.hpp"

namespace skg {

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error([&] {
        std::ostringstream os;
        os << "invalid configuration:";
        for (const auto& v : violations) os << "\n  - " << v;
        return os.str();
      }()),
      violations_(std::move(violations)) {}

std::vector<std::string> ModelParams::violations() const {
  std::vector<std::string> out;
  if (dimension != 1) out.push_back("dimension must be 1 (only d = 1 executes)");
  if (!(box_half_length > 0.0) || !std::isfinite(box_half_length))
    out.push_back("box_half_length must be positive");
  if (grid_size < 8 || (grid_size & (grid_size - 1)) != 0)
    out.push_back("grid_size must be a power of two >= 8, got " + std::to_string(grid_size));
  if (!(mass > 0.0)) out.push_back("mass must be > 0");
  if (!(c0 > 0.0)) out.push_back("potential.c0 must be > 0");
  if (!(nu > 0.0)) out.push_back("potential.nu must be > 0");
  if (!(cutoff.radius > 0.0)) out.push_back("cutoff.radius must be > 0");
  if (!(cutoff.amplitude >= 0.0) || !std::isfinite(cutoff.amplitude))
    out.push_back("cutoff.amplitude must be finite and >= 0");
  if (box_half_length > 0.0 && grid_size > 0 &&
      !(cutoff.radius < kPi * grid_size / (2.0 * box_half_length)))
    out.push_back("cutoff exceeds Nyquist: radius must be < pi N / (2 L) = " +
                  std::to_string(kPi * grid_size / (2.0 * box_half_length)));
  return out;
}

void ModelParams::validate() const {
  auto v = violations();
  if (!v.empty()) throw ConfigError(std::move(v));
}

double dispersion(double k, double mass) { return std::sqrt(k * k + mass * mass); }

double confining_potential(double x, double c0, double nu) {
  return c0 * std::pow(1.0 + x * x, 0.5 * (1.0 + nu));
}

double cutoff_profile(double k, const CutoffSpec& cutoff) {
  const double s = k / cutoff.radius;
  const double s2 = s * s;
  if (s2 >= 1.0 || cutoff.amplitude == 0.0) return 0.0;
  return cutoff.amplitude * std::exp(1.0 + 1.0 / (s2 - 1.0));
}

double Grid::norm_x(const CVec& u) const { return std::sqrt(dx * u.squaredNorm()); }
double Grid::norm_k(const CVec& f) const { return std::sqrt(dk * f.squaredNorm()); }
cplx Grid::inner_k(const CVec& a, const CVec& b) const { return dk * a.dot(b); }
cplx Grid::inner_x(const CVec& a, const CVec& b) const { return dx * a.dot(b); }

Grid build_grids(const ModelParams& params) {
  params.validate();
  Grid g;
  g.params = params;
  g.n = params.grid_size;
  g.L = params.box_half_length;
  g.dx = 2.0 * g.L / g.n;
  g.dk = kPi / g.L;
  g.x.resize(g.n);
  g.k.resize(g.n);
  g.omega.resize(g.n);
  g.potential.resize(g.n);
  g.chi.resize(g.n);
  g.form_factor.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    g.x[i] = -g.L + i * g.dx;
    g.potential[i] = confining_potential(g.x[i], params.c0, params.nu);
  }
  for (int jj = 0; jj < g.n; ++jj) {
    const int j = jj - g.n / 2;
    g.k[jj] = j * g.dk;
    g.omega[jj] = dispersion(g.k[jj], params.mass);
    // evaluate at |k| so chi is exactly even on the grid
    g.chi[jj] = cutoff_profile(std::abs(g.k[jj]), params.cutoff);
    g.form_factor[jj] = g.chi[jj] / std::sqrt(g.omega[jj]);
  }
  g.dft = std::make_shared<const Dft>(g.n);
  return g;
}

void export_grids_csv(const Grid& grid, const std::string& position_path,
                      const std::string& momentum_path) {
  std::ofstream px(position_path);
  std::ofstream pk(momentum_path);
  if (!px || !pk) throw Error("cannot write grid CSV files");
  px.precision(17);
  pk.precision(17);
  px << "index,x,V\n";
  for (int i = 0; i < grid.n; ++i) px << i << ',' << grid.x[i] << ',' << grid.potential[i] << '\n';
  pk << "index,k,omega,chi\n";
  for (int j = 0; j < grid.n; ++j)
    pk << j << ',' << grid.k[j] << ',' << grid.omega[j] << ',' << grid.chi[j] << '\n';
}

cplx form_factor_pairing(const Grid& grid, const CVec& eta, double x) {
  if (eta.size() != grid.n) throw Error("form_factor_pairing: size mismatch");
  cplx acc = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    if (grid.form_factor[j] == 0.0) continue;
    acc += std::conj(eta[j]) * std::polar(grid.form_factor[j], grid.k[j] * x);
  }
  return grid.dk * acc;
}

}  // namespace skg
