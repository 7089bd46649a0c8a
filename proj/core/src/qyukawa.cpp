#include "skg/qyukawa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "skg/hartree.hpp"
#include "skg/rng.hpp"

namespace skg {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr double kSqrt2 = 1.4142135623730951;

/// <to| b*_p b_p' |from> for every nonzero entry of the one-body operators.
struct Hop {
  int to;
  int from;
  int p;
  int pp;
  double c;
};

std::vector<Hop> one_body_hops(const OccupationBasis& basis) {
  std::vector<Hop> hops;
  const int d = basis.modes();
  for (int i = 0; i < basis.size(); ++i) {
    const Occupation& occ = basis[i];
    for (int pp = 0; pp < d; ++pp) {
      if (occ[pp] == 0) continue;
      for (int p = 0; p < d; ++p) {
        Occupation next = occ;
        double c = std::sqrt(static_cast<double>(next[pp]));
        --next[pp];
        c *= std::sqrt(static_cast<double>(next[p] + 1));
        ++next[p];
        const int to = basis.index_of(next);
        if (to >= 0) hops.push_back({to, i, p, pp, c});
      }
    }
  }
  return hops;
}

/// Dense annihilator (unscaled) of mode q on an occupation basis.
Eigen::MatrixXcd dense_annihilator(const OccupationBasis& basis, int q) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(basis.size(), basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    const Occupation& occ = basis[j];
    if (occ[q] == 0) continue;
    Occupation lower = occ;
    --lower[q];
    const int to = basis.index_of(lower);
    if (to >= 0) a(to, j) = std::sqrt(static_cast<double>(occ[q]));
  }
  return a;
}

cplx coherent_factor(cplx a, int n) {
  if (n == 0) return std::exp(-0.5 * std::norm(a));
  return std::exp(-0.5 * std::norm(a) + static_cast<double>(n) * std::log(a) - 0.5 * std::lgamma(n + 1.0));
}

cplx coherent_product(const Occupation& occ, const CVec& amp, double hbar) {
  cplx c = 1.0;
  const double s = 1.0 / std::sqrt(hbar);
  for (int i = 0; i < static_cast<int>(occ.size()); ++i) {
    const cplx a = s * amp[i];
    if (a == cplx(0.0)) {
      if (occ[i] != 0) return 0.0;
      continue;
    }
    c *= coherent_factor(a, occ[i]);
  }
  return c;
}

std::vector<double> simpson_weights(int k) {
  // k intervals, k even
  std::vector<double> w(k + 1, 0.0);
  for (int i = 0; i <= k; ++i) w[i] = (i == 0 || i == k) ? 1.0 / 3.0 : (i % 2 ? 4.0 / 3.0 : 2.0 / 3.0);
  return w;
}

int even_steps(double horizon, double h) {
  int k = static_cast<int>(std::lround(horizon / h));
  if (k < 2) k = 2;
  if (k % 2) ++k;
  return k;
}

/// Simpson and trapezoid of f over k intervals of width h.
std::pair<cplx, cplx> quadrature(const std::vector<cplx>& f, double h) {
  const int k = static_cast<int>(f.size()) - 1;
  const auto w = simpson_weights(k);
  cplx simpson = 0.0, trap = 0.0;
  for (int i = 0; i <= k; ++i) {
    simpson += w[i] * f[i];
    trap += (i == 0 || i == k ? 0.5 : 1.0) * f[i];
  }
  return {h * simpson, h * trap};
}

}  // namespace

// --- modes ------------------------------------------------------------------

ModeSet build_modes(const SkgSystem& sys, int nucleon_modes,
                    const std::vector<double>& meson_centers) {
  const Grid& g = sys.grid();
  if (nucleon_modes < 1 || nucleon_modes > g.n)
    throw ConfigError({"nucleon mode count must lie in [1, grid size]"});
  Eigen::MatrixXcd h(g.n, g.n);
  for (int c = 0; c < g.n; ++c) {
    CVec e = CVec::Zero(g.n);
    e[c] = 1.0;
    h.col(c) = sys.apply_schrodinger(e);
  }
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  ModeSet m;
  m.nucleon_energies = es.eigenvalues().head(nucleon_modes);
  m.nucleon_modes.resize(g.n, nucleon_modes);
  for (int p = 0; p < nucleon_modes; ++p)
    m.nucleon_modes.col(p) = canonical_phase(es.eigenvectors().col(p) / std::sqrt(g.dx));

  for (double c : meson_centers) {
    int best = -1;
    for (int j = 0; j < g.n; ++j) {
      if (g.k[j] <= 0.0 || g.chi[j] <= 0.0) continue;
      if (std::find(m.meson_nodes.begin(), m.meson_nodes.end(), j) != m.meson_nodes.end())
        continue;
      if (best < 0 || std::abs(g.k[j] - c) < std::abs(g.k[best] - c)) best = j;
    }
    if (best < 0) throw ConfigError({"no free meson node inside the cutoff support"});
    m.meson_nodes.push_back(best);
  }
  const int nm = m.meson_count();
  m.meson_k.resize(nm);
  m.meson_omega.resize(nm);
  m.meson_weight = g.dk;
  for (int q = 0; q < nm; ++q) {
    const int j = m.meson_nodes[q];
    m.meson_k[q] = g.k[j];
    m.meson_omega[q] = g.omega[j];
    CVec phase(g.n);
    for (int i = 0; i < g.n; ++i) phase[i] = std::polar(1.0, g.k[j] * g.x[i]);
    const Eigen::MatrixXcd weighted = phase.asDiagonal() * m.nucleon_modes;
    m.coupling.push_back(std::sqrt(g.dk) * g.form_factor[j] * g.dx *
                         (m.nucleon_modes.adjoint() * weighted));
  }
  return m;
}

std::vector<double> dictionary_centers(const TestDictionary& dict) {
  std::vector<double> c;
  for (const auto& f : dict.functions) c.push_back(f.center);
  return c;
}

ModeAmplitudes project_state(const ModeSet& modes, const Grid& grid, const ClassicalState& s) {
  ModeAmplitudes a;
  a.nucleon = grid.dx * (modes.nucleon_modes.adjoint() * s.u);
  a.meson.resize(modes.meson_count());
  for (int q = 0; q < modes.meson_count(); ++q)
    a.meson[q] = std::sqrt(modes.meson_weight) * s.z[modes.meson_nodes[q]];
  return a;
}

CVec project_probe(const ModeSet& modes, const TestFunction& xi) {
  CVec eta(modes.meson_count());
  for (int q = 0; q < modes.meson_count(); ++q)
    eta[q] = std::sqrt(modes.meson_weight) * xi.values[modes.meson_nodes[q]];
  return eta;
}

// --- classical truncation ---------------------------------------------------

TruncatedSkg::TruncatedSkg(ModeSet modes) : modes_(std::move(modes)) {}

CVec TruncatedSkg::source(const CVec& alpha) const {
  CVec g(modes_.meson_count());
  for (int q = 0; q < modes_.meson_count(); ++q) g[q] = alpha.dot(modes_.coupling[q] * alpha);
  return g;
}

double TruncatedSkg::energy(const ModeAmplitudes& a) const {
  const CVec g = source(a.nucleon);
  double e = (modes_.nucleon_energies.array() * a.nucleon.array().abs2()).sum() +
             (modes_.meson_omega.array() * a.meson.array().abs2()).sum();
  e += 2.0 * a.meson.dot(g).real();
  return e;
}

Eigen::MatrixXcd TruncatedSkg::mean_field(const CVec& alpha) const {
  const CVec g = source(alpha);
  Eigen::MatrixXcd m = modes_.nucleon_energies.cast<cplx>().asDiagonal();
  for (int q = 0; q < modes_.meson_count(); ++q)
    m -= (std::conj(g[q]) * modes_.coupling[q] + g[q] * modes_.coupling[q].adjoint()) /
         modes_.meson_omega[q];
  return m;
}

void TruncatedSkg::step(ModeAmplitudes& a, double dt) const {
  auto rhs = [this](const ModeAmplitudes& s) {
    ModeAmplitudes d;
    const CVec g = source(s.nucleon);
    CVec da = modes_.nucleon_energies.cast<cplx>().cwiseProduct(s.nucleon);
    for (int q = 0; q < modes_.meson_count(); ++q)
      da += std::conj(s.meson[q]) * (modes_.coupling[q] * s.nucleon) +
            s.meson[q] * (modes_.coupling[q].adjoint() * s.nucleon);
    d.nucleon = -I * da;
    d.meson = -I * (modes_.meson_omega.cast<cplx>().cwiseProduct(s.meson) + g);
    return d;
  };
  auto axpy = [](const ModeAmplitudes& s, double h, const ModeAmplitudes& d) {
    return ModeAmplitudes{s.nucleon + h * d.nucleon, s.meson + h * d.meson};
  };
  const ModeAmplitudes k1 = rhs(a);
  const ModeAmplitudes k2 = rhs(axpy(a, 0.5 * dt, k1));
  const ModeAmplitudes k3 = rhs(axpy(a, 0.5 * dt, k2));
  const ModeAmplitudes k4 = rhs(axpy(a, dt, k3));
  a.nucleon += dt / 6.0 * (k1.nucleon + 2.0 * k2.nucleon + 2.0 * k3.nucleon + k4.nucleon);
  a.meson += dt / 6.0 * (k1.meson + 2.0 * k2.meson + 2.0 * k3.meson + k4.meson);
}

std::vector<TruncatedPairing> truncated_pairings(const TruncatedSkg& model,
                                                 const ModeAmplitudes& initial,
                                                 const std::vector<CVec>& etas, double horizon,
                                                 Direction direction, double dt) {
  const ModeSet& m = model.modes();
  const double sgn = direction == Direction::Forward ? 1.0 : -1.0;
  const int k = even_steps(horizon, dt);
  const double h = horizon / k;
  std::vector<std::vector<cplx>> integrand(etas.size(), std::vector<cplx>(k + 1));
  ModeAmplitudes s = initial;
  for (int n = 0;; ++n) {
    const double tau = sgn * n * h;
    const CVec g = model.source(s.nucleon);
    for (std::size_t e = 0; e < etas.size(); ++e) {
      cplx acc = 0.0;
      for (int q = 0; q < m.meson_count(); ++q)
        acc += std::conj(etas[e][q]) * std::polar(1.0, tau * m.meson_omega[q]) * g[q];
      integrand[e][n] = acc;
    }
    if (n == k) break;
    model.step(s, sgn * h);
  }
  std::vector<TruncatedPairing> out;
  for (std::size_t e = 0; e < etas.size(); ++e) {
    TruncatedPairing p;
    p.cook = etas[e].dot(initial.meson) - I * sgn * quadrature(integrand[e], h).first;
    for (int q = 0; q < m.meson_count(); ++q)
      p.direct += std::conj(etas[e][q]) * std::polar(1.0, sgn * horizon * m.meson_omega[q]) *
                  s.meson[q];
    out.push_back(p);
  }
  return out;
}

TruncatedMinimum minimize_truncated(const TruncatedSkg& model, double delta, int starts,
                                    std::uint64_t seed) {
  const ModeSet& m = model.modes();
  const int d = m.nucleon_count();
  if (!(delta > 0.0)) throw ConfigError({"delta must be > 0"});
  auto reduced = [&](const CVec& alpha) {
    const CVec g = model.source(alpha);
    return (m.nucleon_energies.array() * alpha.array().abs2()).sum() -
           (g.array().abs2() / m.meson_omega.array()).sum();
  };
  auto residual = [&](const CVec& alpha) {
    const CVec ma = model.mean_field(alpha) * alpha;
    const double lambda = alpha.dot(ma).real() / (delta * delta);
    return (ma - lambda * alpha).norm() / delta;
  };
  std::vector<CVec> found;
  TruncatedMinimum best;
  best.energy = std::numeric_limits<double>::infinity();
  for (int s = 0; s < std::max(starts, 1); ++s) {
    CVec alpha = CVec::Zero(d);
    if (s == 0) {
      alpha[0] = 1.0;
    } else {
      Rng rng = make_rng(seed, static_cast<std::uint64_t>(s));
      alpha = random_complex(rng, d);
    }
    alpha *= delta / alpha.norm();
    double e = reduced(alpha);
    double theta = 0.5;
    for (int it = 0; it < 2000 && residual(alpha) > 1e-13; ++it) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(model.mean_field(alpha));
      CVec v = es.eigenvectors().col(0);
      const cplx ov = v.dot(alpha);
      if (std::abs(ov) > 0.0) v *= ov / std::abs(ov);
      v *= delta / v.norm();
      CVec trial = (1.0 - theta) * alpha + theta * v;
      trial *= delta / trial.norm();
      const double et = reduced(trial);
      if (et <= e + 1e-15 * std::max(1.0, std::abs(e))) {
        alpha = trial;
        e = et;
        theta = std::min(0.5, 2.0 * theta);
      } else {
        theta *= 0.5;
        if (theta < 1e-8) break;
      }
    }
    found.push_back(alpha);
    if (e < best.energy) {
      best.energy = e;
      best.state.nucleon = alpha;
      best.residual = residual(alpha);
    }
  }
  const CVec g = model.source(best.state.nucleon);
  best.state.meson = -(g.array() / m.meson_omega.array().cast<cplx>()).matrix();
  for (std::size_t a = 0; a < found.size(); ++a)
    for (std::size_t b = a + 1; b < found.size(); ++b) {
      const double d2 = found[a].squaredNorm() + found[b].squaredNorm() -
                        2.0 * std::abs(found[a].dot(found[b]));
      best.max_distance = std::max(best.max_distance, std::sqrt(std::max(d2, 0.0)));
    }
  return best;
}

std::pair<double, double> energy_bracket(const ModeSet& modes, double delta) {
  const double e0 = modes.nucleon_energies[0];
  double s = 0.0;
  for (int q = 0; q < modes.meson_count(); ++q) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(modes.coupling[q]);
    const double nrm = svd.singularValues()[0];
    s += nrm * nrm / modes.meson_omega[q];
  }
  const double d2 = delta * delta;
  return {e0 * d2 - d2 * d2 * s, e0 * d2};
}

// --- Hamiltonian --------------------------------------------------------------

std::shared_ptr<const YukawaHamiltonian> build_hamiltonian(const ModeSet& modes,
                                                           const FockSpec& spec_in) {
  FockSpec spec = spec_in;
  if (spec.nucleon_modes != modes.nucleon_count() || spec.meson_modes != modes.meson_count())
    throw ConfigError({"Fock spec mode counts do not match the retained modes"});
  auto ham = std::make_shared<YukawaHamiltonian>(FockBasis(spec));
  const FockBasis& b = ham->basis;
  const OccupationBasis& nb = b.nucleons();
  const OccupationBasis& mb = b.mesons();
  const double hbar = spec.hbar;
  const double coupling_scale = std::pow(hbar, 1.5);
  const int dim = b.dimension();

  using T = Eigen::Triplet<cplx>;
  std::vector<T> th, t0, tn1, tn2;
  for (int i = 0; i < nb.size(); ++i) {
    double en = 0.0;
    int count = 0;
    for (int p = 0; p < nb.modes(); ++p) {
      en += modes.nucleon_energies[p] * nb[i][p];
      count += nb[i][p];
    }
    for (int j = 0; j < mb.size(); ++j) {
      double em = 0.0;
      int mcount = 0;
      for (int q = 0; q < mb.modes(); ++q) {
        em += modes.meson_omega[q] * mb[j][q];
        mcount += mb[j][q];
      }
      const int idx = b.index(i, j);
      t0.emplace_back(idx, idx, hbar * (en + em));
      tn1.emplace_back(idx, idx, hbar * count);
      tn2.emplace_back(idx, idx, hbar * mcount);
    }
  }
  th = t0;

  // meson raising moves: (from, to, q, sqrt(m_q + 1))
  struct Raise {
    int from;
    int to;
    int q;
    double c;
  };
  std::vector<Raise> raises;
  for (int j = 0; j < mb.size(); ++j)
    for (int q = 0; q < mb.modes(); ++q) {
      Occupation up = mb[j];
      ++up[q];
      const int to = mb.index_of(up);
      if (to >= 0) raises.push_back({j, to, q, std::sqrt(static_cast<double>(mb[j][q] + 1))});
    }
  const auto hops = one_body_hops(nb);
  for (const Hop& hp : hops)
    for (const Raise& r : raises) {
      const cplx g = modes.coupling[r.q](hp.p, hp.pp);
      if (g == cplx(0.0)) continue;
      const cplx v = coupling_scale * g * hp.c * r.c;
      const int row = b.index(hp.to, r.to);
      const int col = b.index(hp.from, r.from);
      th.emplace_back(row, col, v);
      th.emplace_back(col, row, std::conj(v));
    }

  auto make = [dim](const std::vector<T>& t) {
    SparseOperator::Matrix m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    return SparseOperator(std::move(m));
  };
  ham->h.emplace(make(th));
  ham->h0.emplace(make(t0));
  ham->n1.emplace(make(tn1));
  ham->n2.emplace(make(tn2));
  return ham;
}

double number_commutator(const YukawaHamiltonian& ham, int samples, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const CVec v = random_complex(rng, ham.basis.dimension());
    const CVec c = ham.h->apply(ham.n1->apply(v)) - ham.n1->apply(ham.h->apply(v));
    worst = std::max(worst, c.norm() / v.norm());
  }
  return worst;
}

// --- states -------------------------------------------------------------------

TruncationError::TruncationError(double captured, int nucleon_cap, int meson_cap)
    : NumericalError([&] {
        std::ostringstream os;
        os << "Fock truncation captures only " << captured
           << " of the coherent state norm; try nucleon_cap >= " << nucleon_cap
           << " and meson_cap >= " << meson_cap;
        return os.str();
      }()),
      captured_(captured),
      nucleon_cap_(nucleon_cap),
      meson_cap_(meson_cap) {}

int adequate_cap(double mean, double tail) {
  int cap = static_cast<int>(std::ceil(4.0 * mean));
  if (!(mean > 0.0)) return cap;
  // P(N > c) for N ~ Poisson(mean)
  double term = std::exp(-mean), cdf = term;
  int c = 0;
  while (1.0 - cdf >= tail && c < 10000) {
    ++c;
    term *= mean / c;
    cdf += term;
    if (term < tail * 1e-3 && c > mean) break;
  }
  return std::max(cap, c);
}

QuantumState coherent_state(const FockBasis& basis, const ModeAmplitudes& a) {
  const double hbar = basis.spec().hbar;
  if (a.nucleon.size() != basis.nucleons().modes() || a.meson.size() != basis.mesons().modes())
    throw ConfigError({"coherent amplitudes do not match the Fock spec"});
  QuantumState s;
  s.coeffs.resize(basis.dimension());
  std::vector<cplx> nuc(basis.nucleons().size()), mes(basis.mesons().size());
  for (int i = 0; i < basis.nucleons().size(); ++i)
    nuc[i] = coherent_product(basis.nucleons()[i], a.nucleon, hbar);
  for (int j = 0; j < basis.mesons().size(); ++j)
    mes[j] = coherent_product(basis.mesons()[j], a.meson, hbar);
  for (int i = 0; i < basis.nucleons().size(); ++i)
    for (int j = 0; j < basis.mesons().size(); ++j) s.coeffs[basis.index(i, j)] = nuc[i] * mes[j];
  s.captured_norm = s.coeffs.squaredNorm();
  s.sector = basis.spec().nucleon_sector;
  if (!s.sector && s.captured_norm < 1.0 - 1e-8)
    throw TruncationError(s.captured_norm, adequate_cap(a.nucleon.squaredNorm() / hbar),
                          adequate_cap(a.meson.squaredNorm() / hbar));
  if (s.captured_norm > 0.0) s.coeffs /= std::sqrt(s.captured_norm);
  return s;
}

QuantumState propagate(const SparseOperator& h, const QuantumState& psi, double t, double hbar,
                       double tol) {
  if (!(tol > 0.0)) throw ConfigError({"propagate tol must be > 0"});
  QuantumState out = psi;
  out.coeffs = expv(h.as_linear_op(), t / hbar, psi.coeffs, {tol, 30}).vector;
  return out;
}

namespace {
struct Ladder {
  int target;
  double c;
};

Ladder ladder(const FockBasis& b, int mode, int index, bool create) {
  const int d = b.nucleons().modes();
  const int ms = b.mesons().size();
  const int i = index / ms, j = index % ms;
  if (mode < d) {
    Occupation occ = b.nucleons()[i];
    const int n = occ[mode];
    if (!create && n == 0) return {-1, 0.0};
    occ[mode] += create ? 1 : -1;
    const int to = b.nucleons().index_of(occ);
    if (to < 0) return {-1, 0.0};
    return {b.index(to, j), std::sqrt(static_cast<double>(create ? n + 1 : n))};
  }
  Occupation occ = b.mesons()[j];
  const int q = mode - d;
  const int n = occ[q];
  if (!create && n == 0) return {-1, 0.0};
  occ[q] += create ? 1 : -1;
  const int to = b.mesons().index_of(occ);
  if (to < 0) return {-1, 0.0};
  return {b.index(i, to), std::sqrt(static_cast<double>(create ? n + 1 : n))};
}

CVec apply_ladder(const FockBasis& b, int mode, const CVec& psi, bool create) {
  if (mode < 0 || mode >= b.nucleons().modes() + b.mesons().modes())
    throw ConfigError({"ladder mode index out of range"});
  if (mode < b.nucleons().modes() && b.spec().nucleon_sector)
    throw ConfigError({"nucleon ladder operators leave a fixed nucleon sector"});
  const double s = std::sqrt(b.spec().hbar);
  CVec out = CVec::Zero(psi.size());
  for (int k = 0; k < psi.size(); ++k) {
    if (psi[k] == cplx(0.0)) continue;
    const Ladder l = ladder(b, mode, k, create);
    if (l.target >= 0) out[l.target] += s * l.c * psi[k];
  }
  return out;
}
}  // namespace

CVec apply_annihilator(const FockBasis& basis, int mode, const CVec& psi) {
  return apply_ladder(basis, mode, psi, false);
}

CVec apply_creator(const FockBasis& basis, int mode, const CVec& psi) {
  return apply_ladder(basis, mode, psi, true);
}

SparseOperator field_operator(const FockBasis& basis, const CVec& eta_nucleon,
                              const CVec& eta_meson) {
  const int d = basis.nucleons().modes();
  if (eta_nucleon.size() != d || eta_meson.size() != basis.mesons().modes())
    throw ConfigError({"field probe does not match the Fock spec"});
  if (basis.spec().nucleon_sector && eta_nucleon.norm() > 0.0)
    throw ConfigError({"nucleon field components leave a fixed nucleon sector"});
  const double s = std::sqrt(basis.spec().hbar);
  std::vector<Eigen::Triplet<cplx>> t;
  const int dim = basis.dimension();
  for (int mode = 0; mode < d + basis.mesons().modes(); ++mode) {
    const cplx eta = mode < d ? eta_nucleon[mode] : eta_meson[mode - d];
    if (eta == cplx(0.0)) continue;
    for (int k = 0; k < dim; ++k) {
      const Ladder l = ladder(basis, mode, k, true);
      if (l.target < 0) continue;
      // a*(eta) raises with eta, a(eta) lowers with conj(eta)
      t.emplace_back(l.target, k, s * l.c * eta);
      t.emplace_back(k, l.target, s * l.c * std::conj(eta));
    }
  }
  SparseOperator::Matrix m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return SparseOperator(std::move(m));
}

cplx weyl_expectation(const FockBasis& basis, const CVec& eta_nucleon, const CVec& eta_meson,
                      const QuantumState& psi) {
  const SparseOperator phi = field_operator(basis, eta_nucleon, eta_meson);
  const CVec w = expv(phi.as_linear_op(), -1.0 / kSqrt2, psi.coeffs, {1e-13, 40}).vector;
  return psi.coeffs.dot(w);
}

cplx coherent_characteristic(const ModeAmplitudes& a, const CVec& eta_nucleon,
                             const CVec& eta_meson, double hbar) {
  const double re = (eta_nucleon.dot(a.nucleon) + eta_meson.dot(a.meson)).real();
  const double n2 = eta_nucleon.squaredNorm() + eta_meson.squaredNorm();
  return std::exp(cplx(-0.25 * hbar * n2, kSqrt2 * re));
}

long SectoredState::dimension() const {
  long d = 0;
  for (const auto& s : sectors) d += s.ham->basis.dimension();
  return d;
}

SectoredState coherent_sectors(const ModeSet& modes, const FockSpec& spec,
                               const ModeAmplitudes& a) {
  auto v = spec.violations();
  if (!v.empty()) throw ConfigError(v);
  SectoredState out;
  out.hbar = spec.hbar;
  double captured = 0.0;
  for (int n = 0; n <= spec.nucleon_cap; ++n) {
    FockSpec s = spec;
    s.nucleon_sector = n;
    Sector sec;
    sec.n = n;
    sec.ham = build_hamiltonian(modes, s);
    const FockBasis& b = sec.ham->basis;
    sec.coeffs.resize(b.dimension());
    for (int i = 0; i < b.nucleons().size(); ++i) {
      const cplx ci = coherent_product(b.nucleons()[i], a.nucleon, spec.hbar);
      for (int j = 0; j < b.mesons().size(); ++j)
        sec.coeffs[b.index(i, j)] = ci * coherent_product(b.mesons()[j], a.meson, spec.hbar);
    }
    captured += sec.coeffs.squaredNorm();
    out.sectors.push_back(std::move(sec));
  }
  out.captured_norm = captured;
  if (captured < 1.0 - 1e-8)
    throw TruncationError(captured, adequate_cap(a.nucleon.squaredNorm() / spec.hbar),
                          adequate_cap(a.meson.squaredNorm() / spec.hbar));
  for (auto& s : out.sectors) s.coeffs /= std::sqrt(captured);
  return out;
}

// --- asymptotic proxies ---------------------------------------------------------

namespace {

/// Meson-factor operators shared by all sectors with the same meson basis.
struct MesonOps {
  RVec omega_level;  // sum_q omega_q m_q per meson basis state
  std::vector<Eigen::MatrixXcd> a;
};

MesonOps meson_ops(const OccupationBasis& mb, const ModeSet& modes) {
  MesonOps m;
  m.omega_level = RVec::Zero(mb.size());
  for (int j = 0; j < mb.size(); ++j)
    for (int q = 0; q < mb.modes(); ++q) m.omega_level[j] += modes.meson_omega[q] * mb[j][q];
  for (int q = 0; q < mb.modes(); ++q) m.a.push_back(dense_annihilator(mb, q));
  return m;
}

/// phi(eta) = sqrt(hbar) sum_q (conj(eta_q) a_q + eta_q a_q^*)
Eigen::MatrixXcd meson_field(const MesonOps& m, const CVec& eta, double hbar) {
  const auto n = m.omega_level.size();
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t q = 0; q < m.a.size(); ++q)
    f += std::conj(eta[q]) * m.a[q] + eta[q] * m.a[q].adjoint();
  return std::sqrt(hbar) * f;
}

Eigen::MatrixXcd meson_weyl(const Eigen::MatrixXcd& field) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(field);
  CVec ph(field.rows());
  for (Eigen::Index i = 0; i < ph.size(); ++i)
    ph[i] = std::polar(1.0, es.eigenvalues()[i] / kSqrt2);
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// X(eta_tau) from X(eta): entries times e^{-i tau (Omega_j - Omega_j')}.
Eigen::MatrixXcd free_shift(const Eigen::MatrixXcd& x, const MesonOps& m, double tau) {
  Eigen::MatrixXcd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.rows(); ++j)
    for (Eigen::Index k = 0; k < x.cols(); ++k)
      out(j, k) = x(j, k) * std::polar(1.0, -tau * (m.omega_level[j] - m.omega_level[k]));
  return out;
}

/// hbar sum (Im h_tau)[p,p'] b*_p b_p' on the nucleon basis, h_tau = sum_q conj(eta_q) e^{i tau omega_q} g_q.
Eigen::MatrixXcd nucleon_im_coupling(const std::vector<Hop>& hops, int size, const ModeSet& modes,
                                     const CVec& eta, double tau, double hbar) {
  const int d = modes.nucleon_count();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (int q = 0; q < modes.meson_count(); ++q)
    h += std::conj(eta[q]) * std::polar(1.0, tau * modes.meson_omega[q]) * modes.coupling[q];
  const Eigen::MatrixXcd im = (h - h.adjoint()) / (2.0 * I);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(size, size);
  for (const Hop& hp : hops) out(hp.to, hp.from) += hbar * im(hp.p, hp.pp) * hp.c;
  return out;
}

cplx pair(const CVec& psi, const RowMat& y) {
  const Eigen::Map<const RowMat> p(psi.data(), y.rows(), y.cols());
  return (p.conjugate().cwiseProduct(y)).sum();
}

RowMat as_matrix(const CVec& psi, int rows, int cols) {
  return Eigen::Map<const RowMat>(psi.data(), rows, cols);
}

/// Visit every sector's state on the checkpoint grid tau_k = sgn k h, k = 0..K.
template <class Visit>
void march(const SectoredState& psi, const AsymptoticOptions& o, int k_max, double h,
           Visit&& visit) {
  const double sgn = o.direction == Direction::Forward ? 1.0 : -1.0;
  for (std::size_t s = 0; s < psi.sectors.size(); ++s) {
    const Sector& sec = psi.sectors[s];
    if (sec.coeffs.squaredNorm() == 0.0) continue;
    const LinearOp op = sec.ham->h->as_linear_op();
    CVec v = sec.coeffs;
    for (int k = 0;; ++k) {
      visit(s, k, sgn * k * h, v);
      if (k == k_max) break;
      v = expv(op, sgn * h / psi.hbar, v, {o.krylov_tol, 30}).vector;
    }
  }
}

void check_options(const AsymptoticOptions& o, const SectoredState& psi) {
  std::vector<std::string> bad;
  if (!(o.horizon > 0.0)) bad.push_back("asymptotic horizon must be > 0");
  if (!(o.checkpoint > 0.0 && o.checkpoint <= o.horizon))
    bad.push_back("checkpoint spacing must lie in (0, horizon]");
  if (psi.sectors.empty()) bad.push_back("state has no sectors");
  if (!bad.empty()) throw ConfigError(bad);
}

AsymptoticValue finish(cplx initial, const std::vector<cplx>& integrand, double h, double sgn,
                       double horizon) {
  AsymptoticValue v;
  v.initial = initial;
  const auto [simpson, trap] = quadrature(integrand, h);
  v.integral = sgn * simpson;
  v.quadrature_error = std::abs(simpson - trap);
  v.value = v.initial + v.integral;
  for (std::size_t k = 0; k < integrand.size(); ++k) {
    v.tau.push_back(k * h);
    v.integrand_abs.push_back(std::abs(integrand[k]));
  }
  const DecayFit fit = fit_decay(v.tau, v.integrand_abs, 0.25 * horizon, horizon, 1.0);
  v.decay_exponent = fit.exponent;
  v.decaying = fit.exponent >= 1.5;
  v.tail_bound = v.decaying ? tail_bound(fit, horizon) : std::numeric_limits<double>::infinity();
  return v;
}

struct SectorCache {
  std::vector<Hop> hops;
  int dn = 0;
  int dm = 0;
};

std::vector<SectorCache> sector_caches(const SectoredState& psi) {
  std::vector<SectorCache> c;
  for (const auto& s : psi.sectors)
    c.push_back({one_body_hops(s.ham->basis.nucleons()), s.ham->basis.nucleons().size(),
                 s.ham->basis.mesons().size()});
  return c;
}

}  // namespace

std::vector<AsymptoticValue> asymptotic_weyl_expectation(const SectoredState& psi,
                                                         const ModeSet& modes,
                                                         const std::vector<CVec>& etas,
                                                         const AsymptoticOptions& o) {
  check_options(o, psi);
  const double hbar = psi.hbar;
  const int k_max = even_steps(o.horizon, o.checkpoint);
  const double h = o.horizon / k_max;
  const double sgn = o.direction == Direction::Forward ? 1.0 : -1.0;
  const auto caches = sector_caches(psi);
  const MesonOps mops = meson_ops(psi.sectors.front().ham->basis.mesons(), modes);
  std::vector<Eigen::MatrixXcd> weyl;
  for (const auto& eta : etas) weyl.push_back(meson_weyl(meson_field(mops, eta, hbar)));

  const std::size_t ne = etas.size();
  std::vector<cplx> initial(ne, 0.0), direct(ne, 0.0);
  std::vector<std::vector<cplx>> integrand(ne, std::vector<cplx>(k_max + 1, 0.0));
  march(psi, o, k_max, h, [&](std::size_t s, int k, double tau, const CVec& v) {
    const SectorCache& c = caches[s];
    const RowMat p = as_matrix(v, c.dn, c.dm);
    for (std::size_t e = 0; e < ne; ++e) {
      const Eigen::MatrixXcd w = free_shift(weyl[e], mops, tau);
      const RowMat pw = p * w.transpose();
      if (k == 0) initial[e] += pair(v, pw);
      if (k == k_max) direct[e] += pair(v, pw);
      const Eigen::MatrixXcd m = nucleon_im_coupling(c.hops, c.dn, modes, etas[e], tau, hbar);
      integrand[e][k] += kSqrt2 * I * pair(v, m * pw);
    }
  });
  std::vector<AsymptoticValue> out;
  for (std::size_t e = 0; e < ne; ++e) {
    AsymptoticValue v = finish(initial[e], integrand[e], h, sgn, o.horizon);
    v.direct = direct[e];
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<AsymptoticValue> asymptotic_field_expectation(const SectoredState& psi,
                                                          const ModeSet& modes,
                                                          const std::vector<CVec>& etas,
                                                          const AsymptoticOptions& o) {
  check_options(o, psi);
  const double hbar = psi.hbar;
  const int k_max = even_steps(o.horizon, o.checkpoint);
  const double h = o.horizon / k_max;
  const double sgn = o.direction == Direction::Forward ? 1.0 : -1.0;
  const auto caches = sector_caches(psi);
  const MesonOps mops = meson_ops(psi.sectors.front().ham->basis.mesons(), modes);
  std::vector<Eigen::MatrixXcd> field;
  for (const auto& eta : etas) field.push_back(meson_field(mops, eta, hbar));

  const std::size_t ne = etas.size();
  std::vector<cplx> initial(ne, 0.0), direct(ne, 0.0);
  std::vector<std::vector<cplx>> integrand(ne, std::vector<cplx>(k_max + 1, 0.0));
  march(psi, o, k_max, h, [&](std::size_t s, int k, double tau, const CVec& v) {
    const SectorCache& c = caches[s];
    const RowMat p = as_matrix(v, c.dn, c.dm);
    for (std::size_t e = 0; e < ne; ++e) {
      if (k == 0) initial[e] += pair(v, p * field[e].transpose());
      if (k == k_max) direct[e] += pair(v, p * free_shift(field[e], mops, tau).transpose());
      const Eigen::MatrixXcd m = nucleon_im_coupling(c.hops, c.dn, modes, etas[e], tau, hbar);
      integrand[e][k] += 2.0 * pair(v, m * p);
    }
  });
  std::vector<AsymptoticValue> out;
  for (std::size_t e = 0; e < ne; ++e) {
    AsymptoticValue v = finish(initial[e], integrand[e], h, sgn, o.horizon);
    v.direct = direct[e];
    out.push_back(std::move(v));
  }
  return out;
}

AsymptoticValue asymptotic_correlation(const SectoredState& psi, const ModeSet& modes,
                                       const std::vector<CVec>& etas,
                                       const AsymptoticOptions& o) {
  check_options(o, psi);
  if (etas.empty() || etas.size() > 3)
    throw ConfigError({"correlations take between one and three probes"});
  const double hbar = psi.hbar;
  const int k_max = even_steps(o.horizon, o.checkpoint);
  const double h = o.horizon / k_max;
  const double sgn = o.direction == Direction::Forward ? 1.0 : -1.0;
  const auto caches = sector_caches(psi);
  const MesonOps mops = meson_ops(psi.sectors.front().ham->basis.mesons(), modes);
  std::vector<Eigen::MatrixXcd> field;
  for (const auto& eta : etas) field.push_back(meson_field(mops, eta, hbar));
  const std::size_t ne = etas.size();
  const auto dm = mops.omega_level.size();

  auto product = [&](double tau, std::size_t skip) {
    Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(dm, dm);
    for (std::size_t e = 0; e < ne; ++e)
      if (e != skip) prod = prod * free_shift(field[e], mops, tau);
    return prod;
  };

  cplx initial = 0.0, direct = 0.0;
  std::vector<cplx> integrand(k_max + 1, 0.0);
  march(psi, o, k_max, h, [&](std::size_t s, int k, double tau, const CVec& v) {
    const SectorCache& c = caches[s];
    const RowMat p = as_matrix(v, c.dn, c.dm);
    if (k == 0 || k == k_max) {
      const cplx full = pair(v, p * product(tau, ne).transpose());
      (k == 0 ? initial : direct) += full;
    }
    for (std::size_t j = 0; j < ne; ++j) {
      const Eigen::MatrixXcd m = nucleon_im_coupling(c.hops, c.dn, modes, etas[j], tau, hbar);
      integrand[k] += 2.0 * pair(v, m * (p * product(tau, j).transpose()));
    }
  });
  AsymptoticValue v = finish(initial, integrand, h, sgn, o.horizon);
  v.direct = direct;
  return v;
}

// --- ground states --------------------------------------------------------------

GroundState ground_state(const YukawaHamiltonian& ham, double tol) {
  const FockBasis& b = ham.basis;
  if (!b.spec().nucleon_sector) throw ConfigError({"ground_state needs a fixed nucleon sector"});
  const int dim = b.dimension();
  Occupation occ(b.nucleons().modes(), 0);
  occ[0] = *b.spec().nucleon_sector;
  CVec start = CVec::Zero(dim);
  start[b.index(b.nucleons().index_of(occ), 0)] = 1.0;
  Rng rng = make_rng(17, 0);
  start += 1e-3 * random_complex(rng, dim);
  const LinearOp op = ham.h->as_linear_op();
  const EigenPair e0 = lanczos_lowest(op, start, {tol, 300, 200});
  if (!e0.converged) {
    std::ostringstream os;
    os << "ground-state Lanczos did not converge, residual " << e0.residual;
    throw NumericalError(os.str());
  }
  GroundState gs;
  gs.energy = e0.value;
  gs.residual = e0.residual;
  gs.state.coeffs = e0.vector;
  gs.state.sector = b.spec().nucleon_sector;

  if (dim > 1) {
    // deflate the ground state to read off the next eigenvalue
    double bound = 0.0;
    const auto& m = ham.h->matrix();
    for (int r = 0; r < m.outerSize(); ++r) {
      double row = 0.0;
      for (SparseOperator::Matrix::InnerIterator it(m, r); it; ++it) row += std::abs(it.value());
      bound = std::max(bound, row);
    }
    const double shift = 2.0 * bound + 1.0;
    const CVec g = e0.vector;
    LinearOp deflated = [&](const CVec& in, CVec& out) {
      out = m * in;
      out += shift * g.dot(in) * g;
    };
    CVec s2 = random_complex(rng, dim);
    s2 -= g.dot(s2) * g;
    const EigenPair e1 = lanczos_lowest(deflated, s2, {tol, 300, 200});
    gs.second_energy = e1.value;
    if (std::abs(e1.value - e0.value) < 1e-10) {
      gs.degenerate = true;
      QuantumState second;
      second.coeffs = e1.vector;
      second.sector = gs.state.sector;
      gs.second_state = second;
    }
  }
  return gs;
}

AnnihilatorProxy ground_annihilator_proxy(const YukawaHamiltonian& ham, const GroundState& gs,
                                          const ModeSet& modes, const CVec& eta, double horizon,
                                          double /*checkpoint*/) {
  if (!(horizon > 0.0)) throw ConfigError({"annihilator horizon must be > 0"});
  const FockBasis& b = ham.basis;
  const double hbar = b.spec().hbar;
  const int d = b.nucleons().modes();
  const LinearOp op = ham.h->as_linear_op();
  AnnihilatorProxy r;
  CVec averaged = CVec::Zero(b.dimension());
  CVec instant = CVec::Zero(b.dimension());
  for (int q = 0; q < modes.meson_count(); ++q) {
    const CVec w = apply_annihilator(b, d + q, gs.state.coeffs);
    const double wq = w.norm();
    const double om = modes.meson_omega[q];
    r.certificate += std::abs(eta[q]) * std::min(1.0, 2.0 / (horizon * om)) * wq;
    instant += std::conj(eta[q]) * std::polar(1.0, horizon * om) * w;
    if (wq == 0.0) continue;
    // (1/T) int_0^T e^{i tau mu} dtau with mu = (lambda - E) / hbar + omega_q
    auto f = [&](double lambda) -> cplx {
      const double mu = (lambda - gs.energy) / hbar + om;
      const double x = horizon * mu;
      if (std::abs(x) < 1e-8) return 1.0 + 0.5 * I * x;
      return (std::polar(1.0, x) - 1.0) / (I * x);
    };
    averaged += std::conj(eta[q]) * apply_function(op, w, f, {1e-12, 400});
  }
  r.certificate += 1e-8;
  r.averaged = averaged.norm();
  r.instantaneous = instant.norm();
  r.below = r.averaged <= r.certificate;
  return r;
}

// --- sweep --------------------------------------------------------------------

const char* to_string(Observable o) {
  switch (o) {
    case Observable::Weyl: return "weyl";
    case Observable::Field: return "field";
    case Observable::Correlation: return "corr";
    case Observable::Ground: return "ground";
  }
  return "?";
}

Observable observable_from_string(const std::string& s) {
  if (s == "weyl") return Observable::Weyl;
  if (s == "field") return Observable::Field;
  if (s == "corr") return Observable::Correlation;
  if (s == "ground") return Observable::Ground;
  throw ConfigError({"unknown observable '" + s + "' (weyl | field | corr | ground)"});
}

std::vector<std::string> SweepConfig::violations() const {
  std::vector<std::string> v;
  if (hbars.empty()) v.push_back("hbar list is empty");
  for (double h : hbars)
    if (!(h > 0.0 && h <= 1.0)) v.push_back("every hbar must lie in (0, 1]");
  if (observable == Observable::Ground && sectors.size() != hbars.size())
    v.push_back("ground sweeps need one nucleon sector per hbar");
  if (!(delta > 0.0)) v.push_back("delta must be > 0");
  if (nucleon_modes < 1) v.push_back("nucleon_modes must be >= 1");
  if (meson_modes < 1) v.push_back("meson_modes must be >= 1");
  if (observable == Observable::Correlation && meson_modes < 2)
    v.push_back("correlation sweeps need at least two dictionary probes");
  if (nucleon_cap < 0 || meson_cap < 0) v.push_back("caps must be >= 0");
  if (!(classical_dt > 0.0)) v.push_back("classical dt must be > 0");
  return v;
}

SweepReport semiclassical_sweep(const SkgSystem& sys, const SweepConfig& config,
                                const std::function<void(const SweepRow&)>& on_row) {
  auto bad = config.violations();
  if (!bad.empty()) throw ConfigError(bad);
  using clock = std::chrono::steady_clock;
  const Grid& grid = sys.grid();
  const TestDictionary dict =
      make_test_dictionary(grid, config.r_in, config.r_out, config.meson_modes);
  const ModeSet modes = build_modes(sys, config.nucleon_modes, dictionary_centers(dict));
  std::vector<CVec> etas;
  for (const auto& f : dict.functions) etas.push_back(project_probe(modes, f));
  const TruncatedSkg model(modes);
  SweepReport rep;
  auto emit = [&](const SweepRow& r) {
    rep.rows.push_back(r);
    if (on_row) on_row(r);
  };

  if (config.observable == Observable::Ground) {
    std::map<double, TruncatedMinimum> classical;
    for (std::size_t i = 0; i < config.hbars.size(); ++i) {
      const auto t0 = clock::now();
      const double hbar = config.hbars[i];
      const int n = config.sectors[i];
      const double delta = std::sqrt(n * hbar);
      if (std::abs(delta - config.delta) > 1e-12)
        rep.notes.push_back("sector " + std::to_string(n) + " at hbar " + std::to_string(hbar) +
                            " has n hbar != delta^2; compared at delta = sqrt(n hbar)");
      if (!classical.count(delta)) classical.emplace(delta, minimize_truncated(model, delta));
      const TruncatedMinimum& cm = classical.at(delta);
      FockSpec spec;
      spec.nucleon_modes = config.nucleon_modes;
      spec.meson_modes = config.meson_modes;
      spec.nucleon_sector = n;
      spec.hbar = hbar;
      spec.meson_cap = config.meson_cap > 0
                           ? config.meson_cap
                           : std::max(4, adequate_cap(cm.state.meson.squaredNorm() / hbar));
      const auto ham = build_hamiltonian(modes, spec);
      const GroundState gs = ground_state(*ham);
      const auto [lo, hi] = energy_bracket(modes, delta);
      SweepRow row;
      row.hbar = hbar;
      row.sector = n;
      row.observable_id = "ground_energy";
      row.quantum = gs.energy;
      row.classical = cm.energy;
      row.gap = std::abs(gs.energy - cm.energy);
      row.certificate = gs.residual;
      row.dims = ham->basis.dimension();
      const double slack = 1e-10 * std::max(1.0, std::abs(hi));
      if (gs.energy < lo - slack || gs.energy > hi + slack) {
        rep.certificates_hold = false;
        rep.notes.push_back("ground energy outside the bracket at hbar " + std::to_string(hbar));
      }
      if (gs.degenerate) rep.notes.push_back("degenerate ground state at hbar " + std::to_string(hbar));
      row.seconds = std::chrono::duration<double>(clock::now() - t0).count();
      emit(row);
      for (std::size_t e = 0; e < etas.size(); ++e) {
        const AnnihilatorProxy ap = ground_annihilator_proxy(*ham, gs, modes, etas[e],
                                                             config.annihilator_horizon);
        SweepRow r;
        r.hbar = hbar;
        r.sector = n;
        r.observable_id = "annihilator:" + dict[e].label;
        r.quantum = ap.averaged;
        r.classical = 0.0;
        r.gap = ap.averaged;
        r.certificate = ap.certificate;
        r.tail_bound = ap.instantaneous;
        r.dims = ham->basis.dimension();
        if (!ap.below) rep.certificates_hold = false;
        emit(r);
      }
    }
  } else {
    const HartreeResult hr = minimize(sys, config.delta);
    const ModeAmplitudes amps = project_state(modes, grid, {hr.u0, hr.z0, 0.0});
    const auto targets = truncated_pairings(model, amps, etas, config.asymptotic.horizon,
                                            config.asymptotic.direction, config.classical_dt);
    const double quanta = amps.nucleon.squaredNorm() + amps.meson.squaredNorm();
    for (double hbar : config.hbars) {
      const auto t0 = clock::now();
      FockSpec spec;
      spec.nucleon_modes = config.nucleon_modes;
      spec.meson_modes = config.meson_modes;
      spec.hbar = hbar;
      const int rule = static_cast<int>(std::ceil(4.0 * quanta / hbar));
      spec.nucleon_cap = config.nucleon_cap > 0
                             ? config.nucleon_cap
                             : std::max(rule, adequate_cap(amps.nucleon.squaredNorm() / hbar));
      spec.meson_cap = config.meson_cap > 0
                           ? config.meson_cap
                           : std::max(rule, adequate_cap(amps.meson.squaredNorm() / hbar));
      const SectoredState psi = coherent_sectors(modes, spec, amps);
      std::vector<SweepRow> rows;
      if (config.observable == Observable::Correlation) {
        const std::vector<CVec> pair_etas{etas[0], etas[1]};
        const AsymptoticValue v = asymptotic_correlation(psi, modes, pair_etas, config.asymptotic);
        SweepRow r;
        r.observable_id = "corr:" + dict[0].label + "*" + dict[1].label;
        r.quantum = v.value;
        r.classical = 4.0 * targets[0].direct.real() * targets[1].direct.real();
        r.tail_bound = v.tail_bound;
        r.quadrature_error = v.quadrature_error;
        rows.push_back(r);
      } else {
        const bool weyl = config.observable == Observable::Weyl;
        const auto vals = weyl ? asymptotic_weyl_expectation(psi, modes, etas, config.asymptotic)
                               : asymptotic_field_expectation(psi, modes, etas, config.asymptotic);
        for (std::size_t e = 0; e < etas.size(); ++e) {
          SweepRow r;
          r.observable_id = std::string(to_string(config.observable)) + ":" + dict[e].label;
          r.quantum = vals[e].value;
          const double re = targets[e].direct.real();
          r.classical = weyl ? std::exp(cplx(0.0, kSqrt2 * re)) : cplx(2.0 * re);
          r.tail_bound = vals[e].tail_bound;
          r.quadrature_error = vals[e].quadrature_error;
          rows.push_back(r);
        }
      }
      const double secs = std::chrono::duration<double>(clock::now() - t0).count();
      for (auto& r : rows) {
        r.hbar = hbar;
        r.gap = std::abs(r.quantum - r.classical);
        r.dims = psi.dimension();
        r.seconds = secs;
        emit(r);
      }
    }
  }

  std::map<std::string, std::vector<double>> gaps;
  for (const auto& r : rep.rows)
    if (r.observable_id.rfind("annihilator:", 0) != 0) gaps[r.observable_id].push_back(r.gap);
  rep.all_monotone = !gaps.empty();
  for (const auto& [id, g] : gaps) {
    bool mono = true;
    for (std::size_t i = 1; i < g.size(); ++i) mono = mono && g[i] < g[i - 1];
    rep.monotone[id] = mono;
    rep.all_monotone = rep.all_monotone && mono;
  }
  return rep;
}

}  // namespace skg
