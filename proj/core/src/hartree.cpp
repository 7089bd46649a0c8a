#include "skg/hartree.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "skg/fourier.hpp"
#include "skg/rng.hpp"

namespace skg {

KernelW build_kernel(const Grid& grid) {
  KernelW w;
  w.profile = (grid.chi.array() / grid.omega.array()).square();
  w.samples = grid.dk * grid.dft->to_position(w.profile.cast<cplx>(), +1).real();
  return w;
}

RVec convolve_direct(const Grid& grid, const KernelW& kernel, const RVec& rho) {
  const int n = grid.n;
  RVec out = RVec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int l = 0; l < n; ++l) acc += kernel.samples[((i - l + n / 2) % n + n) % n] * rho[l];
    out[i] = grid.dx * acc;
  }
  return out;
}

HartreeEnergy hartree_energy(const SkgSystem& sys, const CVec& u) {
  HartreeEnergy e;
  const Grid& g = sys.grid();
  e.kinetic = sys.kinetic_energy(u);
  const RVec rho = u.array().abs2();
  e.quartic = g.dx * rho.dot(sys.pair_convolution(rho));
  e.value = e.kinetic - e.quartic;
  return e;
}

CVec reconstruct_field(const SkgSystem& sys, const CVec& u) {
  const Grid& g = sys.grid();
  CVec z = sys.source_term(u);
  z.array() /= -g.omega.array().cast<cplx>();
  return z;
}

CVec hartree_gradient(const SkgSystem& sys, const CVec& u, double quartic_coefficient) {
  const RVec w = sys.pair_convolution(u.array().abs2());
  CVec g = 2.0 * sys.apply_schrodinger(u);
  g.array() -= quartic_coefficient * w.array().cast<cplx>() * u.array();
  return g;
}

LinearOp mean_field_operator(const SkgSystem& sys, const CVec& u) {
  RVec w = sys.pair_convolution(u.array().abs2());
  return [&sys, w = std::move(w)](const CVec& in, CVec& out) {
    out = sys.apply_schrodinger(in);
    out.array() -= 2.0 * w.array().cast<cplx>() * in.array();
  };
}

EigenPair lowest_mode(const SkgSystem& sys) {
  const Grid& g = sys.grid();
  CVec start = (-0.5 * g.x.array().square()).exp().cast<cplx>();
  LinearOp h = [&sys](const CVec& in, CVec& out) { out = sys.apply_schrodinger(in); };
  return lanczos_lowest(h, start, {1e-12, 200, 200});
}

double energy_lower_bound(const SkgSystem& sys, double delta, std::optional<double> e0) {
  const double base = e0 ? *e0 : lowest_mode(sys).value;
  const double kn = sys.kernel_norm();
  return base * delta * delta - std::pow(delta, 4) * kn * kn;
}

double gradient_check(const SkgSystem& sys, const CVec& u, const GradientCheckOptions& options) {
  const Grid& g = sys.grid();
  const CVec grad = hartree_gradient(sys, u, options.quartic_coefficient);
  Rng rng = make_rng(options.seed, 0);
  double worst = 0.0;
  for (int d = 0; d < options.directions; ++d) {
    CVec v = random_complex(rng, g.n);
    v *= g.norm_x(u) / std::max(g.norm_x(v), 1e-300);
    const double fp = hartree_energy(sys, u + options.h * v).value;
    const double fm = hartree_energy(sys, u - options.h * v).value;
    const double fd = (fp - fm) / (2.0 * options.h);
    const double an = g.inner_x(grad, v).real();
    const double scale = g.norm_x(grad) * g.norm_x(v);
    worst = std::max(worst, std::abs(fd - an) / std::max(scale, 1e-300));
  }
  return worst;
}

const char* to_string(HartreeMethod m) {
  return m == HartreeMethod::Scf ? "scf" : "projected-gradient";
}

CVec canonical_phase(const CVec& u) {
  if (u.size() == 0) return u;
  Eigen::Index imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  if (u[imax] == cplx(0.0)) return u;
  return u * (std::abs(u[imax]) / u[imax]);
}

double phase_distance(const Grid& grid, const CVec& a, const CVec& b) {
  const cplx overlap = grid.inner_x(b, a);
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0);
  return grid.norm_x(a - phase * b);
}

namespace {

struct Iterate {
  double energy = 0.0;
  double residual = 0.0;
  double lambda = 0.0;
};

Iterate evaluate(const SkgSystem& sys, const CVec& u, double delta) {
  const Grid& g = sys.grid();
  Iterate it;
  it.energy = hartree_energy(sys, u).value;
  CVec au;
  mean_field_operator(sys, u)(u, au);
  it.lambda = g.inner_x(u, au).real() / (delta * delta);
  it.residual = g.norm_x(au - it.lambda * u) / delta;
  return it;
}

void renormalize(const Grid& g, CVec& u, double delta) { u *= delta / g.norm_x(u); }

}  // namespace

HartreeResult minimize(const SkgSystem& sys, double delta, const MinimizeOptions& options) {
  const Grid& g = sys.grid();
  if (!(delta > 0.0)) throw ConfigError({"hartree: delta must be > 0"});
  if (!(options.tol > 0.0)) throw ConfigError({"hartree: tol must be > 0"});
  if (!(options.damping > 0.0 && options.damping <= 1.0))
    throw ConfigError({"hartree: damping must lie in (0, 1]"});

  HartreeResult r;
  r.delta = delta;
  const EigenPair mode = lowest_mode(sys);
  r.lower_bound = energy_lower_bound(sys, delta, mode.value);
  CVec u = options.guess.size() == g.n ? options.guess : mode.vector;
  if (!(g.norm_x(u) > 0.0)) throw ConfigError({"hartree: initial guess is zero"});
  renormalize(g, u, delta);

  HartreeMethod method = options.method;
  Iterate cur = evaluate(sys, u, delta);
  double theta = options.damping;
  double eta = 0.0;
  const double lanczos_tol = std::max(0.05 * options.tol, 2e-13);
  bool converged = false;

  auto check_bound = [&](double e) {
    if (e < r.lower_bound - 1e-12 * std::max(1.0, std::abs(r.lower_bound))) {
      std::ostringstream os;
      os << "hartree energy " << e << " below the lower bound " << r.lower_bound
         << ": kernel bug";
      throw Error(os.str());
    }
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    r.residual_history.push_back(cur.residual);
    r.energy_history.push_back(cur.energy);
    check_bound(cur.energy);
    if (cur.residual < options.tol) {
      converged = true;
      break;
    }
    ++r.iterations;

    if (method == HartreeMethod::Scf) {
      const auto hist = r.residual_history.size();
      if (hist > 60 && cur.residual > 0.5 * r.residual_history[hist - 51]) {
        method = HartreeMethod::ProjectedGradient;
        continue;
      }
      const EigenPair ev =
          lanczos_lowest(mean_field_operator(sys, u), u, {lanczos_tol, 200, 50});
      CVec v = ev.vector;
      const cplx overlap = v.dot(u);
      if (std::abs(overlap) > 0.0) v *= overlap / std::abs(overlap);
      renormalize(g, v, delta);
      for (;;) {
        CVec trial = (1.0 - theta) * u + theta * v;
        renormalize(g, trial, delta);
        const Iterate next = evaluate(sys, trial, delta);
        if (next.energy <= cur.energy + 1e-13 * std::max(1.0, std::abs(cur.energy))) {
          u = std::move(trial);
          cur = next;
          theta = std::min(options.damping, 2.0 * theta);
          break;
        }
        theta *= 0.5;
        if (theta < 1e-4) {
          method = HartreeMethod::ProjectedGradient;
          theta = options.damping;
          break;
        }
      }
    } else {
      // descent direction in the H^1 metric, tangent to the sphere
      const CVec grad = hartree_gradient(sys, u);
      const RVec mv = (1.0 + g.potential.array()).rsqrt();
      auto precondition = [&](const CVec& f) {
        CVec fh = transform(g, mv.cast<cplx>().cwiseProduct(f), TransformDirection::ToMomentum);
        fh.array() /= (g.k.array().square() + 1.0).cast<cplx>();
        return CVec(mv.cast<cplx>().cwiseProduct(transform(g, fh, TransformDirection::ToPosition)));
      };
      const CVec pgr = precondition(grad);
      const CVec pu = precondition(u);
      const CVec dir = pgr - (g.inner_x(u, pgr).real() / g.inner_x(u, pu).real()) * pu;
      const double slope = g.inner_x(grad, dir).real();
      if (eta == 0.0) eta = 0.25;
      eta *= 2.0;
      for (;;) {
        CVec trial = u - eta * dir;
        renormalize(g, trial, delta);
        const Iterate next = evaluate(sys, trial, delta);
        const double noise = 4e-16 * std::max(1.0, std::abs(cur.energy));
        const bool armijo = next.energy <= cur.energy - 1e-4 * eta * slope;
        // once energy differences drop into rounding noise, descend on the residual
        const bool flat = std::abs(next.energy - cur.energy) <= noise &&
                          next.residual < cur.residual;
        if (armijo || flat) {
          u = std::move(trial);
          cur = next;
          break;
        }
        eta *= 0.5;
        if (eta < 1e-16) break;
      }
      if (eta < 1e-16) break;
    }
  }

  if (!converged) {
    std::ostringstream os;
    os << "hartree minimization did not converge after " << r.iterations
       << " iterations, residual " << cur.residual;
    throw HartreeConvergenceError(os.str(), r.residual_history);
  }

  renormalize(g, u, delta);
  u = canonical_phase(u);
  const HartreeEnergy he = hartree_energy(sys, u);
  r.method = method;
  r.u0 = u;
  r.z0 = reconstruct_field(sys, u);
  r.energy = he.value;
  r.quartic = he.quartic;
  const Iterate fin = evaluate(sys, u, delta);
  r.lambda = fin.lambda;
  r.residual = fin.residual;
  r.lambda_from_energy = (he.value - he.quartic) / (delta * delta);
  r.lambda_printed = he.value / (delta * delta);
  CVec printed = sys.apply_schrodinger(u);
  printed.array() -= sys.pair_convolution(u.array().abs2()).array().cast<cplx>() * u.array();
  r.residual_printed = g.norm_x(printed - r.lambda_printed * u) / delta;
  check_bound(r.energy);
  return r;
}

MultiStartReport multi_start(const SkgSystem& sys, double delta, int starts, std::uint64_t seed,
                             const MinimizeOptions& options) {
  const Grid& g = sys.grid();
  if (starts < 1) throw ConfigError({"hartree: starts must be >= 1"});
  const double width = g.L / 4.0;
  std::vector<std::future<HartreeResult>> jobs;
  for (int s = 0; s < starts; ++s) {
    MinimizeOptions o = options;
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(s));
    o.guess = random_complex(rng, g.n);
    o.guess.array() *= (-0.5 * (g.x.array() / width).square()).exp().cast<cplx>();
    jobs.push_back(std::async(std::launch::async,
                              [&sys, delta, o] { return minimize(sys, delta, o); }));
  }
  MultiStartReport rep;
  for (auto& j : jobs) rep.results.push_back(j.get());
  for (int a = 0; a < starts; ++a)
    for (int b = a + 1; b < starts; ++b) {
      const double d = phase_distance(g, rep.results[a].u0, rep.results[b].u0);
      rep.pairwise.push_back(d);
      rep.max_distance = std::max(rep.max_distance, d);
    }
  return rep;
}

UniquenessEstimate estimate_uniqueness_threshold(const SkgSystem& sys, double lo, double hi,
                                                 int starts, std::uint64_t seed, int bisections,
                                                 double agree_tol) {
  if (!(lo > 0.0 && hi > lo)) throw ConfigError({"uniqueness scan needs 0 < lo < hi"});
  UniquenessEstimate est;
  auto agrees = [&](double delta) {
    double d = 0.0;
    try {
      d = multi_start(sys, delta, starts, seed).max_distance;
    } catch (const HartreeConvergenceError&) {
      d = std::numeric_limits<double>::infinity();
    }
    est.probes.emplace_back(delta, d);
    return d <= agree_tol;
  };
  if (!agrees(lo)) {
    est.first_disagreement = lo;
    return est;
  }
  est.delta_star = lo;
  if (agrees(hi)) {
    est.delta_star = hi;
    return est;
  }
  double a = lo, b = hi;
  for (int i = 0; i < bisections; ++i) {
    const double mid = 0.5 * (a + b);
    if (agrees(mid))
      a = mid;
    else
      b = mid;
  }
  est.delta_star = a;
  est.first_disagreement = b;
  return est;
}

}  // namespace skg
