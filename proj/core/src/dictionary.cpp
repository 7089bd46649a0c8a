#include "skg/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Eigenvalues>

namespace skg {

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

Eigen::MatrixXcd TestDictionary::gram(const Grid& grid) const {
  const auto n = static_cast<Eigen::Index>(functions.size());
  Eigen::MatrixXcd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      g(a, b) = grid.inner_k(functions[a].values, functions[b].values);
  return g;
}

int TestDictionary::rank(const Grid& grid, double rel_tol) const {
  if (functions.empty()) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram(grid));
  const RVec& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  return static_cast<int>(std::count_if(ev.begin(), ev.end(),
                                        [&](double e) { return e > rel_tol * top; }));
}

TestDictionary make_test_dictionary(const Grid& grid, double r_in, double r_out, int count,
                                    const DictionaryOptions& options) {
  std::vector<std::string> bad;
  if (!(r_in > 0.0)) bad.push_back("dictionary r_in must be > 0");
  if (!(r_out > r_in)) bad.push_back("dictionary r_out must exceed r_in");
  if (count < 1) bad.push_back("dictionary count must be >= 1");
  if (!bad.empty()) throw ConfigError(bad);

  const double span = r_out - r_in;
  const double w = options.width > 0.0 ? options.width : std::min(0.07, span / 20.0);
  const double reach = 9.0 * w;
  if (2.0 * reach > span)
    throw ConfigError({"dictionary annulus too narrow for profile width " + std::to_string(w)});
  const double lo = r_in + reach;
  const double hi = r_out - reach;

  TestDictionary dict;
  dict.r_in = r_in;
  dict.r_out = r_out;
  for (int i = 0; i < count; ++i) {
    TestFunction f;
    f.r_in = r_in;
    f.r_out = r_out;
    f.width = w;
    f.center = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1.0);
    f.parity = i % 2;
    f.values = CVec::Zero(grid.n);
    for (int j = 0; j < grid.n; ++j) {
      const double r = std::abs(grid.k[j]);
      const double d = r - f.center;
      if (std::abs(d) >= reach || r <= r_in) continue;
      const double window = smooth_step((d + reach) / w) * smooth_step((reach - d) / w);
      double v = window * std::exp(-0.5 * d * d / (w * w));
      if (f.parity == 1 && grid.k[j] < 0.0) v = -v;
      f.values[j] = v;
    }
    const double nrm = grid.norm_k(f.values);
    if (!(nrm > 0.0)) throw ConfigError({"dictionary annulus contains no grid nodes"});
    f.values /= nrm;
    char buf[64];
    std::snprintf(buf, sizeof buf, "xi%d_c%.3f_%s", i, f.center, f.parity ? "odd" : "even");
    f.label = buf;
    dict.functions.push_back(std::move(f));
  }
  return dict;
}

CVec free_evolve(const Grid& grid, const CVec& xi, double t) {
  CVec out(xi.size());
  for (int j = 0; j < grid.n; ++j) out[j] = xi[j] * std::polar(1.0, -t * grid.omega[j]);
  return out;
}

}  // namespace skg
