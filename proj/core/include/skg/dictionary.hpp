#pragma once

#include <string>
#include <vector>

#include "skg/model.hpp"

namespace skg {

/// One test function xi on the k-grid, supported in the annulus r_in <= |k| <= r_out.
struct TestFunction {
  std::string label;
  CVec values;
  double r_in = 0.0;
  double r_out = 0.0;
  double center = 0.0;
  double width = 0.0;
  int parity = 0;  // 0 even, 1 odd in k
};

struct TestDictionary {
  std::vector<TestFunction> functions;
  double r_in = 0.0;
  double r_out = 0.0;

  std::size_t size() const { return functions.size(); }
  const TestFunction& operator[](std::size_t i) const { return functions[i]; }
  Eigen::MatrixXcd gram(const Grid& grid) const;
  /// Numerical rank of the Gram matrix, eigenvalues below rel_tol * max dropped.
  int rank(const Grid& grid, double rel_tol = 1e-10) const;
};

struct DictionaryOptions {
  /// Gaussian width w of each profile in |k|; 0 picks min(0.07, (r_out - r_in) / 20).
  double width = 0.0;
};

/// Translates of one bump profile: exp(-(|k| - c)^2 / (2 w^2)) times a C-infinity
/// flat-top window supported on |k - c| <= 9w with transitions of width w. Parity
/// alternates even, odd in k. Centers are spread over [r_in + 9w, r_out - 9w] and every
/// function is L2-normalized on the grid.
TestDictionary make_test_dictionary(const Grid& grid, double r_in, double r_out, int count,
                                    const DictionaryOptions& options = {});

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
double smooth_step(double t);

/// exp(-i t omega) xi, the free evolution of a test function.
CVec free_evolve(const Grid& grid, const CVec& xi, double t);

}  // namespace skg
