#pragma once

#include <memory>

#include "skg/model.hpp"
#include "skg/types.hpp"

namespace skg {

/// Exponential sums between the position and momentum grids of a periodic box.
///
///   to_momentum(f, s)_j = sum_i exp(s i k_j x_i) f_i
///   to_position(g, s)_i = sum_j exp(s i k_j x_i) g_j
///
/// with s = -1 or +1. Momentum arrays are in ascending-k order. Backed by FFTW;
/// execution is thread-safe, plan creation is serialized internally.
class Dft {
 public:
  explicit Dft(int n);
  ~Dft();
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;

  int size() const { return n_; }
  CVec to_momentum(const CVec& f, int sign) const;
  CVec to_position(const CVec& g, int sign) const;

 private:
  struct Plans;
  int n_;
  std::unique_ptr<Plans> plans_;
};

enum class TransformDirection { ToMomentum, ToPosition };

/// Unitary transform, uhat(k) = (2 pi)^{-1/2} int e^{-ikx} u(x) dx, discretized so that
/// dx sum |u|^2 = dk sum |uhat|^2.
CVec transform(const Grid& grid, const CVec& field, TransformDirection direction);

/// rho~(k) = int e^{ikx} rho(x) dx on the grid. This is the density transform that enters
/// the coupling; it equals sqrt(2 pi) conj(rhohat(k)) for real rho.
CVec density_transform(const Grid& grid, const RVec& rho);

}  // namespace skg
