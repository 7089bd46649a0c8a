#include "skg/fourier.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "fftw_mutex.hpp"

namespace skg {

namespace detail {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

struct Dft::Plans {
  fftw_plan forward = nullptr;   // exponent -1
  fftw_plan backward = nullptr;  // exponent +1
};

Dft::Dft(int n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 2 || n % 4 != 0) throw Error("Dft: size must be a multiple of 4");
  std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
  fftw_complex* a = fftw_alloc_complex(n);
  fftw_complex* b = fftw_alloc_complex(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward = fftw_plan_dft_1d(n, a, b, FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_dft_1d(n, a, b, FFTW_BACKWARD, flags);
  fftw_free(a);
  fftw_free(b);
  if (!plans_->forward || !plans_->backward) throw Error("Dft: FFTW planning failed");
}

Dft::~Dft() {
  std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

namespace {
fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
}  // namespace

// exp(s i k_j x_i) = (-1)^j exp(s 2 pi i j i / N) since k_j L = pi j; N/2 is even so
// (-1)^j = (-1)^jj for the ascending index jj = j + N/2.
CVec Dft::to_momentum(const CVec& f, int sign) const {
  if (f.size() != n_) throw Error("Dft: size mismatch");
  CVec in = f;
  CVec y(n_);
  fftw_execute_dft(sign < 0 ? plans_->forward : plans_->backward, as_fftw(in.data()),
                   as_fftw(y.data()));
  CVec out(n_);
  const int h = n_ / 2;
  for (int jj = 0; jj < n_; ++jj) {
    const int m = (jj + h) % n_;
    out[jj] = (jj & 1) ? -y[m] : y[m];
  }
  return out;
}

CVec Dft::to_position(const CVec& g, int sign) const {
  if (g.size() != n_) throw Error("Dft: size mismatch");
  CVec h(n_);
  const int half = n_ / 2;
  for (int jj = 0; jj < n_; ++jj) {
    const int m = (jj + half) % n_;
    h[m] = (jj & 1) ? -g[jj] : g[jj];
  }
  CVec out(n_);
  fftw_execute_dft(sign < 0 ? plans_->forward : plans_->backward, as_fftw(h.data()),
                   as_fftw(out.data()));
  return out;
}

CVec transform(const Grid& grid, const CVec& field, TransformDirection direction) {
  if (field.size() != grid.n) throw Error("transform: size mismatch");
  const double s = 1.0 / std::sqrt(2.0 * kPi);
  if (direction == TransformDirection::ToMomentum)
    return (grid.dx * s) * grid.dft->to_momentum(field, -1);
  return (grid.dk * s) * grid.dft->to_position(field, +1);
}

CVec density_transform(const Grid& grid, const RVec& rho) {
  if (rho.size() != grid.n) throw Error("density_transform: size mismatch");
  return grid.dx * grid.dft->to_momentum(rho.cast<cplx>(), +1);
}

}  // namespace skg
