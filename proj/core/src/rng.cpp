#include "skg/rng.hpp"

#include <cmath>

namespace skg {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

double uniform_open(Rng& rng) {
  // 53 random bits mapped to (0, 1)
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

CVec random_complex(Rng& rng, int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) {
    const double r = std::sqrt(-std::log(uniform_open(rng)));
    const double phase = 2.0 * kPi * uniform_open(rng);
    v[i] = std::polar(r, phase);
  }
  return v;
}

}  // namespace skg
