#pragma once

#include <cstdint>
#include <random>

#include "skg/types.hpp"

namespace skg {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream); the same pair always gives the same draws.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform on (0, 1), identical across standard libraries.
double uniform_open(Rng& rng);

/// i.i.d. standard complex Gaussian entries (E|c|^2 = 1).
CVec random_complex(Rng& rng, int n);

}  // namespace skg
