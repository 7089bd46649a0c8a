#include "skg/fock.hpp"

#include <algorithm>
#include <sstream>

#include "skg/rng.hpp"

namespace skg {

namespace {
void enumerate(int mode, int remaining, int min_total, Occupation& cur,
               std::vector<Occupation>& out) {
  const int modes = static_cast<int>(cur.size());
  if (mode == modes) {
    int total = 0;
    for (int c : cur) total += c;
    if (total >= min_total) out.push_back(cur);
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    cur[mode] = c;
    enumerate(mode + 1, remaining - c, min_total, cur, out);
  }
  cur[mode] = 0;
}
}  // namespace

OccupationBasis::OccupationBasis(int modes, int min_total, int max_total) : modes_(modes) {
  if (modes < 0 || min_total < 0 || max_total < min_total)
    throw ConfigError({"occupation basis needs modes >= 0 and 0 <= min_total <= max_total"});
  Occupation cur(modes, 0);
  enumerate(0, max_total, min_total, cur, states_);
  for (int i = 0; i < size(); ++i) index_.emplace(states_[i], i);
}

int OccupationBasis::index_of(const Occupation& occ) const {
  const auto it = index_.find(occ);
  return it == index_.end() ? -1 : it->second;
}

long count_occupations(int modes, int n) {
  // C(n + modes - 1, modes - 1)
  if (modes == 0) return n == 0 ? 1 : 0;
  long r = 1;
  for (int i = 1; i < modes; ++i) r = r * (n + i) / i;
  return r;
}

std::vector<std::string> FockSpec::violations() const {
  std::vector<std::string> v;
  if (nucleon_modes < 1) v.push_back("nucleon_modes must be >= 1");
  if (meson_modes < 0) v.push_back("meson_modes must be >= 0");
  if (nucleon_cap < 0) v.push_back("nucleon_cap must be >= 0");
  if (nucleon_sector && *nucleon_sector < 0) v.push_back("nucleon sector must be >= 0");
  if (meson_cap < 0) v.push_back("meson_cap must be >= 0");
  if (!(hbar > 0.0 && hbar <= 1.0)) v.push_back("hbar must lie in (0, 1]");
  return v;
}

namespace {
const FockSpec& checked(const FockSpec& spec) {
  auto v = spec.violations();
  if (!v.empty()) throw ConfigError(v);
  long nuc = 0;
  if (spec.nucleon_sector) {
    nuc = count_occupations(spec.nucleon_modes, *spec.nucleon_sector);
  } else {
    for (int n = 0; n <= spec.nucleon_cap; ++n) nuc += count_occupations(spec.nucleon_modes, n);
  }
  long mes = 0;
  for (int n = 0; n <= spec.meson_cap; ++n) mes += count_occupations(spec.meson_modes, n);
  if (nuc * mes > FockBasis::kMaxDimension) {
    std::ostringstream os;
    os << "Fock dimension " << nuc << " x " << mes << " exceeds " << FockBasis::kMaxDimension
       << "; lower the caps, fix a nucleon sector or retain fewer modes";
    throw ConfigError({os.str()});
  }
  return spec;
}
}  // namespace

FockBasis::FockBasis(const FockSpec& spec)
    : spec_(checked(spec)),
      nucleons_(spec.nucleon_modes, spec.nucleon_sector.value_or(0),
                spec.nucleon_sector.value_or(spec.nucleon_cap)),
      mesons_(spec.meson_modes, 0, spec.meson_cap) {}

SparseOperator::SparseOperator(Matrix m, std::uint64_t seed) : m_(std::move(m)) {
  m_.makeCompressed();
  hermitian_ = m_.rows() == m_.cols();
  if (!hermitian_ || m_.nonZeros() == 0) return;
  const cplx* values = m_.valuePtr();
  const auto* inner = m_.innerIndexPtr();
  const auto* outer = m_.outerIndexPtr();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < m_.nonZeros(); ++i) scale = std::max(scale, std::abs(values[i]));
  Rng rng = make_rng(seed, 0);
  for (int s = 0; s < 200; ++s) {
    const auto e = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m_.nonZeros()));
    const Eigen::Index row =
        std::upper_bound(outer, outer + m_.rows() + 1, static_cast<int>(e)) - outer - 1;
    const Eigen::Index col = inner[e];
    if (std::abs(values[e] - std::conj(m_.coeff(col, row))) > 1e-12 * scale) {
      hermitian_ = false;
      return;
    }
  }
}

LinearOp SparseOperator::as_linear_op() const {
  return [this](const CVec& in, CVec& out) { out = m_ * in; };
}

}  // namespace skg
