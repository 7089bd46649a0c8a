#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "skg/krylov.hpp"
#include "skg/types.hpp"

namespace skg {

using Occupation = std::vector<int>;

/// Occupation tuples of `modes` bosonic modes with min_total <= sum <= max_total, in
/// lexicographic order.
class OccupationBasis {
 public:
  OccupationBasis(int modes, int min_total, int max_total);

  int modes() const { return modes_; }
  int size() const { return static_cast<int>(states_.size()); }
  const Occupation& operator[](int i) const { return states_[i]; }
  /// -1 when the tuple is outside the basis.
  int index_of(const Occupation& occ) const;

 private:
  int modes_;
  std::vector<Occupation> states_;
  std::map<Occupation, int> index_;
};

struct FockSpec {
  int nucleon_modes = 4;
  int meson_modes = 3;
  /// Total nucleon number cap; ignored when a sector is fixed.
  int nucleon_cap = 4;
  std::optional<int> nucleon_sector;
  int meson_cap = 4;
  double hbar = 1.0;

  std::vector<std::string> violations() const;
};

/// Product basis: index = nucleon_index * meson_size + meson_index.
class FockBasis {
 public:
  static constexpr long kMaxDimension = 5'000'000;

  explicit FockBasis(const FockSpec& spec);

  const FockSpec& spec() const { return spec_; }
  const OccupationBasis& nucleons() const { return nucleons_; }
  const OccupationBasis& mesons() const { return mesons_; }
  int dimension() const { return nucleons_.size() * mesons_.size(); }
  int index(int nucleon, int meson) const { return nucleon * mesons_.size() + meson; }

 private:
  FockSpec spec_;
  OccupationBasis nucleons_;
  OccupationBasis mesons_;
};

/// Number of occupation tuples of `modes` modes with total exactly n.
long count_occupations(int modes, int n);

class SparseOperator {
 public:
  using Matrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

  /// The hermiticity flag comes from 200 sampled entries compared with their mirrors.
  explicit SparseOperator(Matrix m, std::uint64_t seed = 11);

  int dimension() const { return static_cast<int>(m_.rows()); }
  bool hermitian() const { return hermitian_; }
  const Matrix& matrix() const { return m_; }
  long nonzeros() const { return static_cast<long>(m_.nonZeros()); }
  CVec apply(const CVec& v) const { return m_ * v; }
  LinearOp as_linear_op() const;
  cplx expectation(const CVec& v) const { return v.dot(m_ * v); }

 private:
  Matrix m_;
  bool hermitian_ = false;
};

}  // namespace skg
