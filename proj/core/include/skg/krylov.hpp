#pragma once

#include <functional>

#include "skg/types.hpp"

namespace skg {

/// out = A in for a Hermitian A.
using LinearOp = std::function<void(const CVec& in, CVec& out)>;

struct LanczosOptions {
  /// Stop when |A v - theta v| <= tol for the unit Ritz vector v.
  double tol = 1e-11;
  int max_basis = 200;
  int max_restarts = 100;
};

struct EigenPair {
  double value = 0.0;
  CVec vector;  // unit norm
  double residual = 0.0;
  int iterations = 0;  // operator applications
  bool converged = false;
};

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
EigenPair lanczos_lowest(const LinearOp& op, const CVec& start,
                         const LanczosOptions& options = {});

struct ExpvOptions {
  double tol = 1e-12;
  int basis = 30;
};

struct ExpvResult {
  CVec vector;
  double error_estimate = 0.0;
  int substeps = 0;
};

/// exp(-i t A) v by Lanczos with adaptive substeps.
ExpvResult expv(const LinearOp& op, double t, const CVec& v, const ExpvOptions& options = {});

struct FunctionOptions {
  double tol = 1e-12;
  int max_basis = 300;
};

/// f(A) v from one Lanczos basis, grown until successive estimates agree to tol |v|.
CVec apply_function(const LinearOp& op, const CVec& v, const std::function<cplx(double)>& f,
                    const FunctionOptions& options = {});

}  // namespace skg
