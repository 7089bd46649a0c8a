#include "skg/krylov.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace skg {

namespace {

struct KrylovBasis {
  std::vector<CVec> v;
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples v[j] and v[j+1]
  double next_beta = 0.0;    // residual norm after the last vector
};

void orthogonalize(const std::vector<CVec>& basis, CVec& w) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) w -= q.dot(w) * q;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tridiagonal_eigen(const KrylovBasis& b,
                                                                  int size) {
  RVec d(size), e(std::max(size - 1, 0));
  for (int i = 0; i < size; ++i) d[i] = b.alpha[i];
  for (int i = 0; i + 1 < size; ++i) e[i] = b.beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (size == 1) {
    es.compute(Eigen::MatrixXd::Constant(1, 1, d[0]));
  } else {
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  }
  return es;
}

}  // namespace

EigenPair lanczos_lowest(const LinearOp& op, const CVec& start, const LanczosOptions& options) {
  const auto n = start.size();
  EigenPair best;
  if (n == 0) return best;
  CVec x = start;
  if (!(x.norm() > 0.0)) x = CVec::Constant(n, cplx(1.0));
  x.normalize();
  CVec w(n);
  const int m_max = static_cast<int>(std::min<Eigen::Index>(options.max_basis, n));

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    KrylovBasis kb;
    kb.v.push_back(x);
    double theta = 0.0;
    RVec s;
    for (int j = 0;; ++j) {
      op(kb.v[j], w);
      ++best.iterations;
      const double a = kb.v[j].dot(w).real();
      w -= a * kb.v[j];
      if (j > 0) w -= kb.beta[j - 1] * kb.v[j - 1];
      orthogonalize(kb.v, w);
      const double b = w.norm();
      kb.alpha.push_back(a);
      const bool last = j + 1 >= m_max;
      const bool breakdown = b <= 1e-14 * std::max(1.0, std::abs(a));
      if (last || breakdown || j % 5 == 4) {
        auto es = tridiagonal_eigen(kb, j + 1);
        theta = es.eigenvalues()[0];
        s = es.eigenvectors().col(0);
        if (last || breakdown || b * std::abs(s[j]) <= 0.5 * options.tol) break;
      }
      kb.beta.push_back(b);
      kb.v.push_back(w / b);
    }
    x.setZero();
    for (Eigen::Index i = 0; i < s.size(); ++i) x += s[i] * kb.v[i];
    x.normalize();
    op(x, w);
    ++best.iterations;
    theta = x.dot(w).real();
    best.value = theta;
    best.vector = x;
    best.residual = (w - theta * x).norm();
    if (best.residual <= options.tol) {
      best.converged = true;
      return best;
    }
  }
  return best;
}

ExpvResult expv(const LinearOp& op, double t, const CVec& v, const ExpvOptions& options) {
  ExpvResult res;
  res.vector = v;
  const double beta0 = v.norm();
  if (t == 0.0 || beta0 == 0.0) return res;
  const auto n = v.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(options.basis, n));
  double done = 0.0;
  double tau = t;
  CVec w(n);
  while (std::abs(done) < std::abs(t)) {
    const double norm = res.vector.norm();
    KrylovBasis kb;
    kb.v.push_back(res.vector / norm);
    bool breakdown = false;
    for (int j = 0; j < m_max; ++j) {
      op(kb.v[j], w);
      const double a = kb.v[j].dot(w).real();
      w -= a * kb.v[j];
      if (j > 0) w -= kb.beta[j - 1] * kb.v[j - 1];
      orthogonalize(kb.v, w);
      const double b = w.norm();
      kb.alpha.push_back(a);
      if (b <= 1e-14 * std::max(1.0, std::abs(a))) {
        breakdown = true;
        break;
      }
      if (j + 1 == m_max) {
        kb.next_beta = b;
        break;
      }
      kb.beta.push_back(b);
      kb.v.push_back(w / b);
    }
    const int m = static_cast<int>(kb.alpha.size());
    auto es = tridiagonal_eigen(kb, m);
    const Eigen::MatrixXd& q = es.eigenvectors();
    const RVec& lam = es.eigenvalues();
    if (breakdown) kb.next_beta = 0.0;
    tau = std::copysign(std::min(std::abs(tau), std::abs(t - done)), t);
    CVec y(m);
    for (;;) {
      CVec c(m);
      for (int i = 0; i < m; ++i) c[i] = q(0, i) * std::polar(1.0, -tau * lam[i]);
      y = q.cast<cplx>() * c;
      const double err = norm * kb.next_beta * std::abs(y[m - 1]);
      if (err <= options.tol * std::abs(tau) / std::abs(t) * std::max(1.0, beta0)) {
        res.error_estimate += err;
        break;
      }
      tau *= 0.5;
    }
    CVec next = CVec::Zero(n);
    for (int i = 0; i < m; ++i) next += y[i] * kb.v[i];
    res.vector = norm * next;
    done += tau;
    ++res.substeps;
    tau *= 2.0;
  }
  return res;
}

CVec apply_function(const LinearOp& op, const CVec& v, const std::function<cplx(double)>& f,
                    const FunctionOptions& options) {
  const auto n = v.size();
  const double beta0 = v.norm();
  if (beta0 == 0.0) return CVec::Zero(n);
  const int m_max = static_cast<int>(std::min<Eigen::Index>(options.max_basis, n));
  KrylovBasis kb;
  kb.v.push_back(v / beta0);
  CVec w(n);
  CVec previous;
  auto estimate = [&](int m) {
    auto es = tridiagonal_eigen(kb, m);
    const Eigen::MatrixXd& q = es.eigenvectors();
    CVec c(m);
    for (int i = 0; i < m; ++i) c[i] = q(0, i) * f(es.eigenvalues()[i]);
    const CVec y = q.cast<cplx>() * c;
    CVec out = CVec::Zero(n);
    for (int i = 0; i < m; ++i) out += y[i] * kb.v[i];
    return CVec(beta0 * out);
  };
  for (int j = 0;; ++j) {
    op(kb.v[j], w);
    const double a = kb.v[j].dot(w).real();
    w -= a * kb.v[j];
    if (j > 0) w -= kb.beta[j - 1] * kb.v[j - 1];
    orthogonalize(kb.v, w);
    const double b = w.norm();
    kb.alpha.push_back(a);
    const int m = j + 1;
    if (b <= 1e-14 * std::max(1.0, std::abs(a)) || m == m_max) return estimate(m);
    if (m % 10 == 0) {
      CVec cur = estimate(m);
      if (previous.size() == n && (cur - previous).norm() <= options.tol * beta0) return cur;
      previous = std::move(cur);
    }
    kb.beta.push_back(b);
    kb.v.push_back(w / b);
  }
}

}  // namespace skg
