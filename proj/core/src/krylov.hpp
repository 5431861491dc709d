#pragma once

// Internal matrix-free Krylov machinery: leading-eigenvalue Arnoldi with
// restarts, BiCGSTAB, and a scaled Taylor exp(tA)v. Not installed.

#include <functional>
#include <random>

#include "cmps/options.hpp"
#include "cmps/types.hpp"

namespace cmps::detail {

struct LinearOp {
  int n = 0;
  std::function<Vector(const Vector&)> apply;
};

struct ArnoldiResult {
  Complex lambda{0, 0};
  Vector v;
  double residual = 0.0;
  Complex lambda2{0, 0};  // subdominant Ritz value by real part (diagnostic)
  bool have_lambda2 = false;
};

// Leading eigenvalue by real part. The operator is applied with a positive
// spectral shift so that the max-Re eigenvalue dominates the Krylov process;
// restarted with the best Ritz vector until the unshifted residual passes.
inline ArnoldiResult arnoldi_leading_re(const LinearOp& op, double shift, const EvalOptions& opts) {
  const int n = op.n;
  ArnoldiResult out;
  if (n == 1) {
    Vector e = Vector::Ones(1);
    out.lambda = op.apply(e)(0);
    out.v = e;
    out.residual = 0.0;
    return out;
  }
  const int m = std::min(n, 30);
  std::mt19937_64 rng(0x5eedbeefULL);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v0(n);
  for (int i = 0; i < n; ++i) v0(i) = Complex(dist(rng), dist(rng));
  v0.normalize();

  int matvecs = 0;
  while (matvecs < opts.max_iterations) {
    std::vector<Vector> basis;
    basis.reserve(m + 1);
    basis.push_back(v0);
    Matrix h = Matrix::Zero(m + 1, m);
    int steps = 0;
    for (int j = 0; j < m; ++j) {
      Vector w = op.apply(basis[j]) + shift * basis[j];
      ++matvecs;
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt, one reorthogonalization pass
        const Complex c = basis[i].dot(w);
        h(i, j) += c;
        w -= c * basis[i];
      }
      for (int i = 0; i <= j; ++i) {
        const Complex c = basis[i].dot(w);
        h(i, j) += c;
        w -= c * basis[i];
      }
      const double nw = w.norm();
      h(j + 1, j) = nw;
      steps = j + 1;
      if (nw < 1e-14) break;  // invariant subspace found
      basis.push_back(w / nw);
      if (j + 1 == m) break;
    }

    Eigen::ComplexEigenSolver<Matrix> es(h.topLeftCorner(steps, steps));
    int best = 0;
    for (int i = 1; i < steps; ++i)
      if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
    const Complex theta = es.eigenvalues()(best);

    Vector y = es.eigenvectors().col(best);
    Vector ritz = Vector::Zero(n);
    for (int i = 0; i < steps; ++i) ritz += y(i) * basis[i];
    ritz.normalize();

    const Vector Av = op.apply(ritz);
    ++matvecs;
    const Complex lambda = theta - shift;
    const double res = (Av - lambda * ritz).norm();

    out.lambda = lambda;
    out.v = ritz;
    out.residual = res;
    out.have_lambda2 = steps > 1;
    if (out.have_lambda2) {
      Complex second(-std::numeric_limits<double>::infinity(), 0);
      for (int i = 0; i < steps; ++i) {
        if (i == best) continue;
        if (es.eigenvalues()(i).real() > second.real()) second = es.eigenvalues()(i);
      }
      out.lambda2 = second - shift;
    }
    if (res <= opts.eig_tol * std::max(1.0, std::abs(lambda) + shift)) return out;
    v0 = ritz;
  }
  raise(errc::solve_failed, "Arnoldi eigensolver did not converge within iteration budget");
}

inline Vector bicgstab(const LinearOp& op, const Vector& b, double tol, int max_iter) {
  const double bnorm = std::max(b.norm(), 1e-300);
  Vector x = Vector::Zero(op.n);
  Vector r = b;
  Vector rhat = r;
  Complex rho(1, 0), alpha(1, 0), omega(1, 0);
  Vector v = Vector::Zero(op.n), p = Vector::Zero(op.n);
  for (int it = 0; it < max_iter; ++it) {
    const Complex rho_new = rhat.dot(r);
    if (std::abs(rho_new) < 1e-300) break;
    if (it == 0) {
      p = r;
    } else {
      const Complex beta = (rho_new / rho) * (alpha / omega);
      p = r + beta * (p - omega * v);
    }
    rho = rho_new;
    v = op.apply(p);
    const Complex rv = rhat.dot(v);
    if (std::abs(rv) < 1e-300) break;
    alpha = rho / rv;
    Vector s = r - alpha * v;
    if (s.norm() <= tol * bnorm) {
      x += alpha * p;
      return x;
    }
    const Vector t = op.apply(s);
    const double tn2 = t.squaredNorm();
    if (tn2 < 1e-300) break;
    omega = t.dot(s) / tn2;
    x += alpha * p + omega * s;
    r = s - omega * t;
    if (r.norm() <= tol * bnorm) return x;
    if (std::abs(omega) < 1e-300) break;
  }
  raise(errc::solve_failed, "BiCGSTAB did not converge");
}

// exp(t A) v by scaling + truncated Taylor; norm_bound is any upper bound on
// the spectral radius of A used to pick the substep count.
inline Vector expmv(const LinearOp& op, double norm_bound, double t, Vector v) {
  if (t == 0.0) return v;
  const int substeps = std::max(1, static_cast<int>(std::ceil(std::abs(t) * norm_bound)));
  const double h = t / substeps;
  for (int s = 0; s < substeps; ++s) {
    Vector term = v;
    Vector acc = v;
    const double vnorm = std::max(v.norm(), 1e-300);
    for (int k = 1; k <= 64; ++k) {
      term = (h / k) * op.apply(term);
      acc += term;
      if (term.norm() <= 1e-17 * vnorm) break;
    }
    v = acc;
  }
  return v;
}

}  // namespace cmps::detail
