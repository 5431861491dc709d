#pragma once

// Internal helpers wrapping a (possibly sign-dressed) transfer superoperator
// with an optional dense realization and rank-one-deflated resolvent solves.
// Not installed.

#include <optional>

#include "cmps/options.hpp"
#include "cmps/transfer.hpp"
#include "krylov.hpp"

namespace cmps::detail {

// Crude upper bound for the spectral radius of the transfer superoperator.
inline double transfer_norm_bound(const UniformCMPS& s) {
  double b = 2.0 * s.Q.norm();
  for (const auto& r : s.R) b += r.norm() * r.norm();
  return std::max(b, 1e-30);
}

struct SuperOp {
  const UniformCMPS* state = nullptr;
  std::vector<double> signs;
  std::optional<Matrix> dense;
  int D = 0;
  int n = 0;
  double norm_bound = 0.0;

  Matrix applyMat(const Matrix& f) const {
    return transfer_apply(state->Q, state->R, signs, f, Side::right);
  }
  Matrix applyMatLeft(const Matrix& f) const {
    return transfer_apply(state->Q, state->R, signs, f, Side::left);
  }
  Vector apply(const Vector& x) const { return vec(applyMat(unvec(x, D))); }

  LinearOp asOp() const {
    return {n, [this](const Vector& x) { return apply(x); }};
  }
};

inline SuperOp make_superop(const UniformCMPS& state, const TransferDressing& dressing,
                            const EvalOptions& opts) {
  SuperOp op;
  op.state = &state;
  op.signs = dressing_signs(state.species, dressing);
  op.D = state.dim();
  op.n = op.D * op.D;
  op.norm_bound = transfer_norm_bound(state);
  if (op.D <= opts.dense_budget)
    op.dense = dense_transfer(state, dressing, std::max(opts.dense_budget, opts.dense_assembly_max));
  return op;
}

// Rank-one spectral deflation S = |r0)(l0| / (l0|r0), with the dual vector
// stored so that (l0|x) = w0^H x.
struct Deflation {
  Vector r0;
  Vector w0;
  Complex norm{1, 0};

  Complex bra(const Vector& x) const { return w0.dot(x) / norm; }
  Vector project(const Vector& x) const { return x - r0 * bra(x); }
};

inline Deflation make_deflation(const Matrix& r0, const Matrix& l0) {
  Deflation d;
  d.r0 = vec(r0);
  d.w0 = vec(l0.adjoint());  // tr[l0 f] = vec(l0^dag)^H vec(f)
  d.norm = d.w0.dot(d.r0);
  require(std::abs(d.norm) > 1e-14, errc::bad_fixed_point,
          "deflation pairing (l|r) is numerically zero");
  return d;
}

// Solves (zeta I - T) x = P b on the complement of the deflated sector,
// returning P x (P the spectral projector complement). Realized as the
// nonsingular rank-one-shifted system (zeta I - T + S) x = P b.
inline Vector deflated_solve(const SuperOp& op, const Deflation& defl, Complex zeta,
                             const Vector& b, const EvalOptions& opts) {
  const Vector pb = defl.project(b);
  Vector x;
  if (op.dense) {
    Matrix m = -*op.dense;
    m.diagonal().array() += zeta;
    m.noalias() += (defl.r0 / defl.norm) * defl.w0.adjoint();
    x = m.partialPivLu().solve(pb);
  } else {
    LinearOp lin{op.n, [&](const Vector& v) -> Vector {
                   return zeta * v - op.apply(v) + defl.r0 * defl.bra(v);
                 }};
    x = bicgstab(lin, pb, opts.solve_tol, opts.max_iterations);
  }
  return defl.project(x);
}

// Solves (zeta I - T) x = b without deflation (zeta off the spectrum).
inline Vector shifted_solve(const SuperOp& op, Complex zeta, const Vector& b,
                            const EvalOptions& opts) {
  if (op.dense) {
    Matrix m = -*op.dense;
    m.diagonal().array() += zeta;
    return m.partialPivLu().solve(b);
  }
  LinearOp lin{op.n, [&](const Vector& v) -> Vector { return zeta * v - op.apply(v); }};
  return bicgstab(lin, b, opts.solve_tol, opts.max_iterations);
}

}  // namespace cmps::detail
