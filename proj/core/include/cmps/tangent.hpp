#pragma once

#include <optional>

#include "cmps/finite.hpp"

namespace cmps {

// Variation data (V, {W_a}) on the grid plus the boundary-vector variation.
struct TangentFinite {
  std::vector<Matrix> V;
  std::vector<std::vector<Matrix>> W;  // [species][sample]
  Vector wR;
};

// Fourier-mode variation (V, {W_a}) e^{ipx} at momentum p.
struct TangentUniform {
  Matrix V;
  std::vector<Matrix> W;
  double p = 0.0;
};

// Null direction generated by h(x): V = [Q,h] + dh/dx, W_a = [R_a,h],
// wR = -h(+L/2) vR. h must vanish at -L/2 (vL is fixed). dh defaults to
// central differences of the samples.
TangentFinite gauge_direction_finite(const FiniteCMPS& base, const std::vector<Matrix>& h,
                                     const std::optional<std::vector<Matrix>>& dh = std::nullopt);

// Overlap <Phi[t1]|Phi[t2]>: boundary term, local term and the two ordered
// double-integral terms, the latter via propagated accumulator fields.
Complex overlap_finite(const FiniteCMPS& base, const VirtualDensityPair& vdp,
                       const TangentFinite& t1, const TangentFinite& t2);

// <Psi|Phi[t]> = vR^dag l(L/2) wR + int (l|V (x) 1 + sum W (x) conj(R)|r).
Complex base_overlap_finite(const FiniteCMPS& base, const VirtualDensityPair& vdp,
                            const TangentFinite& t);

// Gauge-equivalent tangent satisfying the left gauge-fixing condition
// (l(x)|[V (x) 1 + sum W (x) conj(R)] = 0 pointwise; h is recovered from the
// propagated condition and the physical vector is unchanged.
TangentFinite left_gauge_fix_finite(const FiniteCMPS& base, const VirtualDensityPair& vdp,
                                    const TangentFinite& t);

// V = [Q,h] + iph, W_a = [R_a,h].
TangentUniform gauge_direction_uniform(const UniformCMPS& base, const Matrix& h, double p);

struct UniformOverlap {
  Complex delta_coefficient{0, 0};  // coefficient of 2 pi delta(p - p')
  Complex p0_extra{0, 0};           // coefficient of (2 pi)^2 delta(p) delta(p'), p = 0 only
};

// Overlap of two momentum-sector tangents; distribution factors are stripped
// and a momentum mismatch returns exact zero by convention.
UniformOverlap overlap_uniform(const UniformCMPS& base, const FixedPointPair& fp,
                               const TangentUniform& t1, const TangentUniform& t2,
                               const EvalOptions& opts = {});

// Coefficient of 2 pi delta(p) in <Psi|Phi_p[t]>.
Complex base_overlap_uniform(const UniformCMPS& base, const FixedPointPair& fp,
                             const TangentUniform& t);

// Solves the D^2 linear system for the generator h so the left gauge-fixing
// condition (l|[V (x) 1 + sum W (x) conj(R)] = 0 holds; at p = 0 the tangent
// is first orthogonalized against the base state and the one-dimensional
// kernel is deflated.
TangentUniform left_gauge_fix_uniform(const UniformCMPS& base, const FixedPointPair& fp,
                                      const TangentUniform& t, const EvalOptions& opts = {});

}  // namespace cmps
