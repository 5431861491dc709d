#pragma once

#include "cmps/options.hpp"
#include "cmps/uniform.hpp"

namespace cmps {

// Position-dependent invertible gauge, one sample per grid point.
struct GaugeFunction {
  std::vector<Matrix> samples;
};

// Global similarity transform Qt = g^-1 Q g, Rt = g^-1 R g. All derived
// observables are unchanged.
UniformCMPS gauge_uniform(const UniformCMPS& state, const Matrix& g);

// Local transform Qt = g^-1 Q g + g^-1 dg/dx (dg/dx by central differences),
// Rt = g^-1 R g, with the exact boundary transform vRt = g(+L/2)^-1 vR and
// vLt = g(-L/2)^dag vL, so the physical state is preserved.
FiniteCMPS gauge_finite(const FiniteCMPS& state, const GaugeFunction& g);

struct CanonicalForm {
  UniformCMPS state;        // equals gauge_uniform(input, g)
  Matrix g;
  Eigen::VectorXd spectrum;  // diagonal of the diagonalized fixed point, nonincreasing
};

// Left-canonical form of a normalized injective state: the left fixed point
// becomes the identity and the right fixed point diagonal nonincreasing.
CanonicalForm left_canonicalize_uniform(const UniformCMPS& state, const FixedPointPair& fp,
                                        const EvalOptions& opts = {});
// Mirror image: right fixed point identity, left diagonal.
CanonicalForm right_canonicalize_uniform(const UniformCMPS& state, const FixedPointPair& fp,
                                         const EvalOptions& opts = {});

// Integrates rho(x) = (g^-1)^dag g^-1 along d rho/dx = Tt(rho) from the
// regularized boundary value vL vL^dag + eps, extracting g(x) = rho(x)^{-1/2}.
// g(x) settles once rho gains rank away from the boundary layer.
std::pair<FiniteCMPS, GaugeFunction> left_orthonormalize_finite(const FiniteCMPS& state);

// Gauge with Qt = 0: g(x) = Pexp[int_x^{L/2} Q] g0 built from stepwise
// exponentials, R transformed pointwise, vR rescaled accordingly.
std::pair<FiniteCMPS, GaugeFunction> eliminate_Q_gauge(const FiniteCMPS& state);

}  // namespace cmps
