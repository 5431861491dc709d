#pragma once

#include <optional>

#include "cmps/options.hpp"
#include "cmps/regularity.hpp"
#include "cmps/transfer.hpp"

namespace cmps {

enum class FixedPointMethod { dense, iterative };

// Leading spectral data of the plain transfer operator after the
// normalization shift: T(r) = 0 and Tt(l) = 0 with l, r Hermitian PSD,
// tr r = 1 and tr[l r] = 1.
struct FixedPointPair {
  double mu = 0.0;   // shift already applied to the owning state
  Matrix l, r;
  double gap = 0.0;  // -max Re of the subdominant spectrum; +inf for D = 1
  FixedPointMethod method = FixedPointMethod::dense;
  double residual_l = 0.0;   // ||Tt(l)||_F after the shift
  double residual_r = 0.0;   // ||T(r)||_F after the shift
  double min_eig_l = 0.0;
  double min_eig_r = 0.0;
};

// Shifts Q by -mu/2 so the leading transfer eigenvalue becomes zero and
// computes the Hermitian PSD fixed points. Dense eigendecomposition for
// D <= opts.dense_budget, restarted Arnoldi above. Degenerate leading
// eigenvalue (gap below opts.gap_tol) raises NonInjective.
std::pair<UniformCMPS, FixedPointPair> normalize(const UniformCMPS& state,
                                                 const EvalOptions& opts = {});

double transfer_norm_estimate(const UniformCMPS& state);

// tr[l R_b r R_a^dag]; real nonnegative for a == b.
Complex density(const UniformCMPS& state, const FixedPointPair& fp, int a, int b);

struct InteractionKernel {
  enum class Kind { delta, exponential, tabulated };
  Kind kind = Kind::delta;
  double c = 0.0;    // coupling strength
  double ell = 1.0;  // exponential range
  std::vector<double> z;  // tabulated abscissae (z >= 0, ascending)
  std::vector<double> w;  // tabulated kernel values

  static InteractionKernel delta(double c) { return {Kind::delta, c, 1.0, {}, {}}; }
  static InteractionKernel exponential(double c, double ell) {
    return {Kind::exponential, c, ell, {}, {}};
  }
  static InteractionKernel tabulated(std::vector<double> z, std::vector<double> w) {
    return {Kind::tabulated, 0.0, 1.0, std::move(z), std::move(w)};
  }
};

struct EnergyDensities {
  double kinetic = 0.0;
  double potential = 0.0;
  double interaction = 0.0;
  double max_imag = 0.0;  // largest imaginary part discarded
};

// Kinetic, potential and interaction energy densities for the translation
// invariant Hamiltonian with constant potential v and two-body kernel w.
// Interaction kernels couple equal species; the delta kernel is normalized so
// that interaction = c * sum_a tr[l R_a^2 r (R_a^2)^dag].
EnergyDensities energy_densities(const UniformCMPS& state, const FixedPointPair& fp,
                                 const std::vector<double>& masses, double v,
                                 const InteractionKernel& w, const EvalOptions& opts = {});

struct CorrelationSeries {
  std::vector<double> x;
  std::vector<Complex> values;
  Complex long_range{0, 0};
};

// Two-point function (l|[R_b (x) 1] e^{T_a x} [1 (x) conj(R_a)]|r) on the
// given nonnegative separations; the x -> infinity limit is reported
// separately from the parity-dressed fixed points.
CorrelationSeries correlation(const UniformCMPS& state, const FixedPointPair& fp, int a, int b,
                              const std::vector<double>& xs,
                              const std::optional<ParityStructure>& parity = std::nullopt,
                              const EvalOptions& opts = {});

struct MomentumOccupation {
  double condensate_weight = 0.0;  // coefficient of 2 pi delta(p)
  std::vector<double> p;
  std::vector<Complex> values;
};

// Smooth part of the momentum occupation via deflated resolvent solves
// (-T_a +- i p)^P; the delta-weight is returned separately and never mixed
// into the samples.
MomentumOccupation momentum_occupation(const UniformCMPS& state, const FixedPointPair& fp, int a,
                                       int b, const std::vector<double>& ps,
                                       const std::optional<ParityStructure>& parity = std::nullopt,
                                       const EvalOptions& opts = {});

// Fourth root of |(l|[1 (x) conj(R_a)] T_a^3 [R_b (x) 1]|r) + (l|[R_b (x) 1]
// T_a^3 [1 (x) conj(R_a)]|r)|; for a == b the signed value is used and
// asserted nonnegative.
double uv_cutoff(const UniformCMPS& state, const FixedPointPair& fp, int a, int b,
                 const std::optional<ParityStructure>& parity = std::nullopt,
                 const EvalOptions& opts = {});

// 1/|Re lambda_1| of the plain transfer operator; absent for D = 1.
std::optional<double> correlation_length(const UniformCMPS& state, const FixedPointPair& fp,
                                         const EvalOptions& opts = {});

struct MatchResult {
  Complex lambda{0, 0};
  bool equivalent = false;
  std::optional<Matrix> g;        // Q2 = g Q1 g^-1 + i phi, R2 = g R1 g^-1
  std::optional<double> phi;
  double residual = 0.0;          // relative verification residual of the recovery
};

// Fidelity per unit length between two normalized states via the mixed
// transfer operator; on equivalence the relating gauge is recovered as
// g = F r^-1 from the leading eigenvector F.
MatchResult match_states(const UniformCMPS& s1, const FixedPointPair& fp1, const UniformCMPS& s2,
                         const EvalOptions& opts = {});

}  // namespace cmps
