#pragma once

#include "cmps/uniform.hpp"

namespace cmps {

// Virtual density matrices l(x), r(x) on the sample grid, Hermitian by
// re-symmetrization at every step, plus the norm tr[l r] at mid-grid and its
// maximum drift over the grid.
struct VirtualDensityPair {
  std::vector<Matrix> l;
  std::vector<Matrix> r;
  double norm = 0.0;
  double norm_drift = 0.0;
};

// Fourth-order propagation of dl/dx = Tt(l) from vL vL^dag and
// dr/dx = -T(r) from vR vR^dag.
VirtualDensityPair propagate(const FiniteCMPS& state);

double state_norm(const FiniteCMPS& state, const VirtualDensityPair& vdp);

// <psi_a^dag psi_b>(x_k) on the grid; divided by the norm unless raw.
std::vector<Complex> density_profile(const FiniteCMPS& state, const VirtualDensityPair& vdp,
                                     int a, int b, bool normalized = true);

// <psi_a^dag(x) psi_b(y)> with statistics-dressed propagation between the
// insertion points; both Heaviside branches coincide at x = y.
Complex two_point(const FiniteCMPS& state, const VirtualDensityPair& vdp, int a, int b, int ix,
                  int iy, bool normalized = true);

// Pair correlation <psi_a^dag(x0) psi_a^dag(y) psi_a(y) psi_a(x0)> for grid
// points y >= x0, via the propagated pair insertion.
std::vector<Complex> pair_correlation(const FiniteCMPS& state, const VirtualDensityPair& vdp,
                                      int a, int ix0, bool normalized = true);

struct FiniteEnergy {
  double kinetic = 0.0;
  double potential = 0.0;
  double interaction = 0.0;
  double max_imag = 0.0;
};

// Energy of the generic Hamiltonian: kinetic from [Q,R] + dR/dx with central
// differences, potential as int v(x) n(x), interaction from the coincident
// delta formula or the propagated pair insertion for ranged kernels.
// v_samples may be empty (v = 0) or have one value per grid point.
FiniteEnergy energy(const FiniteCMPS& state, const VirtualDensityPair& vdp,
                    const std::vector<double>& masses, const std::vector<double>& v_samples,
                    const InteractionKernel& w, bool normalized = true);

struct BoundaryReport {
  std::vector<double> left;   // ||vL^dag R_a(-L/2)|| per species
  std::vector<double> right;  // ||R_a(+L/2) vR|| per species
};

BoundaryReport boundary_check(const FiniteCMPS& state);

}  // namespace cmps
