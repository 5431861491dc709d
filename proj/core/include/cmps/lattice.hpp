#pragma once

#include "cmps/types.hpp"

namespace cmps {

// MPS discretization of a cMPS at spacing a: A^0 = 1 + aQ, A^a = sqrt(a) R_a,
// and for nmax = 2 the symmetrized two-particle tensors. Occupation labels
// enumerate {vacuum} u {a} u {(a,b), a <= b} with fermionic double occupation
// excluded.
struct LatticeMPS {
  double a = 0.0;
  int nmax = 1;
  bool uniform = true;
  SpeciesTable species;
  Vector vL, vR;  // finite chains only

  struct SiteBasis {
    struct Label {
      int na = -1, nb = -1;  // occupied species; single uses na only
      int particles = 0;
      double gram = 1.0;  // <s|s> of the unnormalized occupancy ket
    };
    std::vector<Label> labels;
  };
  SiteBasis basis;

  // tensors[site][label]; a single entry for uniform states
  std::vector<std::vector<Matrix>> tensors;

  int sites() const { return static_cast<int>(tensors.size()); }
};

LatticeMPS discretize(const UniformCMPS& state, double a, int nmax);
// the spacing must land on grid points (an integer multiple of dx)
LatticeMPS discretize(const FiniteCMPS& state, double a, int nmax);

// || E - 1 - a T ||_F with E the nmax = 2 single-site transfer operator;
// scales as O(a^2).
double lattice_transfer_check(const UniformCMPS& state, double a);

struct LatticeObservables {
  double norm = 0.0;          // leading eigenvalue modulus of E
  double density = 0.0;       // <c^dag c>/a
  double pair_density = 0.0;  // <c^dag c^dag c c>/a^2
  double kinetic_fd = 0.0;    // forward-difference kinetic density (1/2m)<d c^dag d c>/a^3
};

struct FiniteLatticeObservables {
  double norm = 0.0;                    // full boundary-to-boundary contraction
  std::vector<double> density_profile;  // per-site <c^dag c>/a
  double pair_integral = 0.0;           // sum_n <c^dag c^dag c c>_n / a
  double kinetic_fd_integral = 0.0;     // (1/2m) sum_n <dc^dag dc>_n / a^2
};

// Lattice estimates of the continuum observables for single-species states;
// uniform fixed points by dense eigendecomposition only (oracle role, D <= 6).
// The hopping terms of kinetic_fd are evaluated for bosonic statistics.
LatticeObservables lattice_observables(const LatticeMPS& mps, double mass = 1.0);
FiniteLatticeObservables lattice_observables_finite(const LatticeMPS& mps, double mass = 1.0);

// Frobenius norm of [U(x0,x1), B] - int U(x0,z)[A(z),B]U(z,x1) dz with U built
// from stepwise midpoint exponentials and the integral by trapezoid; converges
// at second order in the step size.
double verify_commutator_identity(const std::vector<Matrix>& A_samples, const Matrix& B,
                                  double x0, double x1);

}  // namespace cmps
