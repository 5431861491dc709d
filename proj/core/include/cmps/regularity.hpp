#pragma once

#include <optional>

#include "cmps/types.hpp"

namespace cmps {

// Residual table over ordered species pairs (a,b); passed iff the maximum
// residual is at or below the tolerance.
struct RegularityReport {
  int order = 1;
  Eigen::MatrixXd residuals;  // q x q Frobenius norms
  double tolerance = 1e-10;
  bool passed = false;

  double maxResidual() const { return residuals.size() ? residuals.maxCoeff() : 0.0; }
};

// First-order condition: eta(a,b) R_b R_a - R_a R_b = 0 for every pair.
// Finite states are checked at every grid sample and the maximum reported.
RegularityReport check_first_order(const UniformCMPS& state, double tol = 1e-10);
RegularityReport check_first_order(const FiniteCMPS& state, double tol = 1e-10);

// Order-n condition (n >= 2): the bracket [D_{n-1}(a), R_b] vanishes, where
// D_m(a) sums the m-th derivative ladder of nested Q-commutators of R_a and
// the bracket is a commutator for eta(a,b) = +1, anticommutator for -1.
// Uniform states use dR/dx = 0; finite states differentiate samples by
// second-order central differences unless derivative tracks are supplied.
// Orders beyond the cap are rejected: they are diagnostics, hard to satisfy
// with finite-dimensional matrices, and increasingly noise-dominated.
RegularityReport check_higher_order(const UniformCMPS& state, int order, double tol = 1e-10,
                                    int order_cap = 4);
RegularityReport check_higher_order(
    const FiniteCMPS& state, int order,
    const std::optional<std::vector<std::vector<Matrix>>>& dR_samples = std::nullopt,
    double tol = 1e-10, int order_cap = 4);

// Z2 block decomposition of the ancilla space: P = diag(+1_{Dplus}, -1_{Dminus}).
struct ParityStructure {
  int Dplus = 0;
  int Dminus = 0;
  Matrix P;

  static ParityStructure blocks(int Dplus, int Dminus);
  int dim() const { return Dplus + Dminus; }
};

struct ParityReport {
  double q_residual = 0.0;               // largest forbidden entry of Q
  std::vector<double> r_residual;        // per species
  double max_residual = 0.0;
  bool passed = false;
};

// Checks the superselection block structure: Q block-diagonal, bosonic R
// block-diagonal, fermionic R block-off-diagonal. Residuals are the largest
// forbidden entry magnitudes.
ParityReport check_parity(const UniformCMPS& state, const ParityStructure& parity,
                          double tol = 1e-10);

// Per-species block content for assembly: bosons carry (plus, minus) diagonal
// blocks, fermions carry (plus_minus, minus_plus) antidiagonal blocks.
struct ParityBlocks {
  Matrix first;   // bosonic: D+ x D+;  fermionic: D+ x D-
  Matrix second;  // bosonic: D- x D-;  fermionic: D- x D+
};

std::pair<UniformCMPS, ParityStructure> build_parity_state(
    const Matrix& Qplus, const Matrix& Qminus, const std::vector<ParityBlocks>& blocks,
    SpeciesTable species);

}  // namespace cmps
