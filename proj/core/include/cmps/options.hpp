#pragma once

namespace cmps {

// Numerical knobs shared by the evaluators. Dense linear algebra on the
// D^2 x D^2 superoperators is used for D <= dense_budget; above that all
// quantities are reached matrix-free (Arnoldi eigensolver, Krylov solves).
struct EvalOptions {
  int dense_budget = 8;
  int dense_assembly_max = 16;  // hard guard for explicit superoperator assembly
  double eig_tol = 1e-12;
  double solve_tol = 1e-10;
  double gap_tol = 1e-8;
  int max_iterations = 10000;
  int threads = 1;
};

}  // namespace cmps
