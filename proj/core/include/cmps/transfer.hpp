#pragma once

#include "cmps/types.hpp"

namespace cmps {

enum class Side { right, left };

// Matrix-free action of the (sign-dressed) transfer maps on a D x D matrix f.
//   right: T(f)  = Q f + f Q^dag + sum_g s_g R_g f R_g^dag
//   left:  Tt(f) = f Q + Q^dag f + sum_g s_g R_g^dag f R_g
// Cost O(q D^3). Plain dressing corresponds to all signs +1.
Matrix transfer_apply(const Matrix& Q, const std::vector<Matrix>& R,
                      const std::vector<double>& signs, const Matrix& f, Side side);

Matrix transfer_apply(const UniformCMPS& state, const Matrix& f, Side side,
                      const TransferDressing& dressing = TransferDressing::plain());

// Dense D^2 x D^2 superoperator
//   T = Q (x) 1 + 1 (x) conj(Q) + sum_g s_g R_g (x) conj(R_g)
// in the row-stacking vec convention, so T vec(f) = vec(T(f)).
// Guarded by a size budget: D > max_dense raises TooLargeForDense.
Matrix dense_transfer(const UniformCMPS& state,
                      const TransferDressing& dressing = TransferDressing::plain(),
                      int max_dense = 16);

// State with Q = -i K - (1/2) sum_a R_a^dag R_a for Hermitian K; satisfies the
// left orthonormalization condition by construction.
UniformCMPS construct_left_orthonormal(const Matrix& K, std::vector<Matrix> R,
                                       SpeciesTable species, double hermiticity_tol = 1e-12);

// Frobenius norm of Q + Q^dag + sum_a R_a^dag R_a.
double left_orthonormal_residual(const UniformCMPS& state);
// Frobenius norm of Q + Q^dag + sum_a R_a R_a^dag.
double right_orthonormal_residual(const UniformCMPS& state);

}  // namespace cmps
