#include "cmps/transfer.hpp"

namespace cmps {

Matrix transfer_apply(const Matrix& Q, const std::vector<Matrix>& R,
                      const std::vector<double>& signs, const Matrix& f, Side side) {
  const int D = static_cast<int>(Q.rows());
  require(f.rows() == D && f.cols() == D, errc::shape_error, "transfer_apply: f dimension mismatch");
  require(signs.size() == R.size(), errc::shape_error, "transfer_apply: one sign per species");
  Matrix out;
  if (side == Side::right) {
    out = Q * f + f * Q.adjoint();
    for (size_t g = 0; g < R.size(); ++g) {
      require(R[g].rows() == D && R[g].cols() == D, errc::shape_error,
              "transfer_apply: R dimension mismatch");
      out.noalias() += signs[g] * (R[g] * f * R[g].adjoint());
    }
  } else {
    out = f * Q + Q.adjoint() * f;
    for (size_t g = 0; g < R.size(); ++g) {
      require(R[g].rows() == D && R[g].cols() == D, errc::shape_error,
              "transfer_apply: R dimension mismatch");
      out.noalias() += signs[g] * (R[g].adjoint() * f * R[g]);
    }
  }
  return out;
}

Matrix transfer_apply(const UniformCMPS& state, const Matrix& f, Side side,
                      const TransferDressing& dressing) {
  return transfer_apply(state.Q, state.R, dressing_signs(state.species, dressing), f, side);
}

Matrix dense_transfer(const UniformCMPS& state, const TransferDressing& dressing, int max_dense) {
  const int D = state.dim();
  require(D <= max_dense, errc::too_large_for_dense,
          "dense superoperator requested for D = " + std::to_string(D) + " > budget " +
              std::to_string(max_dense));
  const auto signs = dressing_signs(state.species, dressing);
  const Matrix id = Matrix::Identity(D, D);
  Matrix t = detail::kron(state.Q, id) + detail::kron(id, state.Q.conjugate());
  for (size_t g = 0; g < state.R.size(); ++g)
    t += signs[g] * detail::kron(state.R[g], state.R[g].conjugate());
  return t;
}

UniformCMPS construct_left_orthonormal(const Matrix& K, std::vector<Matrix> R,
                                       SpeciesTable species, double hermiticity_tol) {
  require(K.rows() == K.cols(), errc::shape_error, "K must be square");
  require(detail::is_hermitian(K, hermiticity_tol), errc::not_hermitian,
          "K deviates from Hermiticity beyond tolerance");
  const int D = static_cast<int>(K.rows());
  Matrix Q = Complex(0, -1) * K;
  for (const auto& r : R) {
    require(r.rows() == D && r.cols() == D, errc::shape_error, "R dimension mismatch");
    Q -= 0.5 * (r.adjoint() * r);
  }
  UniformCMPS state{std::move(species), std::move(Q), std::move(R)};
  state.check();
  return state;
}

double left_orthonormal_residual(const UniformCMPS& state) {
  Matrix c = state.Q + state.Q.adjoint();
  for (const auto& r : state.R) c += r.adjoint() * r;
  return c.norm();
}

double right_orthonormal_residual(const UniformCMPS& state) {
  Matrix c = state.Q + state.Q.adjoint();
  for (const auto& r : state.R) c += r * r.adjoint();
  return c.norm();
}

}  // namespace cmps
