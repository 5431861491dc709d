#include "cmps/gauge.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "ode.hpp"

namespace cmps {
namespace {

Matrix checked_inverse(const Matrix& g, const char* what) {
  Eigen::FullPivLU<Matrix> lu(g);
  require(lu.isInvertible(), errc::singular_gauge, std::string(what) + " is singular");
  return lu.inverse();
}

// Column phases chosen so the first above-noise entry is real positive.
void fix_column_phases(Matrix& u) {
  for (int j = 0; j < u.cols(); ++j) {
    const double scale = u.col(j).norm();
    for (int i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, j)) > 1e-12 * scale) {
        u.col(j) *= std::abs(u(i, j)) / u(i, j);
        break;
      }
    }
  }
}

CanonicalForm canonicalize(const UniformCMPS& state, const FixedPointPair& fp, bool left) {
  const Matrix& anchor = left ? fp.l : fp.r;  // fixed point sent to the identity
  const Matrix& other = left ? fp.r : fp.l;

  Eigen::SelfAdjointEigenSolver<Matrix> es(anchor);
  const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
  require(es.eigenvalues().minCoeff() > 1e-12 * max_eig, errc::bad_fixed_point,
          "fixed point is numerically rank deficient");

  const Matrix half = detail::hermitian_sqrt(anchor);
  const Matrix inv_half = detail::hermitian_inv_sqrt(anchor);
  // transformed opposite fixed point is Hermitian PSD; diagonalize it
  const Matrix moved = half * other * half;
  Eigen::SelfAdjointEigenSolver<Matrix> diag((moved + moved.adjoint()) / 2.0);
  const int D = state.dim();
  Matrix u(D, D);
  Eigen::VectorXd spectrum(D);
  for (int j = 0; j < D; ++j) {  // nonincreasing order
    u.col(j) = diag.eigenvectors().col(D - 1 - j);
    spectrum(j) = diag.eigenvalues()(D - 1 - j);
  }
  fix_column_phases(u);

  const Matrix g = left ? Matrix(inv_half * u) : Matrix(half * u);
  CanonicalForm out{gauge_uniform(state, g), g, std::move(spectrum)};
  return out;
}

}  // namespace

UniformCMPS gauge_uniform(const UniformCMPS& state, const Matrix& g) {
  state.check();
  require(g.rows() == state.dim() && g.cols() == state.dim(), errc::shape_error,
          "gauge dimension mismatch");
  const Matrix ginv = checked_inverse(g, "gauge matrix");
  UniformCMPS out = state;
  out.Q = ginv * state.Q * g;
  for (int a = 0; a < state.speciesCount(); ++a) out.R[a] = ginv * state.R[a] * g;
  return out;
}

FiniteCMPS gauge_finite(const FiniteCMPS& state, const GaugeFunction& g) {
  state.check();
  const size_t n = state.Q.size();
  require(g.samples.size() == n, errc::shape_error, "gauge must be sampled on the state grid");
  std::vector<Matrix> ginv(n);
  for (size_t k = 0; k < n; ++k) {
    require(g.samples[k].rows() == state.dim() && g.samples[k].cols() == state.dim(),
            errc::shape_error, "gauge sample dimension mismatch");
    ginv[k] = checked_inverse(g.samples[k], "gauge sample");
  }
  const auto dg = detail::central_derivative(g.samples, state.dx());

  FiniteCMPS out = state;
  for (size_t k = 0; k < n; ++k) {
    out.Q[k] = ginv[k] * state.Q[k] * g.samples[k] + ginv[k] * dg[k];
    for (int a = 0; a < state.speciesCount(); ++a)
      out.R[a][k] = ginv[k] * state.R[a][k] * g.samples[k];
  }
  out.vR = ginv[n - 1] * state.vR;
  out.vL = g.samples[0].adjoint() * state.vL;
  return out;
}

CanonicalForm left_canonicalize_uniform(const UniformCMPS& state, const FixedPointPair& fp,
                                        const EvalOptions&) {
  return canonicalize(state, fp, true);
}

CanonicalForm right_canonicalize_uniform(const UniformCMPS& state, const FixedPointPair& fp,
                                         const EvalOptions&) {
  return canonicalize(state, fp, false);
}

std::pair<FiniteCMPS, GaugeFunction> left_orthonormalize_finite(const FiniteCMPS& state) {
  state.check();
  require(state.boundary == BoundaryKind::open, errc::shape_error,
          "left orthonormalization needs open boundaries");
  const int n = static_cast<int>(state.Q.size());
  const int D = state.dim();
  const double h = state.dx();

  // d rho/dx = Tt(rho), rho(-L/2) = vL vL^dag + eps
  const double eps = 1e-12 * state.vL.squaredNorm();
  Matrix rho = state.vL * state.vL.adjoint() + eps * Matrix::Identity(D, D);
  std::vector<Matrix> rho_track(n);
  rho_track[0] = rho;

  auto rhs = [&](const Matrix& q, const std::vector<Matrix>& rs, const Matrix& y) {
    Matrix out = y * q + q.adjoint() * y;
    for (const auto& r : rs) out += r.adjoint() * y * r;
    return out;
  };

  std::vector<Matrix> r_mid(state.speciesCount());
  for (int k = 0; k + 1 < n; ++k) {
    const Matrix q_mid = detail::midpoint_value(state.Q, k, detail::Midpoint::linear);
    std::vector<Matrix> r_k(state.speciesCount()), r_k1(state.speciesCount());
    for (int a = 0; a < state.speciesCount(); ++a) {
      r_k[a] = state.R[a][k];
      r_k1[a] = state.R[a][k + 1];
      r_mid[a] = detail::midpoint_value(state.R[a], k, detail::Midpoint::linear);
    }
    const Matrix k1 = rhs(state.Q[k], r_k, rho);
    const Matrix k2 = rhs(q_mid, r_mid, rho + (h / 2) * k1);
    const Matrix k3 = rhs(q_mid, r_mid, rho + (h / 2) * k2);
    const Matrix k4 = rhs(state.Q[k + 1], r_k1, rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = (rho + rho.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    require(es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, rho.norm()),
            errc::bad_propagation, "rho(x) lost positivity during propagation");
    rho_track[k + 1] = rho;
  }

  // g = rho^{-1/2} with the derivative taken analytically from the ODE:
  // u = rho^{1/2} solves u'u + uu' = Tt(rho), so in rho's eigenbasis
  // (u')_ij = (Tt(rho))_ij / (sqrt(li) + sqrt(lj)), and g' = -g u' g.
  GaugeFunction g;
  g.samples.resize(n);
  FiniteCMPS out = state;
  std::vector<Matrix> rs(state.speciesCount());
  for (int k = 0; k < n; ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_track[k]);
    Eigen::VectorXd ev = es.eigenvalues();
    const double floor = 1e-14 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = 0; i < D; ++i) ev(i) = std::max(ev(i), floor);
    const Matrix& V = es.eigenvectors();
    Eigen::VectorXd sq = ev.cwiseSqrt();
    const Matrix u = V * sq.asDiagonal() * V.adjoint();        // g^{-1}
    const Matrix ginv_sq = V * sq.cwiseInverse().asDiagonal() * V.adjoint();
    g.samples[k] = ginv_sq;

    for (int a = 0; a < state.speciesCount(); ++a) rs[a] = state.R[a][k];
    const Matrix rho_prime = rhs(state.Q[k], rs, rho_track[k]);
    Matrix m = V.adjoint() * rho_prime * V;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) m(i, j) /= sq(i) + sq(j);
    const Matrix u_prime = V * m * V.adjoint();
    const Matrix g_prime = -ginv_sq * u_prime * ginv_sq;

    out.Q[k] = u * state.Q[k] * ginv_sq + u * g_prime;
    for (int a = 0; a < state.speciesCount(); ++a)
      out.R[a][k] = u * state.R[a][k] * ginv_sq;
  }
  out.vR = g.samples[n - 1].partialPivLu().solve(state.vR);
  out.vL = g.samples[0].adjoint() * state.vL;
  return {std::move(out), std::move(g)};
}

std::pair<FiniteCMPS, GaugeFunction> eliminate_Q_gauge(const FiniteCMPS& state) {
  state.check();
  require(state.boundary == BoundaryKind::open, errc::shape_error,
          "Q-elimination gauge needs open boundaries");
  const int n = static_cast<int>(state.Q.size());
  const double h = state.dx();

  // suffix products U(x_k, L/2) from stepwise exponentials
  std::vector<Matrix> suffix(n);
  suffix[n - 1] = Matrix::Identity(state.dim(), state.dim());
  for (int k = n - 2; k >= 0; --k) {
    const Matrix step = ((h / 2.0) * (state.Q[k] + state.Q[k + 1])).exp();
    suffix[k] = step * suffix[k + 1];
    require(suffix[k].norm() < 1e12, errc::ill_conditioned,
            "ordered exponential of Q overflows");
  }

  GaugeFunction g;
  g.samples.resize(n);
  const Matrix g0inv = checked_inverse(suffix[0], "ordered exponential");
  for (int k = 0; k < n; ++k) g.samples[k] = suffix[k] * g0inv;  // g(-L/2) = 1

  FiniteCMPS out = state;
  const int D = state.dim();
  for (int k = 0; k < n; ++k) {
    const Matrix ginv = checked_inverse(g.samples[k], "gauge sample");
    out.Q[k] = Matrix::Zero(D, D);  // exact for the continuum transform
    for (int a = 0; a < state.speciesCount(); ++a)
      out.R[a][k] = ginv * state.R[a][k] * g.samples[k];
  }
  out.vR = checked_inverse(g.samples[n - 1], "gauge endpoint") * state.vR;
  return {std::move(out), std::move(g)};
}

}  // namespace cmps
