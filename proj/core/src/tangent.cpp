#include "cmps/tangent.hpp"

#include "ode.hpp"
#include "superop.hpp"

namespace cmps {
namespace {

using detail::Midpoint;

void check_tangent(const FiniteCMPS& base, const TangentFinite& t) {
  const size_t n = base.Q.size();
  require(t.V.size() == n, errc::shape_error, "tangent V track must match the grid");
  require(static_cast<int>(t.W.size()) == base.speciesCount(), errc::shape_error,
          "tangent needs one W track per species");
  for (const auto& track : t.W)
    require(track.size() == n, errc::shape_error, "tangent W track must match the grid");
  require(t.wR.size() == base.dim(), errc::shape_error, "tangent wR dimension mismatch");
}

void check_tangent(const UniformCMPS& base, const TangentUniform& t) {
  const int D = base.dim();
  require(t.V.rows() == D && t.V.cols() == D, errc::shape_error, "tangent V dimension mismatch");
  require(static_cast<int>(t.W.size()) == base.speciesCount(), errc::shape_error,
          "tangent needs one W per species");
  for (const auto& w : t.W)
    require(w.rows() == D && w.cols() == D, errc::shape_error, "tangent W dimension mismatch");
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

// RK4 track of dY/dx = dir * T_side(Y) + source(x) with cubic midpoints for
// both the coefficients and the source samples.
std::vector<Matrix> sourced_track(const FiniteCMPS& s, Side side, double dir, bool forward,
                                  const std::vector<Matrix>& source) {
  const int n = static_cast<int>(s.Q.size());
  const int q = s.speciesCount();
  const double h = s.dx();
  const std::vector<double> ones(q, 1.0);

  auto rhs = [&](const Matrix& qm, const std::vector<Matrix>& rm, const Matrix& src,
                 const Matrix& y) -> Matrix {
    return dir * transfer_apply(qm, rm, ones, y, side) + src;
  };

  std::vector<Matrix> track(n);
  Matrix y = Matrix::Zero(s.dim(), s.dim());
  std::vector<Matrix> r0(q), rm(q), r1(q);
  if (forward) {
    track[0] = y;
    for (int k = 0; k + 1 < n; ++k) {
      const Matrix qm = detail::midpoint_value(s.Q, k, Midpoint::cubic);
      const Matrix sm = detail::midpoint_value(source, k, Midpoint::cubic);
      for (int a = 0; a < q; ++a) {
        r0[a] = s.R[a][k];
        r1[a] = s.R[a][k + 1];
        rm[a] = detail::midpoint_value(s.R[a], k, Midpoint::cubic);
      }
      const Matrix k1 = rhs(s.Q[k], r0, source[k], y);
      const Matrix k2 = rhs(qm, rm, sm, y + (h / 2) * k1);
      const Matrix k3 = rhs(qm, rm, sm, y + (h / 2) * k2);
      const Matrix k4 = rhs(s.Q[k + 1], r1, source[k + 1], y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      track[k + 1] = y;
    }
  } else {
    track[n - 1] = y;
    for (int k = n - 2; k >= 0; --k) {
      const Matrix qm = detail::midpoint_value(s.Q, k, Midpoint::cubic);
      const Matrix sm = detail::midpoint_value(source, k, Midpoint::cubic);
      for (int a = 0; a < q; ++a) {
        r0[a] = s.R[a][k + 1];
        r1[a] = s.R[a][k];
        rm[a] = detail::midpoint_value(s.R[a], k, Midpoint::cubic);
      }
      const Matrix k1 = rhs(s.Q[k + 1], r0, source[k + 1], y);
      const Matrix k2 = rhs(qm, rm, sm, y - (h / 2) * k1);
      const Matrix k3 = rhs(qm, rm, sm, y - (h / 2) * k2);
      const Matrix k4 = rhs(s.Q[k], r1, source[k], y - h * k3);
      y -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      track[k] = y;
    }
  }
  return track;
}

}  // namespace

TangentFinite gauge_direction_finite(const FiniteCMPS& base, const std::vector<Matrix>& h,
                                     const std::optional<std::vector<Matrix>>& dh) {
  base.check();
  const size_t n = base.Q.size();
  require(h.size() == n, errc::shape_error, "generator must be sampled on the state grid");
  double hmax = 0.0;
  for (const auto& hk : h) hmax = std::max(hmax, hk.norm());
  require(h.front().norm() <= 1e-12 * std::max(1.0, hmax), errc::bad_generator,
          "generator must vanish at -L/2 while vL is fixed");

  std::vector<Matrix> dh_track;
  if (dh) {
    require(dh->size() == n, errc::shape_error, "derivative samples must match the grid");
    dh_track = *dh;
  } else {
    dh_track = detail::central_derivative(h, base.dx());
  }

  TangentFinite t;
  t.V.resize(n);
  t.W.assign(base.speciesCount(), std::vector<Matrix>(n));
  for (size_t k = 0; k < n; ++k) {
    t.V[k] = commutator(base.Q[k], h[k]) + dh_track[k];
    for (int a = 0; a < base.speciesCount(); ++a) t.W[a][k] = commutator(base.R[a][k], h[k]);
  }
  t.wR = -h.back() * base.vR;
  return t;
}

Complex overlap_finite(const FiniteCMPS& base, const VirtualDensityPair& vdp,
                       const TangentFinite& t1, const TangentFinite& t2) {
  check_tangent(base, t1);
  check_tangent(base, t2);
  const int n = static_cast<int>(base.Q.size());
  const int q = base.speciesCount();

  // ket-side field of t1-bar: u = [1 (x) conj(V1) + sum R_a (x) conj(W1_a)] |r)
  std::vector<Matrix> u(n), a_src(n);
  for (int k = 0; k < n; ++k) {
    Matrix uk = vdp.r[k] * t1.V[k].adjoint();
    Matrix ak = t1.V[k].adjoint() * vdp.l[k];
    for (int a = 0; a < q; ++a) {
      uk += base.R[a][k] * vdp.r[k] * t1.W[a][k].adjoint();
      ak += t1.W[a][k].adjoint() * vdp.l[k] * base.R[a][k];
    }
    u[k] = std::move(uk);
    a_src[k] = std::move(ak);
  }

  // s(x) = int_x^{L/2} Pexp(T) u(y) dy ; m(x) = int_{-L/2}^x a(y) Pexp(T) dy;
  // m2 mirrors m with the ket-side insertions as source
  std::vector<Matrix> neg_u(n), b_src(n);
  for (int k = 0; k < n; ++k) {
    neg_u[k] = -u[k];
    Matrix bk = vdp.l[k] * t2.V[k];
    for (int a = 0; a < q; ++a) bk += base.R[a][k].adjoint() * vdp.l[k] * t2.W[a][k];
    b_src[k] = std::move(bk);
  }
  const auto s_track = sourced_track(base, Side::right, -1.0, false, neg_u);
  const auto m_track = sourced_track(base, Side::left, +1.0, true, a_src);
  const auto m2_track = sourced_track(base, Side::left, +1.0, true, b_src);

  const auto weights = detail::simpson_weights(n, base.dx());
  Complex acc = (t1.wR.adjoint() * vdp.l[n - 1] * t2.wR)(0);
  // boundary-bulk cross sector: the bra wR-variation against the ket bulk
  // insertions and vice versa
  acc += (t1.wR.adjoint() * m2_track[n - 1] * base.vR)(0);
  acc += (base.vR.adjoint() * m_track[n - 1] * t2.wR)(0);
  for (int k = 0; k < n; ++k) {
    Complex local(0, 0), g3(0, 0), g4(0, 0);
    g3 += (vdp.l[k] * t2.V[k] * s_track[k]).trace();
    g4 += (m_track[k] * t2.V[k] * vdp.r[k]).trace();
    for (int a = 0; a < q; ++a) {
      local += (vdp.l[k] * t2.W[a][k] * vdp.r[k] * t1.W[a][k].adjoint()).trace();
      g3 += (vdp.l[k] * t2.W[a][k] * s_track[k] * base.R[a][k].adjoint()).trace();
      g4 += (m_track[k] * t2.W[a][k] * vdp.r[k] * base.R[a][k].adjoint()).trace();
    }
    acc += weights[k] * (local + g3 + g4);
  }
  return acc;
}

Complex base_overlap_finite(const FiniteCMPS& base, const VirtualDensityPair& vdp,
                            const TangentFinite& t) {
  check_tangent(base, t);
  const int n = static_cast<int>(base.Q.size());
  const auto weights = detail::simpson_weights(n, base.dx());
  Complex acc = (base.vR.adjoint() * vdp.l[n - 1] * t.wR)(0);
  for (int k = 0; k < n; ++k) {
    Complex term = (vdp.l[k] * t.V[k] * vdp.r[k]).trace();
    for (int a = 0; a < base.speciesCount(); ++a)
      term += (vdp.l[k] * t.W[a][k] * vdp.r[k] * base.R[a][k].adjoint()).trace();
    acc += weights[k] * term;
  }
  return acc;
}

TangentFinite left_gauge_fix_finite(const FiniteCMPS& base, const VirtualDensityPair& vdp,
                                    const TangentFinite& t) {
  check_tangent(base, t);
  const int n = static_cast<int>(base.Q.size());
  const int q = base.speciesCount();

  // d(lh)/dx = Tt(lh) - [l V + sum R^dag l W]
  std::vector<Matrix> src(n);
  for (int k = 0; k < n; ++k) {
    Matrix b = vdp.l[k] * t.V[k];
    for (int a = 0; a < q; ++a) b += base.R[a][k].adjoint() * vdp.l[k] * t.W[a][k];
    src[k] = -b;
  }
  const auto k_track = sourced_track(base, Side::left, +1.0, true, src);

  // h = l^{-1} k with the regularized inverse; its derivative is taken from
  // the two flow equations, dh = l^{-1}[ Tt(k) - b - Tt(l) h ], so the fixing
  // condition holds pointwise up to the pseudo-inverse truncation
  const std::vector<double> ones(q, 1.0);
  std::vector<Matrix> h(n), dh(n);
  std::vector<Matrix> rs(q);
  for (int k = 0; k < n; ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(vdp.l[k]);
    const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
    if (k > n / 20)
      require(es.eigenvalues().minCoeff() > 1e-13 * max_eig, errc::ill_conditioned,
              "l(x) is numerically singular in the bulk");
    const Matrix linv = detail::hermitian_pinv(vdp.l[k], 1e-12);
    h[k] = linv * k_track[k];
    for (int a = 0; a < q; ++a) rs[a] = base.R[a][k];
    const Matrix tk = transfer_apply(base.Q[k], rs, ones, k_track[k], Side::left);
    const Matrix tl = transfer_apply(base.Q[k], rs, ones, vdp.l[k], Side::left);
    dh[k] = linv * (tk + src[k] - tl * h[k]);
  }
  if (n >= 4) {
    // l(-L/2) = vL vL^dag is rank one and k(-L/2) = 0, a 0/0 the pinv cannot
    // resolve; the generator has a finite boundary limit (with vL^dag h = 0),
    // recovered here by quadratic extrapolation from the resolved samples.
    h[0] = 3.0 * h[1] - 3.0 * h[2] + h[3];
    dh[0] = 3.0 * dh[1] - 3.0 * dh[2] + dh[3];
  }

  TangentFinite out = t;
  for (int k = 0; k < n; ++k) {
    out.V[k] += commutator(base.Q[k], h[k]) + dh[k];
    for (int a = 0; a < q; ++a) out.W[a][k] += commutator(base.R[a][k], h[k]);
  }
  out.wR -= h[n - 1] * base.vR;
  return out;
}

TangentUniform gauge_direction_uniform(const UniformCMPS& base, const Matrix& h, double p) {
  base.check();
  require(h.rows() == base.dim() && h.cols() == base.dim(), errc::shape_error,
          "generator dimension mismatch");
  TangentUniform t;
  t.p = p;
  t.V = commutator(base.Q, h) + Complex(0, p) * h;
  for (int a = 0; a < base.speciesCount(); ++a) t.W.push_back(commutator(base.R[a], h));
  return t;
}

UniformOverlap overlap_uniform(const UniformCMPS& base, const FixedPointPair& fp,
                               const TangentUniform& t1, const TangentUniform& t2,
                               const EvalOptions& opts) {
  check_tangent(base, t1);
  check_tangent(base, t2);
  UniformOverlap out;
  if (t1.p != t2.p) return out;  // delta-orthogonal sectors
  const double p = t1.p;
  const int q = base.speciesCount();

  Complex local(0, 0);
  for (int a = 0; a < q; ++a)
    local += (fp.l * t2.W[a] * fp.r * t1.W[a].adjoint()).trace();

  const auto op = detail::make_superop(base, TransferDressing::plain(), opts);
  const auto defl = detail::make_deflation(fp.r, fp.l);

  // Y|r) for the t1-bar side and X'|r) for the t2 side
  Matrix u = fp.r * t1.V.adjoint();
  Matrix v = t2.V * fp.r;
  for (int a = 0; a < q; ++a) {
    u += base.R[a] * fp.r * t1.W[a].adjoint();
    v += t2.W[a] * fp.r * base.R[a].adjoint();
  }

  const Vector y = detail::deflated_solve(op, defl, Complex(0, p), detail::vec(u), opts);
  const Vector z = detail::deflated_solve(op, defl, Complex(0, -p), detail::vec(v), opts);
  const Matrix Y = detail::unvec(y, base.dim());
  const Matrix Z = detail::unvec(z, base.dim());

  Complex term2 = (fp.l * t2.V * Y).trace();
  Complex term3 = (fp.l * Z * t1.V.adjoint()).trace();
  for (int a = 0; a < q; ++a) {
    term2 += (fp.l * t2.W[a] * Y * base.R[a].adjoint()).trace();
    term3 += (fp.l * base.R[a] * Z * t1.W[a].adjoint()).trace();
  }

  out.delta_coefficient = local + term2 + term3;
  if (p == 0.0)
    out.p0_extra =
        base_overlap_uniform(base, fp, t2) * std::conj(base_overlap_uniform(base, fp, t1));
  return out;
}

Complex base_overlap_uniform(const UniformCMPS& base, const FixedPointPair& fp,
                             const TangentUniform& t) {
  check_tangent(base, t);
  Complex acc = (fp.l * t.V * fp.r).trace();
  for (int a = 0; a < base.speciesCount(); ++a)
    acc += (fp.l * t.W[a] * fp.r * base.R[a].adjoint()).trace();
  return acc;
}

TangentUniform left_gauge_fix_uniform(const UniformCMPS& base, const FixedPointPair& fp,
                                      const TangentUniform& t, const EvalOptions& opts) {
  check_tangent(base, t);
  const int D = base.dim();
  const int q = base.speciesCount();
  const double p = t.p;

  TangentUniform work = t;
  if (p == 0.0) {
    // orthogonality to the base state replaces the lost gauge parameter
    const Complex c = base_overlap_uniform(base, fp, work);
    work.V -= c * Matrix::Identity(D, D);
  }

  Matrix b = fp.l * work.V;
  for (int a = 0; a < q; ++a) b += base.R[a].adjoint() * fp.l * work.W[a];

  Matrix h;
  if (D <= opts.dense_budget) {
    const Matrix id = Matrix::Identity(D, D);
    Matrix A = detail::kron(fp.l * base.Q, id) - detail::kron(fp.l, base.Q.transpose()) +
               Complex(0, p) * detail::kron(fp.l, id);
    for (int a = 0; a < q; ++a)
      A += detail::kron(base.R[a].adjoint() * fp.l * base.R[a], id) -
           detail::kron(base.R[a].adjoint() * fp.l, base.R[a].transpose());
    const Vector rhs = -detail::vec(b);
    Vector hv;
    if (p == 0.0) {
      hv = A.completeOrthogonalDecomposition().solve(rhs);
    } else {
      Eigen::PartialPivLU<Matrix> lu(A);
      hv = lu.solve(rhs);
    }
    h = detail::unvec(hv, D);
  } else {
    const double sigma = fp.l.norm() * detail::transfer_norm_bound(base);
    Vector w0 = detail::vec(Matrix::Identity(D, D));
    w0.normalize();
    detail::LinearOp lin{D * D, [&](const Vector& x) -> Vector {
                           const Matrix hm = detail::unvec(x, D);
                           Matrix y = fp.l * (base.Q * hm - hm * base.Q) +
                                      Complex(0, p) * fp.l * hm;
                           for (int a = 0; a < q; ++a)
                             y += base.R[a].adjoint() * fp.l * (base.R[a] * hm - hm * base.R[a]);
                           Vector out = detail::vec(y);
                           if (p == 0.0) out += sigma * (w0.dot(x)) * w0;
                           return out;
                         }};
    h = detail::unvec(detail::bicgstab(lin, -detail::vec(b), opts.solve_tol, opts.max_iterations),
                      D);
  }

  TangentUniform out = work;
  out.V += commutator(base.Q, h) + Complex(0, p) * h;
  for (int a = 0; a < q; ++a) out.W[a] += commutator(base.R[a], h);

  Matrix res = fp.l * out.V;
  for (int a = 0; a < q; ++a) res += base.R[a].adjoint() * fp.l * out.W[a];
  double scale = fp.l.norm() * (out.V.norm() + 1.0);
  for (int a = 0; a < q; ++a) scale += fp.l.norm() * out.W[a].norm();
  require(res.norm() <= 1e-8 * std::max(1.0, scale), errc::gauge_singular,
          "left gauge fixing system is numerically singular");
  return out;
}

}  // namespace cmps
