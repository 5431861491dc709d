#include "cmps/uniform.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "parallel.hpp"
#include "superop.hpp"

namespace cmps {
namespace {

using detail::Deflation;
using detail::SuperOp;

struct LeadingPair {
  Complex lambda{0, 0};
  Matrix right;   // raw (un-Hermitized) eigenvector as a matrix
  Matrix left;
  double gap = std::numeric_limits<double>::infinity();
  FixedPointMethod method = FixedPointMethod::dense;
};

LeadingPair leading_pair(const SuperOp& op, const EvalOptions& opts) {
  LeadingPair out;
  const int D = op.D;
  if (op.dense) {
    out.method = FixedPointMethod::dense;
    Eigen::ComplexEigenSolver<Matrix> es(*op.dense);
    require(es.info() == Eigen::Success, errc::solve_failed, "dense eigensolver failed");
    int best = 0;
    for (int i = 1; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
    out.lambda = es.eigenvalues()(best);
    out.right = detail::unvec(es.eigenvectors().col(best), D);
    if (es.eigenvalues().size() > 1) {
      double second = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (i != best) second = std::max(second, es.eigenvalues()(i).real());
      out.gap = out.lambda.real() - second;
    }
    Eigen::ComplexEigenSolver<Matrix> esa(op.dense->adjoint());
    require(esa.info() == Eigen::Success, errc::solve_failed, "dense eigensolver failed");
    int bestl = 0;
    for (int i = 1; i < esa.eigenvalues().size(); ++i)
      if (esa.eigenvalues()(i).real() > esa.eigenvalues()(bestl).real()) bestl = i;
    out.left = detail::unvec(esa.eigenvectors().col(bestl), D).adjoint();
  } else {
    out.method = FixedPointMethod::iterative;
    const auto r = detail::arnoldi_leading_re(op.asOp(), op.norm_bound, opts);
    out.lambda = r.lambda;
    out.right = detail::unvec(r.v, D);
    if (r.have_lambda2) out.gap = r.lambda.real() - r.lambda2.real();
    detail::LinearOp adj{op.n, [&op](const Vector& x) {
                           return detail::vec(op.applyMatLeft(detail::unvec(x, op.D)));
                         }};
    const auto lres = detail::arnoldi_leading_re(adj, op.norm_bound, opts);
    out.left = detail::unvec(lres.v, D).adjoint();
  }
  return out;
}

// The leading eigenvector is unique up to a phase; rotate it onto the
// Hermitian representative, symmetrize, and fix the overall sign.
Matrix hermitize(const Matrix& f, double* min_eig_out) {
  const int D = static_cast<int>(f.rows());
  int k = 0;
  for (int i = 1; i < D; ++i)
    if (std::abs(f(i, i)) > std::abs(f(k, k))) k = i;
  require(std::abs(f(k, k)) > 1e-14 * std::max(1.0, f.norm()), errc::bad_fixed_point,
          "fixed point has numerically vanishing diagonal");
  const Complex phase = f(k, k) / std::abs(f(k, k));
  Matrix h = f / phase;
  h = (h + h.adjoint()) / 2.0;
  if (h.trace().real() < 0) h = -h;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig_out) *min_eig_out = min_eig;
  require(min_eig >= -1e-8 * scale, errc::bad_fixed_point,
          "fixed point is not positive semidefinite");
  return h;
}

// Parity-dressed fixed points l_a = l P, r_a = P r for fermionic species.
struct DressedPoints {
  Matrix l, r;
};

Complex bra_ket(const Matrix& l, const Matrix& x) { return (l * x).trace(); }

// Evaluation frame with the left fixed point balanced to the identity.
// Ill-conditioned gauge representatives amplify rounding through the high
// powers of the transfer operator; one similarity transform up front keeps
// every downstream chain O(1)-conditioned. Exact values are unchanged.
struct Frame {
  UniformCMPS state;
  Matrix l, r;
  Matrix parityP;  // parity matrix carried into the frame
  bool has_parity = false;
};

Frame balanced_frame(const UniformCMPS& state, const FixedPointPair& fp,
                     const std::optional<ParityStructure>& parity) {
  Frame f;
  f.state = state;
  f.l = fp.l;
  f.r = fp.r;
  if (parity) {
    require(parity->dim() == state.dim(), errc::shape_error, "parity dimension mismatch");
    f.parityP = parity->P;
    f.has_parity = true;
  }
  const int D = state.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(fp.l);
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin <= 0 || lmax / lmin > 1e2) {
    const Matrix c = detail::hermitian_sqrt(fp.l);
    const Matrix cinv = detail::hermitian_inv_sqrt(fp.l);
    f.state.Q = c * state.Q * cinv;
    for (int a = 0; a < state.speciesCount(); ++a) f.state.R[a] = c * state.R[a] * cinv;
    f.l = Matrix::Identity(D, D);
    f.r = c * fp.r * c;
    if (f.has_parity) f.parityP = c * f.parityP * cinv;
  }
  return f;
}

DressedPoints dressed_points(const Frame& f, int a) {
  if (!f.state.species.fermionic(a)) return {f.l, f.r};
  require(f.has_parity, errc::parity_required, "fermionic dressing needs a parity structure");
  return {f.l * f.parityP, f.parityP * f.r};
}

}  // namespace

double transfer_norm_estimate(const UniformCMPS& state) {
  return detail::transfer_norm_bound(state);
}

std::pair<UniformCMPS, FixedPointPair> normalize(const UniformCMPS& state,
                                                 const EvalOptions& opts) {
  state.check();
  const auto op = detail::make_superop(state, TransferDressing::plain(), opts);
  auto lead = leading_pair(op, opts);

  if (state.dim() > 1)
    require(lead.gap > opts.gap_tol, errc::non_injective,
            "leading transfer eigenvalue is degenerate (gap " + std::to_string(lead.gap) + ")");

  FixedPointPair fp;
  fp.method = lead.method;
  fp.mu = lead.lambda.real();
  fp.gap = lead.gap;
  fp.r = hermitize(lead.right, &fp.min_eig_r);
  fp.l = hermitize(lead.left, &fp.min_eig_l);

  {
    // ill-conditioned gauge representatives degrade the eigenvectors; a
    // refinement round in the frame where l becomes the identity restores
    // accuracy. Kept only when it actually lowers the fixed-point residual.
    Eigen::SelfAdjointEigenSolver<Matrix> es(fp.l);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    const double lmin = es.eigenvalues().minCoeff();
    if (state.dim() > 1 && lmin > 0 && lmax / lmin > 1e2) {
      auto residual_of = [&](double mu, const Matrix& l, const Matrix& r) {
        UniformCMPS shifted = state;
        shifted.Q.diagonal().array() -= Complex(mu / 2.0, 0.0);
        return transfer_apply(shifted, r, Side::right).norm() / std::max(1e-300, r.norm()) +
               transfer_apply(shifted, l, Side::left).norm() / std::max(1e-300, l.norm());
      };
      const double res_direct = residual_of(fp.mu, fp.l, fp.r);

      const Matrix c = detail::hermitian_sqrt(fp.l);
      const Matrix cinv = detail::hermitian_inv_sqrt(fp.l);
      UniformCMPS balanced = state;
      balanced.Q = c * state.Q * cinv;
      for (int a = 0; a < state.speciesCount(); ++a) balanced.R[a] = c * state.R[a] * cinv;
      const auto op_b = detail::make_superop(balanced, TransferDressing::plain(), opts);
      const auto lead_b = leading_pair(op_b, opts);
      double min_eig_rb = 0.0, min_eig_lb = 0.0;
      const Matrix r_b = hermitize(lead_b.right, &min_eig_rb);
      const Matrix l_b = hermitize(lead_b.left, &min_eig_lb);
      const Matrix r_mapped = cinv * r_b * cinv;
      const Matrix l_mapped = c * l_b * c;
      if (residual_of(lead_b.lambda.real(), l_mapped, r_mapped) < res_direct) {
        fp.method = lead_b.method;
        fp.mu = lead_b.lambda.real();
        fp.gap = lead_b.gap;
        fp.min_eig_r = min_eig_rb;
        fp.min_eig_l = min_eig_lb;
        fp.r = r_mapped;
        fp.l = l_mapped;
      }
    }
  }

  const double tr_r = fp.r.trace().real();
  require(tr_r > 0, errc::bad_fixed_point, "right fixed point has nonpositive trace");
  fp.r /= tr_r;
  const Complex pairing = detail::trace_pair(fp.l, fp.r);
  require(std::abs(pairing) > 1e-14, errc::bad_fixed_point,
          "fixed point pairing tr[l r] is numerically zero");
  fp.l /= pairing.real();

  UniformCMPS shifted = state;
  shifted.Q.diagonal().array() -= Complex(fp.mu / 2.0, 0.0);

  fp.residual_r = transfer_apply(shifted, fp.r, Side::right).norm();
  fp.residual_l = transfer_apply(shifted, fp.l, Side::left).norm();
  return {std::move(shifted), std::move(fp)};
}

Complex density(const UniformCMPS& state, const FixedPointPair& fp, int a, int b) {
  const int q = state.speciesCount();
  require(a >= 0 && a < q && b >= 0 && b < q, errc::shape_error, "species index out of range");
  const Frame f = balanced_frame(state, fp, std::nullopt);
  return (f.l * f.state.R[b] * f.r * f.state.R[a].adjoint()).trace();
}

EnergyDensities energy_densities(const UniformCMPS& state, const FixedPointPair& fp,
                                 const std::vector<double>& masses, double v,
                                 const InteractionKernel& w, const EvalOptions& opts) {
  const int q = state.speciesCount();
  require(static_cast<int>(masses.size()) == q, errc::shape_error, "one mass per species required");
  const Frame f = balanced_frame(state, fp, std::nullopt);
  EnergyDensities out;
  auto take_real = [&out](Complex z) {
    out.max_imag = std::max(out.max_imag, std::abs(z.imag()));
    return z.real();
  };

  for (int a = 0; a < q; ++a) {
    require(masses[a] > 0, errc::shape_error, "masses must be positive");
    const Matrix comm = f.state.Q * f.state.R[a] - f.state.R[a] * f.state.Q;
    out.kinetic += take_real((f.l * comm * f.r * comm.adjoint()).trace()) / (2.0 * masses[a]);
    out.potential +=
        v * take_real((f.l * f.state.R[a] * f.r * f.state.R[a].adjoint()).trace());
  }

  switch (w.kind) {
    case InteractionKernel::Kind::delta:
      for (int a = 0; a < q; ++a) {
        const Matrix rr = f.state.R[a] * f.state.R[a];
        out.interaction += w.c * take_real((f.l * rr * f.r * rr.adjoint()).trace());
      }
      break;
    case InteractionKernel::Kind::exponential: {
      require(w.ell > 0, errc::shape_error, "exponential kernel needs ell > 0");
      const auto op = detail::make_superop(f.state, TransferDressing::plain(), opts);
      for (int a = 0; a < q; ++a) {
        const Vector u = detail::vec(f.state.R[a] * f.r * f.state.R[a].adjoint());
        const Vector y = detail::shifted_solve(op, Complex(1.0 / w.ell, 0.0), u, opts);
        const Matrix Y = detail::unvec(y, state.dim());
        out.interaction +=
            w.c * take_real((f.l * f.state.R[a] * Y * f.state.R[a].adjoint()).trace());
      }
      break;
    }
    case InteractionKernel::Kind::tabulated: {
      require(w.z.size() == w.w.size() && w.z.size() >= 2, errc::shape_error,
              "tabulated kernel needs matching z/w samples");
      const auto op = detail::make_superop(f.state, TransferDressing::plain(), opts);
      for (int a = 0; a < q; ++a) {
        Vector u = detail::vec(f.state.R[a] * f.r * f.state.R[a].adjoint());
        Complex acc(0, 0);
        for (size_t k = 0; k < w.z.size(); ++k) {
          if (k > 0) {
            const double dz = w.z[k] - w.z[k - 1];
            require(dz > 0, errc::shape_error, "tabulated kernel abscissae must ascend");
            if (op.dense)
              u = ((*op.dense) * dz).exp() * u;
            else
              u = detail::expmv(op.asOp(), op.norm_bound, dz, u);
          }
          const Matrix U = detail::unvec(u, state.dim());
          const Complex val = (f.l * f.state.R[a] * U * f.state.R[a].adjoint()).trace();
          const double weight = (k == 0 || k + 1 == w.z.size()) ? 0.5 : 1.0;
          const double dz = k + 1 < w.z.size() ? w.z[k + 1] - w.z[k] : w.z[k] - w.z[k - 1];
          acc += weight * w.w[k] * val * dz;
        }
        out.interaction += take_real(acc);
      }
      break;
    }
  }
  return out;
}

CorrelationSeries correlation(const UniformCMPS& state, const FixedPointPair& fp, int a, int b,
                              const std::vector<double>& xs,
                              const std::optional<ParityStructure>& parity,
                              const EvalOptions& opts) {
  const int q = state.speciesCount();
  require(a >= 0 && a < q && b >= 0 && b < q, errc::shape_error, "species index out of range");
  const Frame f = balanced_frame(state, fp, parity);
  const auto op = detail::make_superop(f.state, TransferDressing::single(a), opts);
  const auto dp = dressed_points(f, a);

  std::vector<int> order(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return xs[i] < xs[j]; });

  CorrelationSeries series;
  series.x = xs;
  series.values.resize(xs.size());
  series.long_range =
      bra_ket(f.l, f.state.R[b] * dp.r) * bra_ket(dp.l, f.r * f.state.R[a].adjoint());

  Vector u = detail::vec(f.r * f.state.R[a].adjoint());  // [1 (x) conj(R_a)] |r)
  double pos = 0.0;
  for (int idx : order) {
    const double target = xs[idx];
    require(target >= 0.0, errc::shape_error, "correlation separations must be nonnegative");
    const double gap = target - pos;
    if (gap > 0) {
      if (op.dense)
        u = ((*op.dense) * gap).exp() * u;
      else
        u = detail::expmv(op.asOp(), op.norm_bound, gap, u);
      pos = target;
    }
    series.values[idx] = bra_ket(f.l, f.state.R[b] * detail::unvec(u, state.dim()));
  }
  return series;
}

MomentumOccupation momentum_occupation(const UniformCMPS& state, const FixedPointPair& fp, int a,
                                       int b, const std::vector<double>& ps,
                                       const std::optional<ParityStructure>& parity,
                                       const EvalOptions& opts) {
  const int q = state.speciesCount();
  require(a >= 0 && a < q && b >= 0 && b < q, errc::shape_error, "species index out of range");
  const Frame f = balanced_frame(state, fp, parity);
  const auto op = detail::make_superop(f.state, TransferDressing::single(a), opts);
  const auto dp = dressed_points(f, a);
  const Deflation defl = detail::make_deflation(dp.r, dp.l);

  MomentumOccupation out;
  out.p = ps;
  out.values.resize(ps.size());
  out.condensate_weight =
      (bra_ket(f.l, dp.r * f.state.R[a].adjoint()) * bra_ket(dp.l, f.state.R[b] * f.r)).real();

  const Vector b1 = detail::vec(f.state.R[b] * f.r);            // [R_b (x) 1] |r)
  const Vector b2 = detail::vec(f.r * f.state.R[a].adjoint());  // [1 (x) conj(R_a)] |r)
  detail::parallel_for(static_cast<int>(ps.size()), opts.threads, [&](int i) {
    const double p = ps[i];
    // (-T_a + i p)^P acting right of [1 (x) conj(R_a)] bra
    const Vector x1 = detail::deflated_solve(op, defl, Complex(0, p), b1, opts);
    const Vector x2 = detail::deflated_solve(op, defl, Complex(0, -p), b2, opts);
    const Complex t1 = bra_ket(f.l, detail::unvec(x1, state.dim()) * f.state.R[a].adjoint());
    const Complex t2 = bra_ket(f.l, f.state.R[b] * detail::unvec(x2, state.dim()));
    out.values[i] = t1 + t2;
  });
  return out;
}

double uv_cutoff(const UniformCMPS& state, const FixedPointPair& fp, int a, int b,
                 const std::optional<ParityStructure>& parity, const EvalOptions& opts) {
  const int q = state.speciesCount();
  require(a >= 0 && a < q && b >= 0 && b < q, errc::shape_error, "species index out of range");
  const Frame f = balanced_frame(state, fp, parity);
  const auto op = detail::make_superop(f.state, TransferDressing::single(a), opts);
  (void)dressed_points(f, a);  // enforces ParityRequired for fermions

  Matrix w1 = f.state.R[b] * f.r;
  Matrix w2 = f.r * f.state.R[a].adjoint();
  for (int k = 0; k < 3; ++k) {
    w1 = op.applyMat(w1);
    w2 = op.applyMat(w2);
  }
  const Complex A = bra_ket(f.l, w1 * f.state.R[a].adjoint());
  const Complex B = bra_ket(f.l, f.state.R[b] * w2);
  // lim p^4 n(p) = A + B: the 1/(ip -+ T) expansion carries +T^3/p^4
  const Complex sum = A + B;
  if (a == b) {
    const double signed_value = sum.real();
    const double scale = std::pow(detail::transfer_norm_bound(f.state), 3) + 1.0;
    require(signed_value >= -1e-9 * scale, errc::bad_fixed_point,
            "p^4 tail coefficient came out negative for a diagonal pair");
    return signed_value > 0 ? std::pow(signed_value, 0.25) : 0.0;
  }
  return std::pow(std::abs(sum), 0.25);
}

std::optional<double> correlation_length(const UniformCMPS& state, const FixedPointPair& fp,
                                         const EvalOptions& opts) {
  if (state.dim() == 1) return std::nullopt;
  const Frame f = balanced_frame(state, fp, std::nullopt);
  const auto op = detail::make_superop(f.state, TransferDressing::plain(), opts);
  double re1;
  if (op.dense) {
    Eigen::ComplexEigenSolver<Matrix> es(*op.dense);
    require(es.info() == Eigen::Success, errc::solve_failed, "dense eigensolver failed");
    std::vector<double> res(es.eigenvalues().size());
    for (int i = 0; i < es.eigenvalues().size(); ++i) res[i] = es.eigenvalues()(i).real();
    std::sort(res.begin(), res.end(), std::greater<>());
    re1 = res[1];
  } else {
    const Deflation defl = detail::make_deflation(f.r, f.l);
    detail::LinearOp deflated{op.n, [&](const Vector& x) {
                                return defl.project(op.apply(defl.project(x)));
                              }};
    const auto r = detail::arnoldi_leading_re(deflated, op.norm_bound, opts);
    re1 = r.lambda.real();
  }
  require(re1 < 0, errc::non_injective, "subdominant transfer eigenvalue is not decaying");
  return 1.0 / std::abs(re1);
}

MatchResult match_states(const UniformCMPS& s1, const FixedPointPair& fp1, const UniformCMPS& s2,
                         const EvalOptions& opts) {
  s1.check();
  s2.check();
  const int D = s1.dim();
  require(s2.dim() == D, errc::shape_error, "states must share the bond dimension");
  const int q = s1.speciesCount();
  require(s2.speciesCount() == q, errc::shape_error, "states must share the species table");
  for (int a = 0; a < q; ++a)
    require(s1.species.fermionic(a) == s2.species.fermionic(a), errc::shape_error,
            "states must share species statistics");

  // T_mixed = Q2 (x) 1 + 1 (x) conj(Q1) + sum_a R2_a (x) conj(R1_a)
  Complex lambda;
  Matrix F;
  if (D <= opts.dense_budget) {
    const Matrix id = Matrix::Identity(D, D);
    Matrix t = detail::kron(s2.Q, id) + detail::kron(id, s1.Q.conjugate());
    for (int a = 0; a < q; ++a) t += detail::kron(s2.R[a], s1.R[a].conjugate());
    Eigen::ComplexEigenSolver<Matrix> es(t);
    require(es.info() == Eigen::Success, errc::solve_failed, "dense eigensolver failed");
    int best = 0;
    for (int i = 1; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
    lambda = es.eigenvalues()(best);
    F = detail::unvec(es.eigenvectors().col(best), D);
  } else {
    double bound = s1.Q.norm() + s2.Q.norm();
    for (int a = 0; a < q; ++a) bound += s1.R[a].norm() * s2.R[a].norm();
    detail::LinearOp lin{D * D, [&](const Vector& x) -> Vector {
                           const Matrix f = detail::unvec(x, D);
                           Matrix y = s2.Q * f + f * s1.Q.adjoint();
                           for (int a = 0; a < q; ++a)
                             y.noalias() += s2.R[a] * f * s1.R[a].adjoint();
                           return detail::vec(y);
                         }};
    const auto r = detail::arnoldi_leading_re(lin, bound, opts);
    lambda = r.lambda;
    F = detail::unvec(r.v, D);
  }

  MatchResult out;
  out.lambda = lambda;
  out.equivalent = std::abs(lambda.real()) <= 1e-9;
  if (!out.equivalent) return out;

  const double phi = lambda.imag();
  Matrix g = F * fp1.r.partialPivLu().solve(Matrix::Identity(D, D));
  // normalize the free scalar: unit Frobenius scale, largest entry real positive
  g *= std::sqrt(static_cast<double>(D)) / g.norm();
  Eigen::Index bi = 0, bj = 0;
  g.cwiseAbs().maxCoeff(&bi, &bj);
  g /= g(bi, bj) / std::abs(g(bi, bj));

  const Matrix ginv = g.partialPivLu().solve(Matrix::Identity(D, D));
  Matrix qrec = g * s1.Q * ginv;
  qrec.diagonal().array() += Complex(0, phi);
  double residual = (s2.Q - qrec).norm() / (1.0 + s2.Q.norm());
  for (int a = 0; a < q; ++a)
    residual = std::max(residual, (s2.R[a] - g * s1.R[a] * ginv).norm() / (1.0 + s2.R[a].norm()));

  out.g = std::move(g);
  out.phi = phi;
  out.residual = residual;
  return out;
}

}  // namespace cmps
