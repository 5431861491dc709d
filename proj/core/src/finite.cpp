#include "cmps/finite.hpp"

#include "ode.hpp"

namespace cmps {
namespace {

using detail::Midpoint;

struct CoeffSet {
  const Matrix* q;
  std::vector<const Matrix*> r;
};

// One RK4 step of dY/dx = sign * T_side(Y) + source between samples k and
// k+dir, with coefficients interpolated at the half point.
class GridFlow {
 public:
  GridFlow(const FiniteCMPS& state, std::vector<double> signs, Side side, double sign,
           Midpoint rule)
      : state_(state), signs_(std::move(signs)), side_(side), sign_(sign), rule_(rule) {}

  Matrix rhs(const Matrix& q, const std::vector<Matrix>& rs, const Matrix& y) const {
    return sign_ * transfer_apply(q, rs, signs_, y, side_);
  }

  void coefficients(int k, Matrix& q, std::vector<Matrix>& rs) const {
    q = state_.Q[k];
    rs.resize(state_.speciesCount());
    for (int a = 0; a < state_.speciesCount(); ++a) rs[a] = state_.R[a][k];
  }

  void mid_coefficients(int k, Matrix& q, std::vector<Matrix>& rs) const {
    q = detail::midpoint_value(state_.Q, k, rule_);
    rs.resize(state_.speciesCount());
    for (int a = 0; a < state_.speciesCount(); ++a)
      rs[a] = detail::midpoint_value(state_.R[a], k, rule_);
  }

  // Steps y from sample k to sample k+1 (forward) or k+1 to k (backward).
  Matrix step(const Matrix& y, int interval, bool forward, double h) const {
    Matrix q0, qm, q1;
    std::vector<Matrix> r0, rm, r1;
    coefficients(forward ? interval : interval + 1, q0, r0);
    mid_coefficients(interval, qm, rm);
    coefficients(forward ? interval + 1 : interval, q1, r1);
    const double hh = forward ? h : -h;
    const Matrix k1 = rhs(q0, r0, y);
    const Matrix k2 = rhs(qm, rm, y + (hh / 2) * k1);
    const Matrix k3 = rhs(qm, rm, y + (hh / 2) * k2);
    const Matrix k4 = rhs(q1, r1, y + hh * k3);
    return y + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

 private:
  const FiniteCMPS& state_;
  std::vector<double> signs_;
  Side side_;
  double sign_;
  Midpoint rule_;
};

std::vector<double> plain_signs(const FiniteCMPS& s) {
  return std::vector<double>(s.speciesCount(), 1.0);
}

void check_open(const FiniteCMPS& state, const char* what) {
  require(state.boundary == BoundaryKind::open, errc::shape_error,
          std::string(what) + " requires open boundaries");
}

void check_species(const FiniteCMPS& state, int a) {
  require(a >= 0 && a < state.speciesCount(), errc::shape_error, "species index out of range");
}

// Propagates the bra-side insertion matrix v along [k0, k1] under the dressed
// left action dv/dx = Tt_signs(v).
Matrix propagate_bra(const FiniteCMPS& state, std::vector<double> signs, Matrix v, int k0,
                     int k1) {
  GridFlow flow(state, std::move(signs), Side::left, +1.0, Midpoint::cubic);
  const double h = state.dx();
  for (int k = k0; k < k1; ++k) v = flow.step(v, k, true, h);
  return v;
}

double kernel_value(const InteractionKernel& w, double z) {
  switch (w.kind) {
    case InteractionKernel::Kind::delta:
      return 0.0;  // handled analytically
    case InteractionKernel::Kind::exponential:
      return w.c * std::exp(-z / w.ell);
    case InteractionKernel::Kind::tabulated: {
      if (w.z.empty() || z < w.z.front() || z > w.z.back()) return 0.0;
      const auto it = std::upper_bound(w.z.begin(), w.z.end(), z);
      const size_t j = std::min(w.z.size() - 1, static_cast<size_t>(it - w.z.begin()));
      if (j == 0) return w.w.front();
      const double t = (z - w.z[j - 1]) / (w.z[j] - w.z[j - 1]);
      return (1 - t) * w.w[j - 1] + t * w.w[j];
    }
  }
  return 0.0;
}

double kernel_range(const InteractionKernel& w, double L) {
  switch (w.kind) {
    case InteractionKernel::Kind::delta:
      return 0.0;
    case InteractionKernel::Kind::exponential:
      return std::min(L, 40.0 * w.ell);
    case InteractionKernel::Kind::tabulated:
      return w.z.empty() ? 0.0 : std::min(L, w.z.back());
  }
  return 0.0;
}

}  // namespace

VirtualDensityPair propagate(const FiniteCMPS& state) {
  state.check();
  check_open(state, "propagate");
  const int n = static_cast<int>(state.Q.size());
  const double h = state.dx();

  VirtualDensityPair out;
  out.l.resize(n);
  out.r.resize(n);

  GridFlow lflow(state, plain_signs(state), Side::left, +1.0, Midpoint::cubic);
  Matrix l = state.vL * state.vL.adjoint();
  const double lscale = std::max(1.0, l.norm());
  out.l[0] = l;
  for (int k = 0; k + 1 < n; ++k) {
    l = lflow.step(l, k, true, h);
    l = (l + l.adjoint()) / 2.0;
    require(l.norm() < 1e6 * lscale, errc::unstable, "l(x) propagation is unstable");
    out.l[k + 1] = l;
  }

  GridFlow rflow(state, plain_signs(state), Side::right, -1.0, Midpoint::cubic);
  Matrix r = state.vR * state.vR.adjoint();
  const double rscale = std::max(1.0, r.norm());
  out.r[n - 1] = r;
  for (int k = n - 2; k >= 0; --k) {
    r = rflow.step(r, k, false, h);
    r = (r + r.adjoint()) / 2.0;
    require(r.norm() < 1e6 * rscale, errc::unstable, "r(x) propagation is unstable");
    out.r[k] = r;
  }

  const int mid = (n - 1) / 2;
  out.norm = (out.l[mid] * out.r[mid]).trace().real();
  require(out.norm > 0, errc::bad_propagation, "state norm came out nonpositive");
  for (int k = 0; k < n; ++k) {
    const double v = (out.l[k] * out.r[k]).trace().real();
    out.norm_drift = std::max(out.norm_drift, std::abs(v - out.norm));
  }
  return out;
}

double state_norm(const FiniteCMPS& state, const VirtualDensityPair& vdp) {
  require(vdp.l.size() == state.Q.size(), errc::shape_error,
          "environments do not match the state grid");
  return vdp.norm;
}

std::vector<Complex> density_profile(const FiniteCMPS& state, const VirtualDensityPair& vdp,
                                     int a, int b, bool normalized) {
  check_species(state, a);
  check_species(state, b);
  const int n = static_cast<int>(state.Q.size());
  std::vector<Complex> out(n);
  const double scale = normalized ? vdp.norm : 1.0;
  for (int k = 0; k < n; ++k)
    out[k] = (vdp.l[k] * state.R[b][k] * vdp.r[k] * state.R[a][k].adjoint()).trace() / scale;
  return out;
}

Complex two_point(const FiniteCMPS& state, const VirtualDensityPair& vdp, int a, int b, int ix,
                  int iy, bool normalized) {
  check_open(state, "two_point");
  check_species(state, a);
  check_species(state, b);
  const int n = static_cast<int>(state.Q.size());
  require(ix >= 0 && ix < n && iy >= 0 && iy < n, errc::shape_error, "grid index out of range");

  const int k_min = std::min(ix, iy);
  const auto pair_signs = dressing_signs(state.species, TransferDressing::pair(a, b));

  // bra environment dressed with T_{a,b} up to the first insertion
  Matrix lab = state.vL * state.vL.adjoint();
  lab = propagate_bra(state, pair_signs, std::move(lab), 0, k_min);

  Complex value;
  if (ix == iy) {
    value = (state.R[a][ix].adjoint() * lab * state.R[b][iy] * vdp.r[ix]).trace();
  } else if (ix > iy) {
    Matrix v = lab * state.R[b][iy];
    v = propagate_bra(state, dressing_signs(state.species, TransferDressing::single(a)),
                      std::move(v), iy, ix);
    value = (state.R[a][ix].adjoint() * v * vdp.r[ix]).trace();
  } else {
    Matrix v = state.R[a][ix].adjoint() * lab;
    v = propagate_bra(state, dressing_signs(state.species, TransferDressing::single(b)),
                      std::move(v), ix, iy);
    value = (v * state.R[b][iy] * vdp.r[iy]).trace();
  }
  return normalized ? value / vdp.norm : value;
}

std::vector<Complex> pair_correlation(const FiniteCMPS& state, const VirtualDensityPair& vdp,
                                      int a, int ix0, bool normalized) {
  check_open(state, "pair_correlation");
  check_species(state, a);
  const int n = static_cast<int>(state.Q.size());
  require(ix0 >= 0 && ix0 < n, errc::shape_error, "grid index out of range");
  const double scale = normalized ? vdp.norm : 1.0;

  GridFlow flow(state, plain_signs(state), Side::left, +1.0, Midpoint::cubic);
  Matrix v = state.R[a][ix0].adjoint() * vdp.l[ix0] * state.R[a][ix0];
  std::vector<Complex> out;
  for (int j = ix0; j < n; ++j) {
    if (j > ix0) v = flow.step(v, j - 1, true, state.dx());
    out.push_back((v * state.R[a][j] * vdp.r[j] * state.R[a][j].adjoint()).trace() / scale);
  }
  return out;
}

FiniteEnergy energy(const FiniteCMPS& state, const VirtualDensityPair& vdp,
                    const std::vector<double>& masses, const std::vector<double>& v_samples,
                    const InteractionKernel& w, bool normalized) {
  check_open(state, "energy");
  const int q = state.speciesCount();
  const int n = static_cast<int>(state.Q.size());
  require(static_cast<int>(masses.size()) == q, errc::shape_error, "one mass per species required");
  require(state.gridSize() >= 16, errc::grid_too_coarse,
          "energy evaluation needs at least 16 grid intervals");
  require(v_samples.empty() || static_cast<int>(v_samples.size()) == n, errc::shape_error,
          "potential samples must match the grid");

  const double h = state.dx();
  const auto weights = detail::trapezoid_weights(n, h);
  FiniteEnergy out;
  auto take_real = [&out](Complex z) {
    out.max_imag = std::max(out.max_imag, std::abs(z.imag()));
    return z.real();
  };

  for (int a = 0; a < q; ++a) {
    require(masses[a] > 0, errc::shape_error, "masses must be positive");
    const auto dR = detail::central_derivative(state.R[a], h);
    for (int k = 0; k < n; ++k) {
      const Matrix d = state.Q[k] * state.R[a][k] - state.R[a][k] * state.Q[k] + dR[k];
      out.kinetic += weights[k] *
                     take_real((vdp.l[k] * d * vdp.r[k] * d.adjoint()).trace()) /
                     (2.0 * masses[a]);
      if (!v_samples.empty())
        out.potential +=
            weights[k] * v_samples[k] *
            take_real((vdp.l[k] * state.R[a][k] * vdp.r[k] * state.R[a][k].adjoint()).trace());
    }
  }

  if (w.kind == InteractionKernel::Kind::delta) {
    for (int a = 0; a < q; ++a)
      for (int k = 0; k < n; ++k) {
        const Matrix rr = state.R[a][k] * state.R[a][k];
        out.interaction +=
            w.c * weights[k] * take_real((vdp.l[k] * rr * vdp.r[k] * rr.adjoint()).trace());
      }
  } else {
    const double range = kernel_range(w, state.L);
    const int span = std::min(n - 1, static_cast<int>(std::ceil(range / h)));
    GridFlow flow(state, plain_signs(state), Side::left, +1.0, Midpoint::cubic);
    for (int a = 0; a < q; ++a) {
      for (int k = 0; k < n; ++k) {
        const int k_end = std::min(n - 1, k + span);
        if (k_end == k) continue;
        Matrix v = state.R[a][k].adjoint() * vdp.l[k] * state.R[a][k];
        Complex inner(0, 0);
        for (int j = k; j <= k_end; ++j) {
          if (j > k) v = flow.step(v, j - 1, true, h);
          const double wj = (j == k || j == k_end) ? h / 2.0 : h;
          inner += wj * kernel_value(w, state.x(j) - state.x(k)) *
                   (v * state.R[a][j] * vdp.r[j] * state.R[a][j].adjoint()).trace();
        }
        out.interaction += weights[k] * take_real(inner);
      }
    }
  }

  if (normalized) {
    out.kinetic /= vdp.norm;
    out.potential /= vdp.norm;
    out.interaction /= vdp.norm;
  }
  return out;
}

BoundaryReport boundary_check(const FiniteCMPS& state) {
  check_open(state, "boundary_check");
  BoundaryReport rep;
  const int n = static_cast<int>(state.Q.size());
  for (int a = 0; a < state.speciesCount(); ++a) {
    rep.left.push_back((state.vL.adjoint() * state.R[a][0]).norm());
    rep.right.push_back((state.R[a][n - 1] * state.vR).norm());
  }
  return rep;
}

}  // namespace cmps
