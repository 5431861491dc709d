#include "cmps/regularity.hpp"

namespace cmps {
namespace {

Eigen::MatrixXd first_order_residuals(const SpeciesTable& species, const std::vector<Matrix>& R) {
  const int q = species.count();
  Eigen::MatrixXd res(q, q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      res(a, b) = (species.eta(a, b) * R[b] * R[a] - R[a] * R[b]).norm();
  return res;
}

// m-fold nested commutator ad_Q^m(R) at a single point.
Matrix nested_commutator(const Matrix& Q, const Matrix& R, int m) {
  Matrix out = R;
  for (int k = 0; k < m; ++k) out = Q * out - out * Q;
  return out;
}

// Second-order first derivative of a sample track; one-sided at the ends.
std::vector<Matrix> differentiate(const std::vector<Matrix>& f, double h) {
  const int n = static_cast<int>(f.size());
  std::vector<Matrix> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (int k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

RegularityReport make_report(int order, Eigen::MatrixXd residuals, double tol) {
  RegularityReport rep;
  rep.order = order;
  rep.residuals = std::move(residuals);
  rep.tolerance = tol;
  rep.passed = rep.maxResidual() <= tol;
  return rep;
}

}  // namespace

RegularityReport check_first_order(const UniformCMPS& state, double tol) {
  return make_report(1, first_order_residuals(state.species, state.R), tol);
}

RegularityReport check_first_order(const FiniteCMPS& state, double tol) {
  const int q = state.speciesCount();
  Eigen::MatrixXd res = Eigen::MatrixXd::Zero(q, q);
  std::vector<Matrix> rs(q);
  for (size_t k = 0; k < state.Q.size(); ++k) {
    for (int a = 0; a < q; ++a) rs[a] = state.R[a][k];
    res = res.cwiseMax(first_order_residuals(state.species, rs));
  }
  return make_report(1, std::move(res), tol);
}

RegularityReport check_higher_order(const UniformCMPS& state, int order, double tol,
                                    int order_cap) {
  require(order >= 2, errc::bad_order, "higher-order check needs order >= 2");
  require(order <= order_cap, errc::bad_order,
          "requested order exceeds the configured cap of " + std::to_string(order_cap));
  const int q = state.speciesCount();
  const int m = order - 1;
  Eigen::MatrixXd res(q, q);
  for (int a = 0; a < q; ++a) {
    // all derivative terms vanish for constant matrices
    const Matrix d = nested_commutator(state.Q, state.R[a], m);
    for (int b = 0; b < q; ++b)
      res(a, b) = (d * state.R[b] - state.species.eta(a, b) * state.R[b] * d).norm();
  }
  return make_report(order, std::move(res), tol);
}

RegularityReport check_higher_order(
    const FiniteCMPS& state, int order,
    const std::optional<std::vector<std::vector<Matrix>>>& dR_samples, double tol,
    int order_cap) {
  require(order >= 2, errc::bad_order, "higher-order check needs order >= 2");
  require(order <= order_cap, errc::bad_order,
          "requested order exceeds the configured cap of " + std::to_string(order_cap));
  const int q = state.speciesCount();
  const int m = order - 1;
  const int n = static_cast<int>(state.Q.size());
  const double h = state.dx();
  if (dR_samples)
    require(static_cast<int>(dR_samples->size()) == q, errc::shape_error,
            "derivative data must cover every species");

  Eigen::MatrixXd res = Eigen::MatrixXd::Zero(q, q);
  for (int a = 0; a < q; ++a) {
    // D_m(a)(x) = sum_{k=0..m} d^{m-k}/dx^{m-k} [ ad_Q^k (R_a) ](x)
    std::vector<Matrix> total(n, Matrix::Zero(state.dim(), state.dim()));
    for (int k = 0; k <= m; ++k) {
      std::vector<Matrix> track(n);
      for (int s = 0; s < n; ++s) track[s] = nested_commutator(state.Q[s], state.R[a][s], k);
      int derivatives = m - k;
      if (k == 0 && dR_samples && derivatives >= 1) {
        track = (*dR_samples)[a];
        require(static_cast<int>(track.size()) == n, errc::shape_error,
                "derivative data grid mismatch");
        derivatives -= 1;
      }
      for (int d = 0; d < derivatives; ++d) track = differentiate(track, h);
      for (int s = 0; s < n; ++s) total[s] += track[s];
    }
    for (int b = 0; b < q; ++b) {
      const double eta = state.species.eta(a, b);
      double worst = 0.0;
      for (int s = 0; s < n; ++s)
        worst = std::max(worst,
                         (total[s] * state.R[b][s] - eta * state.R[b][s] * total[s]).norm());
      res(a, b) = worst;
    }
  }
  return make_report(order, std::move(res), tol);
}

ParityStructure ParityStructure::blocks(int Dplus, int Dminus) {
  require(Dplus >= 0 && Dminus >= 0 && Dplus + Dminus >= 1, errc::shape_error,
          "parity blocks must be nonnegative with positive total");
  ParityStructure p;
  p.Dplus = Dplus;
  p.Dminus = Dminus;
  p.P = Matrix::Identity(Dplus + Dminus, Dplus + Dminus);
  for (int i = Dplus; i < Dplus + Dminus; ++i) p.P(i, i) = -1.0;
  return p;
}

ParityReport check_parity(const UniformCMPS& state, const ParityStructure& parity, double tol) {
  require(parity.dim() == state.dim(), errc::shape_error, "parity dimension mismatch");
  const int D = state.dim();
  const int Dp = parity.Dplus;
  auto sector = [&](int i) { return i < Dp ? +1 : -1; };

  auto forbidden_max = [&](const Matrix& m, bool diagonal_allowed) {
    double worst = 0.0;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        const bool same = sector(i) == sector(j);
        if (same != diagonal_allowed) worst = std::max(worst, std::abs(m(i, j)));
      }
    return worst;
  };

  ParityReport rep;
  rep.q_residual = forbidden_max(state.Q, true);
  rep.max_residual = rep.q_residual;
  for (int a = 0; a < state.speciesCount(); ++a) {
    const bool block_diagonal = !state.species.fermionic(a);
    const double r = forbidden_max(state.R[a], block_diagonal);
    rep.r_residual.push_back(r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  rep.passed = rep.max_residual <= tol;
  return rep;
}

std::pair<UniformCMPS, ParityStructure> build_parity_state(
    const Matrix& Qplus, const Matrix& Qminus, const std::vector<ParityBlocks>& blocks,
    SpeciesTable species) {
  const int Dp = static_cast<int>(Qplus.rows());
  const int Dm = static_cast<int>(Qminus.rows());
  require(Qplus.cols() == Dp && Qminus.cols() == Dm, errc::shape_error, "Q blocks must be square");
  require(static_cast<int>(blocks.size()) == species.count(), errc::shape_error,
          "one block pair per species required");
  const int D = Dp + Dm;

  Matrix Q = Matrix::Zero(D, D);
  Q.topLeftCorner(Dp, Dp) = Qplus;
  Q.bottomRightCorner(Dm, Dm) = Qminus;

  std::vector<Matrix> R;
  for (int a = 0; a < species.count(); ++a) {
    const auto& blk = blocks[a];
    Matrix r = Matrix::Zero(D, D);
    if (species.fermionic(a)) {
      require(blk.first.rows() == Dp && blk.first.cols() == Dm, errc::shape_error,
              "fermionic block (+-) shape mismatch");
      require(blk.second.rows() == Dm && blk.second.cols() == Dp, errc::shape_error,
              "fermionic block (-+) shape mismatch");
      r.topRightCorner(Dp, Dm) = blk.first;
      r.bottomLeftCorner(Dm, Dp) = blk.second;
    } else {
      require(blk.first.rows() == Dp && blk.first.cols() == Dp, errc::shape_error,
              "bosonic block (+) shape mismatch");
      require(blk.second.rows() == Dm && blk.second.cols() == Dm, errc::shape_error,
              "bosonic block (-) shape mismatch");
      r.topLeftCorner(Dp, Dp) = blk.first;
      r.bottomRightCorner(Dm, Dm) = blk.second;
    }
    R.push_back(std::move(r));
  }

  UniformCMPS state{std::move(species), std::move(Q), std::move(R)};
  state.check();
  return {std::move(state), ParityStructure::blocks(Dp, Dm)};
}

}  // namespace cmps
