#include "cmps/lattice.hpp"

#include <functional>

#include <unsupported/Eigen/MatrixFunctions>

#include "cmps/transfer.hpp"

namespace cmps {
namespace {

LatticeMPS::SiteBasis make_basis(const SpeciesTable& species, int nmax) {
  LatticeMPS::SiteBasis basis;
  basis.labels.push_back({-1, -1, 0, 1.0});  // vacuum
  for (int a = 0; a < species.count(); ++a) basis.labels.push_back({a, -1, 1, 1.0});
  if (nmax >= 2) {
    for (int a = 0; a < species.count(); ++a)
      for (int b = a; b < species.count(); ++b) {
        if (a == b && species.fermionic(a)) continue;  // Pauli-excluded
        basis.labels.push_back({a, b, 2, a == b ? 2.0 : 1.0});
      }
  }
  if (nmax >= 3) basis.labels.push_back({0, 0, 3, 6.0});  // single bosonic species only
  return basis;
}

std::vector<Matrix> site_tensors(const LatticeMPS::SiteBasis& basis, const SpeciesTable& species,
                                 double a, const Matrix& Q, const std::vector<Matrix>& R) {
  const int D = static_cast<int>(Q.rows());
  std::vector<Matrix> out;
  out.reserve(basis.labels.size());
  for (const auto& s : basis.labels) {
    if (s.particles == 0) {
      out.push_back(Matrix::Identity(D, D) + a * Q);
    } else if (s.particles == 1) {
      out.push_back(std::sqrt(a) * R[s.na]);
    } else if (s.particles == 3) {
      out.push_back((std::pow(a, 1.5) / 6.0) * (R[0] * R[0] * R[0]));
    } else if (s.na == s.nb) {
      out.push_back((a / 2.0) * (R[s.na] * R[s.na]));
    } else {
      const double eta = species.eta(s.na, s.nb);
      out.push_back((a / 2.0) * (R[s.na] * R[s.nb] + eta * R[s.nb] * R[s.na]));
    }
  }
  return out;
}

void check_nmax(int nmax, const SpeciesTable& species) {
  require(nmax >= 1 && nmax <= 3, errc::shape_error, "occupation cutoff must be 1, 2 or 3");
  if (nmax == 3)
    require(species.count() == 1 && !species.fermionic(0), errc::shape_error,
            "the three-particle block is provided for a single bosonic species");
}

// E_O = sum_{s,s'} <s'|O|s> A^s (x) conj(A^{s'}) for a site-diagonal operator
// with eigenvalue op(s) on the occupancy label.
Matrix diagonal_insertion(const LatticeMPS& mps, const std::vector<Matrix>& tensors,
                          const std::function<double(const LatticeMPS::SiteBasis::Label&)>& op) {
  const int D = static_cast<int>(tensors.front().rows());
  Matrix e = Matrix::Zero(D * D, D * D);
  for (size_t s = 0; s < mps.basis.labels.size(); ++s) {
    const auto& lab = mps.basis.labels[s];
    e += op(lab) * lab.gram * detail::kron(tensors[s], tensors[s].conjugate());
  }
  return e;
}

struct HopPair {
  Matrix annihilate;  // E-insertion of c at a site
  Matrix create;      // E-insertion of c^dag at a site
};

// Single-boson matrix elements in the unnormalized occupancy basis:
// c|1> = |0>, c|2> = 2|1>; c^dag|0> = |1>, c^dag|1> = |2>.
HopPair hop_insertions(const LatticeMPS& mps, const std::vector<Matrix>& tensors) {
  const int D = static_cast<int>(tensors.front().rows());
  HopPair hp{Matrix::Zero(D * D, D * D), Matrix::Zero(D * D, D * D)};
  auto find = [&](int particles) -> int {
    for (size_t s = 0; s < mps.basis.labels.size(); ++s)
      if (mps.basis.labels[s].particles == particles) return static_cast<int>(s);
    return -1;
  };
  const int i0 = find(0), i1 = find(1), i2 = find(2), i3 = find(3);
  // <0|c|1> = 1
  hp.annihilate += detail::kron(tensors[i1], tensors[i0].conjugate());
  // <1|c^dag|0> = 1
  hp.create += detail::kron(tensors[i0], tensors[i1].conjugate());
  if (i2 >= 0) {
    // <1|c|2> = 2, <2|c^dag|1> = 2
    hp.annihilate += 2.0 * detail::kron(tensors[i2], tensors[i1].conjugate());
    hp.create += 2.0 * detail::kron(tensors[i1], tensors[i2].conjugate());
  }
  if (i3 >= 0) {
    // <2|c|3> = 6, <3|c^dag|2> = 6 in the unnormalized occupancy basis
    hp.annihilate += 6.0 * detail::kron(tensors[i3], tensors[i2].conjugate());
    hp.create += 6.0 * detail::kron(tensors[i2], tensors[i3].conjugate());
  }
  return hp;
}

}  // namespace

LatticeMPS discretize(const UniformCMPS& state, double a, int nmax) {
  state.check();
  check_nmax(nmax, state.species);
  require(a > 0, errc::shape_error, "lattice spacing must be positive");
  LatticeMPS mps;
  mps.a = a;
  mps.nmax = nmax;
  mps.uniform = true;
  mps.species = state.species;
  mps.basis = make_basis(state.species, nmax);
  mps.tensors.push_back(site_tensors(mps.basis, state.species, a, state.Q, state.R));
  return mps;
}

LatticeMPS discretize(const FiniteCMPS& state, double a, int nmax) {
  state.check();
  check_nmax(nmax, state.species);
  require(a > 0, errc::shape_error, "lattice spacing must be positive");
  const double ratio = a / state.dx();
  const int stride = static_cast<int>(std::round(ratio));
  require(stride >= 1 && std::abs(ratio - stride) < 1e-9, errc::grid_mismatch,
          "lattice spacing must be an integer multiple of the sample spacing");
  LatticeMPS mps;
  mps.a = a;
  mps.nmax = nmax;
  mps.uniform = false;
  mps.species = state.species;
  mps.vL = state.vL;
  mps.vR = state.vR;
  mps.basis = make_basis(state.species, nmax);
  const int sites = state.gridSize() / stride;
  std::vector<Matrix> rs(state.speciesCount());
  for (int n = 0; n < sites; ++n) {
    const int k = n * stride;
    for (int s = 0; s < state.speciesCount(); ++s) rs[s] = state.R[s][k];
    mps.tensors.push_back(site_tensors(mps.basis, state.species, a, state.Q[k], rs));
  }
  return mps;
}

double lattice_transfer_check(const UniformCMPS& state, double a) {
  const LatticeMPS mps = discretize(state, a, 2);
  const auto& tensors = mps.tensors.front();
  const int D = state.dim();
  Matrix e = Matrix::Zero(D * D, D * D);
  for (size_t s = 0; s < mps.basis.labels.size(); ++s)
    e += mps.basis.labels[s].gram * detail::kron(tensors[s], tensors[s].conjugate());
  const Matrix t = dense_transfer(state, TransferDressing::plain(), 16);
  return (e - Matrix::Identity(D * D, D * D) - a * t).norm();
}

namespace {

double op_density(const LatticeMPS::SiteBasis::Label& s) {
  return static_cast<double>(s.particles);
}
double op_pair(const LatticeMPS::SiteBasis::Label& s) {
  return static_cast<double>(s.particles * (s.particles - 1));
}
double op_norm(const LatticeMPS::SiteBasis::Label&) { return 1.0; }

void check_single_species(const LatticeMPS& mps) {
  require(mps.species.count() == 1, errc::shape_error,
          "lattice observables are defined for single-species states");
}

}  // namespace

LatticeObservables lattice_observables(const LatticeMPS& mps, double mass) {
  check_single_species(mps);
  require(mps.uniform, errc::shape_error, "use lattice_observables_finite for finite chains");
  require(mass > 0, errc::shape_error, "mass must be positive");
  const double a = mps.a;

  const auto& tensors = mps.tensors.front();
  const int D = static_cast<int>(tensors.front().rows());
  require(D <= 6, errc::too_large_for_dense, "lattice oracle is restricted to D <= 6");
  const Matrix e = diagonal_insertion(mps, tensors, op_norm);
  Eigen::ComplexEigenSolver<Matrix> es(e);
  require(es.info() == Eigen::Success, errc::solve_failed, "dense eigensolver failed");
  int best = 0;
  for (int i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(best))) best = i;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (i != best)
      require(std::abs(es.eigenvalues()(i)) < std::abs(es.eigenvalues()(best)) * (1.0 - 1e-12),
              errc::non_injective, "lattice transfer operator has a degenerate leading value");
  const Complex lambda = es.eigenvalues()(best);

  Eigen::ComplexEigenSolver<Matrix> esa(e.adjoint());
  require(esa.info() == Eigen::Success, errc::solve_failed, "dense eigensolver failed");
  int bestl = 0;
  for (int i = 1; i < esa.eigenvalues().size(); ++i)
    if (std::abs(esa.eigenvalues()(i)) > std::abs(esa.eigenvalues()(bestl))) bestl = i;

  const Vector rv = es.eigenvectors().col(best);
  Vector lv = esa.eigenvectors().col(bestl);
  const Complex pairing = lv.dot(rv);
  require(std::abs(pairing) > 1e-14, errc::non_injective, "degenerate lattice fixed points");
  lv /= std::conj(pairing);  // (l|r) = 1

  auto expect = [&](const Matrix& ins) { return lv.dot(ins * rv); };
  LatticeObservables out;
  out.norm = std::abs(lambda);
  const Complex den_site = expect(diagonal_insertion(mps, tensors, op_density)) / lambda;
  out.density = den_site.real() / a;
  out.pair_density = (expect(diagonal_insertion(mps, tensors, op_pair)) / lambda).real() / (a * a);

  require(!mps.species.fermionic(0), errc::shape_error,
          "forward-difference kinetic term is implemented for bosonic statistics");
  const HopPair hp = hop_insertions(mps, tensors);
  const Complex hop = expect(hp.annihilate * hp.create) / (lambda * lambda);
  out.kinetic_fd = (2.0 * den_site.real() - 2.0 * hop.real()) / (a * a * a) / (2.0 * mass);
  return out;
}

FiniteLatticeObservables lattice_observables_finite(const LatticeMPS& mps, double mass) {
  check_single_species(mps);
  require(!mps.uniform, errc::shape_error, "use lattice_observables for uniform states");
  require(mass > 0, errc::shape_error, "mass must be positive");
  const int sites = mps.sites();
  require(sites >= 2, errc::shape_error, "finite lattice needs at least 2 sites");
  const int D = static_cast<int>(mps.tensors.front().front().rows());
  require(mps.vL.size() == D && mps.vR.size() == D, errc::shape_error,
          "finite lattice is missing boundary vectors");
  const double a = mps.a;

  std::vector<Matrix> e(sites);
  for (int n = 0; n < sites; ++n) e[n] = diagonal_insertion(mps, mps.tensors[n], op_norm);

  // prefix(n) = bra through sites < n, suffix(n) = ket through sites >= n
  const Vector bra0 = detail::vec(Matrix(mps.vL * mps.vL.adjoint()));
  const Vector ket0 = detail::vec(Matrix(mps.vR * mps.vR.adjoint()));
  std::vector<Vector> prefix(sites + 1), suffix(sites + 1);
  prefix[0] = bra0;
  for (int n = 0; n < sites; ++n) prefix[n + 1] = e[n].adjoint() * prefix[n];
  suffix[sites] = ket0;
  for (int n = sites - 1; n >= 0; --n) suffix[n] = e[n] * suffix[n + 1];

  FiniteLatticeObservables out;
  const Complex norm = prefix[0].dot(suffix[0]);
  out.norm = norm.real();
  require(std::abs(norm) > 1e-300, errc::bad_propagation, "lattice norm vanished");

  auto insert_one = [&](int n, const Matrix& ins) {
    return prefix[n].dot(ins * suffix[n + 1]) / norm;
  };

  out.density_profile.resize(sites);
  for (int n = 0; n < sites; ++n) {
    out.density_profile[n] =
        insert_one(n, diagonal_insertion(mps, mps.tensors[n], op_density)).real() / a;
    out.pair_integral +=
        insert_one(n, diagonal_insertion(mps, mps.tensors[n], op_pair)).real() / a;
  }

  require(!mps.species.fermionic(0), errc::shape_error,
          "forward-difference kinetic term is implemented for bosonic statistics");
  for (int n = 0; n + 1 < sites; ++n) {
    const HopPair hn = hop_insertions(mps, mps.tensors[n]);
    const HopPair hn1 = hop_insertions(mps, mps.tensors[n + 1]);
    const Complex hop = prefix[n].dot(hn.annihilate * (hn1.create * suffix[n + 2])) / norm;
    const double dn = out.density_profile[n] * a;
    const double dn1 = out.density_profile[n + 1] * a;
    out.kinetic_fd_integral += (dn + dn1 - 2.0 * hop.real()) / (a * a) / (2.0 * mass);
  }
  return out;
}

double verify_commutator_identity(const std::vector<Matrix>& A_samples, const Matrix& B,
                                  double x0, double x1) {
  const int steps = static_cast<int>(A_samples.size()) - 1;
  require(steps >= 16, errc::shape_error, "commutator identity check needs at least 16 steps");
  require(x1 > x0, errc::shape_error, "interval must be nonempty");
  const int D = static_cast<int>(B.rows());
  for (const auto& m : A_samples)
    require(m.rows() == D && m.cols() == D, errc::shape_error, "sample dimension mismatch");
  const double h = (x1 - x0) / steps;

  // ordered products: prefix[k] = U(x0, z_k), suffix[k] = U(z_k, x1)
  std::vector<Matrix> prefix(steps + 1), suffix(steps + 1);
  prefix[0] = Matrix::Identity(D, D);
  suffix[steps] = Matrix::Identity(D, D);
  std::vector<Matrix> step_exp(steps);
  for (int k = 0; k < steps; ++k)
    step_exp[k] = ((h / 2.0) * (A_samples[k] + A_samples[k + 1])).exp();
  for (int k = 0; k < steps; ++k) prefix[k + 1] = prefix[k] * step_exp[k];
  for (int k = steps - 1; k >= 0; --k) suffix[k] = step_exp[k] * suffix[k + 1];

  const Matrix lhs = prefix[steps] * B - B * prefix[steps];
  Matrix rhs = Matrix::Zero(D, D);
  for (int k = 0; k <= steps; ++k) {
    const double w = (k == 0 || k == steps) ? h / 2.0 : h;
    const Matrix comm = A_samples[k] * B - B * A_samples[k];
    rhs += w * (prefix[k] * comm * suffix[k]);
  }
  return (lhs - rhs).norm();
}

}  // namespace cmps
