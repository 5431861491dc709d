#include "cmps/types.hpp"

#include <set>

namespace cmps {

const char* to_string(errc code) noexcept {
  switch (code) {
    case errc::duplicate_species: return "DuplicateSpecies";
    case errc::shape_error: return "ShapeError";
    case errc::not_hermitian: return "NotHermitian";
    case errc::bad_order: return "BadOrder";
    case errc::bad_generator: return "BadGenerator";
    case errc::grid_mismatch: return "GridMismatch";
    case errc::grid_too_coarse: return "GridTooCoarse";
    case errc::parse_error: return "ParseError";
    case errc::parity_required: return "ParityRequired";
    case errc::too_large_for_dense: return "TooLargeForDense";
    case errc::non_injective: return "NonInjective";
    case errc::bad_fixed_point: return "BadFixedPoint";
    case errc::singular_gauge: return "SingularGauge";
    case errc::bad_propagation: return "BadPropagation";
    case errc::ill_conditioned: return "IllConditioned";
    case errc::unstable: return "Unstable";
    case errc::solve_failed: return "SolveFailed";
    case errc::gauge_singular: return "GaugeSingular";
  }
  return "UnknownError";
}

bool is_validation_error(errc code) noexcept {
  switch (code) {
    case errc::duplicate_species:
    case errc::shape_error:
    case errc::not_hermitian:
    case errc::bad_order:
    case errc::bad_generator:
    case errc::grid_mismatch:
    case errc::grid_too_coarse:
    case errc::parse_error:
    case errc::parity_required:
    case errc::too_large_for_dense:
      return true;
    default:
      return false;
  }
}

SpeciesTable SpeciesTable::build(const std::vector<Species>& entries) {
  require(!entries.empty(), errc::shape_error, "species list must be nonempty");
  std::set<std::string> seen;
  for (const auto& s : entries) {
    if (!seen.insert(s.name).second)
      raise(errc::duplicate_species, "species name '" + s.name + "' appears twice");
  }
  SpeciesTable table;
  table.entries_ = entries;
  return table;
}

double SpeciesTable::eta(int a, int b) const {
  return (fermionic(a) && fermionic(b)) ? -1.0 : 1.0;
}

bool SpeciesTable::anyFermions() const {
  for (int a = 0; a < count(); ++a)
    if (fermionic(a)) return true;
  return false;
}

std::vector<double> dressing_signs(const SpeciesTable& species, const TransferDressing& d) {
  const int q = species.count();
  auto valid = [&](int a) { return a >= 0 && a < q; };
  std::vector<double> signs(q, 1.0);
  switch (d.kind) {
    case TransferDressing::Kind::plain:
      break;
    case TransferDressing::Kind::single:
      require(valid(d.alpha), errc::shape_error, "dressing species index out of range");
      for (int g = 0; g < q; ++g) signs[g] = species.eta(d.alpha, g);
      break;
    case TransferDressing::Kind::pair:
      require(valid(d.alpha) && valid(d.beta), errc::shape_error,
              "dressing species index out of range");
      for (int g = 0; g < q; ++g) signs[g] = species.eta(d.alpha, g) * species.eta(d.beta, g);
      break;
  }
  return signs;
}

void UniformCMPS::check() const {
  const int D = dim();
  require(D >= 1, errc::shape_error, "bond dimension must be positive");
  require(Q.rows() == D && Q.cols() == D, errc::shape_error, "Q must be square");
  require(static_cast<int>(R.size()) == species.count(), errc::shape_error,
          "one R matrix per species required");
  detail::require_finite(Q, "Q");
  for (const auto& r : R) {
    require(r.rows() == D && r.cols() == D, errc::shape_error, "R dimension mismatch");
    detail::require_finite(r, "R");
  }
}

void FiniteCMPS::check() const {
  const int N = gridSize();
  require(N >= 2, errc::shape_error, "finite state needs at least 2 grid intervals");
  require(L > 0, errc::shape_error, "length must be positive");
  const int D = dim();
  require(D >= 1, errc::shape_error, "bond dimension must be positive");
  require(static_cast<int>(R.size()) == species.count(), errc::shape_error,
          "one R sample track per species required");
  for (const auto& q : Q) {
    require(q.rows() == D && q.cols() == D, errc::shape_error, "Q sample dimension mismatch");
    detail::require_finite(q, "Q sample");
  }
  for (const auto& track : R) {
    require(track.size() == Q.size(), errc::shape_error, "R track length mismatch");
    for (const auto& r : track) {
      require(r.rows() == D && r.cols() == D, errc::shape_error, "R sample dimension mismatch");
      detail::require_finite(r, "R sample");
    }
  }
  require(vL.size() == D && vR.size() == D, errc::shape_error, "boundary vector dimension mismatch");
  if (boundary == BoundaryKind::periodic) {
    const double tol = 1e-10 * (1.0 + Q.front().norm());
    require((Q.front() - Q.back()).norm() <= tol, errc::shape_error,
            "periodic state requires Q(-L/2) == Q(+L/2)");
    for (int a = 0; a < speciesCount(); ++a) {
      const double rtol = 1e-10 * (1.0 + R[a].front().norm());
      require((R[a].front() - R[a].back()).norm() <= rtol, errc::shape_error,
              "periodic state requires R(-L/2) == R(+L/2)");
    }
    if (B.size() > 0)
      require(B.rows() == D && B.cols() == D, errc::shape_error, "B dimension mismatch");
  }
}

namespace detail {

Vector vec(const Matrix& f) {
  const int rows = static_cast<int>(f.rows());
  const int cols = static_cast<int>(f.cols());
  Vector v(rows * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) v(i * cols + j) = f(i, j);
  return v;
}

Matrix unvec(const Vector& v, int rows, int cols) {
  require(v.size() == rows * cols, errc::shape_error, "unvec size mismatch");
  Matrix f(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) f(i, j) = v(i * cols + j);
  return f;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
  return out;
}

void require_finite(const Matrix& m, const std::string& what) {
  require(m.allFinite(), errc::shape_error, what + " contains non-finite entries");
}

bool is_hermitian(const Matrix& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Matrix hermitian_sqrt(const Matrix& m, double floor_rel) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues();
  const double floor = floor_rel * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), floor));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix hermitian_inv_sqrt(const Matrix& m, double floor_rel) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues();
  const double floor = floor_rel * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < ev.size(); ++i) ev(i) = 1.0 / std::sqrt(std::max(ev(i), floor));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix hermitian_pinv(const Matrix& m, double floor_rel) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues();
  const double cutoff = floor_rel * std::max(1e-300, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < ev.size(); ++i) ev(i) = std::abs(ev(i)) > cutoff ? 1.0 / ev(i) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double condition_estimate(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / sv(sv.size() - 1);
}

}  // namespace detail
}  // namespace cmps
