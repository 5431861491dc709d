#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmps/error.hpp"

namespace cmps {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Statistics { boson, fermion };

struct Species {
  std::string name;
  Statistics stats = Statistics::boson;
};

// Particle species and the sign table eta(a,b) = -1 iff both a and b are
// fermionic. eta is symmetric and eta(a,a) = -1 exactly for fermions.
class SpeciesTable {
 public:
  SpeciesTable() = default;
  static SpeciesTable build(const std::vector<Species>& entries);

  int count() const { return static_cast<int>(entries_.size()); }
  const std::vector<Species>& entries() const { return entries_; }
  const Species& at(int a) const { return entries_.at(a); }
  bool fermionic(int a) const { return entries_.at(a).stats == Statistics::fermion; }
  double eta(int a, int b) const;
  bool anyFermions() const;

 private:
  std::vector<Species> entries_;
};

// Selector among the plain transfer operator and its statistics-dressed
// variants: single(a) puts eta(a,g) in front of the R_g (x) conj(R_g) term,
// pair(a,b) puts eta(a,g)*eta(b,g). pair(a,a) coincides with plain.
struct TransferDressing {
  enum class Kind { plain, single, pair };
  Kind kind = Kind::plain;
  int alpha = -1;
  int beta = -1;

  static TransferDressing plain() { return {}; }
  static TransferDressing single(int alpha) { return {Kind::single, alpha, -1}; }
  static TransferDressing pair(int alpha, int beta) { return {Kind::pair, alpha, beta}; }
};

// Per-species sign s_g for a dressing; length q, all +1 for plain.
std::vector<double> dressing_signs(const SpeciesTable& species, const TransferDressing& dressing);

// Translation-invariant state: constant matrices (Q, {R_a}) of shared bond
// dimension D.
struct UniformCMPS {
  SpeciesTable species;
  Matrix Q;
  std::vector<Matrix> R;

  int dim() const { return static_cast<int>(Q.rows()); }
  int speciesCount() const { return species.count(); }
  void check() const;
};

enum class BoundaryKind { open, periodic };

// Grid-sampled state on [-L/2, L/2]: N+1 uniformly spaced samples of Q(x)
// and R_a(x), boundary vectors vL/vR (open) or boundary matrix B (periodic).
struct FiniteCMPS {
  SpeciesTable species;
  double L = 0.0;
  std::vector<Matrix> Q;                // N+1 samples
  std::vector<std::vector<Matrix>> R;   // [species][sample]
  Vector vL, vR;
  BoundaryKind boundary = BoundaryKind::open;
  Matrix B;                             // periodic only; defaults to identity

  int dim() const { return Q.empty() ? 0 : static_cast<int>(Q.front().rows()); }
  int speciesCount() const { return species.count(); }
  int gridSize() const { return static_cast<int>(Q.size()) - 1; }  // N intervals
  double dx() const { return L / gridSize(); }
  double x(int k) const { return -L / 2 + k * dx(); }
  void check() const;
};

namespace detail {

// Vectorization convention used throughout: vec stacks the rows of the ket
// factor, so that (A (x) conj(B)) vec(f) = vec(A f B^dag).
Vector vec(const Matrix& f);
Matrix unvec(const Vector& v, int rows, int cols);
inline Matrix unvec(const Vector& v, int dim) { return unvec(v, dim, dim); }

// kron(A,B)(i*Bm+j, k*Bn+l) = A(i,k) B(j,l)
Matrix kron(const Matrix& a, const Matrix& b);

inline Complex trace_pair(const Matrix& l, const Matrix& r) { return (l * r).trace(); }

void require_finite(const Matrix& m, const std::string& what);

bool is_hermitian(const Matrix& m, double tol);

// Hermitian square root / inverse square root via eigendecomposition with an
// eigenvalue floor guarding against PSD rounding noise.
Matrix hermitian_sqrt(const Matrix& m, double floor_rel = 1e-14);
Matrix hermitian_inv_sqrt(const Matrix& m, double floor_rel = 1e-14);
// Pseudo-inverse of a Hermitian PSD matrix with relative eigenvalue cutoff.
Matrix hermitian_pinv(const Matrix& m, double floor_rel = 1e-12);

double condition_estimate(const Matrix& m);

}  // namespace detail
}  // namespace cmps
