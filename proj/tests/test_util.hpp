#pragma once

// Shared generators and independent (naive) linear-algebra oracles for the
// test suites. Everything is seeded; nothing here touches the library's
// internal solver paths.

#include <complex>
#include <random>
#include <vector>

#include "cmps/gauge.hpp"
#include "cmps/transfer.hpp"
#include "cmps/types.hpp"

namespace testutil {

using cmps::Complex;
using cmps::Matrix;
using cmps::Vector;

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * Complex(dist(rng), dist(rng));
  return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, int dim, double scale = 1.0) {
  const Matrix m = random_matrix(rng, dim, dim, scale);
  return (m + m.adjoint()) / 2.0;
}

inline Vector random_vector(std::mt19937_64& rng, int dim, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = scale * Complex(dist(rng), dist(rng));
  return v;
}

inline cmps::SpeciesTable bosons(int q) {
  std::vector<cmps::Species> entries;
  for (int a = 0; a < q; ++a)
    entries.push_back({"b" + std::to_string(a), cmps::Statistics::boson});
  return cmps::SpeciesTable::build(entries);
}

inline cmps::SpeciesTable single_fermion() {
  return cmps::SpeciesTable::build({{"f", cmps::Statistics::fermion}});
}

inline cmps::UniformCMPS random_uniform(std::mt19937_64& rng, int D, int q = 1,
                                        double scale = 0.8) {
  cmps::UniformCMPS s;
  s.species = bosons(q);
  s.Q = random_matrix(rng, D, D, scale);
  for (int a = 0; a < q; ++a) s.R.push_back(random_matrix(rng, D, D, scale));
  return s;
}

inline cmps::UniformCMPS random_left_orthonormal(std::mt19937_64& rng, int D, int q = 1,
                                                 double scale = 0.8) {
  std::vector<Matrix> rs;
  for (int a = 0; a < q; ++a) rs.push_back(random_matrix(rng, D, D, scale));
  return cmps::construct_left_orthonormal(random_hermitian(rng, D, scale), rs, bosons(q));
}

// Invertible gauge with condition number <= 10^{spread}.
inline Matrix random_gauge(std::mt19937_64& rng, int D, double spread = 1.0) {
  const Eigen::HouseholderQR<Matrix> qr1(random_matrix(rng, D, D));
  const Eigen::HouseholderQR<Matrix> qr2(random_matrix(rng, D, D));
  const Matrix u = qr1.householderQ();
  const Matrix v = qr2.householderQ();
  std::uniform_real_distribution<double> dist(-spread / 2.0, spread / 2.0);
  Eigen::VectorXd sv(D);
  for (int i = 0; i < D; ++i) sv(i) = std::pow(10.0, dist(rng));
  return u * sv.asDiagonal() * v.adjoint();
}

// Smooth finite state from a few low-order Fourier modes.
inline cmps::FiniteCMPS random_finite(std::mt19937_64& rng, int D, int N, double L = 1.0,
                                      int q = 1, double scale = 0.6, int modes = 2) {
  cmps::FiniteCMPS s;
  s.species = bosons(q);
  s.L = L;
  auto track = [&](double amp) {
    std::vector<Matrix> out(N + 1);
    const Matrix base = random_matrix(rng, D, D, amp);
    std::vector<Matrix> cs, sn;
    for (int m = 1; m <= modes; ++m) {
      cs.push_back(random_matrix(rng, D, D, amp / (m * m)));
      sn.push_back(random_matrix(rng, D, D, amp / (m * m)));
    }
    for (int k = 0; k <= N; ++k) {
      const double t = 2.0 * M_PI * k / N;
      Matrix v = base;
      for (int m = 1; m <= modes; ++m)
        v += std::cos(m * t) * cs[m - 1] + std::sin(m * t) * sn[m - 1];
      out[k] = v;
    }
    return out;
  };
  s.Q = track(scale);
  for (int a = 0; a < q; ++a) s.R.push_back(track(scale));
  s.vL = random_vector(rng, D);
  s.vL.normalize();
  s.vR = random_vector(rng, D);
  s.vR.normalize();
  return s;
}

// ---- naive oracles (independent multiply/kron routines) ----

using NaiveMatrix = std::vector<std::vector<Complex>>;

inline NaiveMatrix to_naive(const Matrix& m) {
  NaiveMatrix out(m.rows(), std::vector<Complex>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline NaiveMatrix naive_mul(const NaiveMatrix& a, const NaiveMatrix& b) {
  const size_t n = a.size(), m = b[0].size(), k = b.size();
  NaiveMatrix out(n, std::vector<Complex>(m, Complex(0, 0)));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j)
      for (size_t l = 0; l < k; ++l) out[i][j] += a[i][l] * b[l][j];
  return out;
}

inline double naive_frobenius(const NaiveMatrix& a) {
  double s = 0;
  for (const auto& row : a)
    for (const auto& z : row) s += std::norm(z);
  return std::sqrt(s);
}

// kron(A,B)(i*Db+j, k*Db+l) = A(i,k) B(j,l), written index-by-index.
inline Matrix naive_kron(const Matrix& a, const Matrix& b) {
  const int ra = static_cast<int>(a.rows()), ca = static_cast<int>(a.cols());
  const int rb = static_cast<int>(b.rows()), cb = static_cast<int>(b.cols());
  Matrix out(ra * rb, ca * cb);
  for (int i = 0; i < ra; ++i)
    for (int j = 0; j < rb; ++j)
      for (int k = 0; k < ca; ++k)
        for (int l = 0; l < cb; ++l) out(i * rb + j, k * cb + l) = a(i, k) * b(j, l);
  return out;
}

// Dense plain/dressed transfer operator assembled with the naive kron.
inline Matrix naive_dense_transfer(const cmps::UniformCMPS& s,
                                   const std::vector<double>& signs) {
  const int D = s.dim();
  const Matrix id = Matrix::Identity(D, D);
  Matrix t = naive_kron(s.Q, id) + naive_kron(id, s.Q.conjugate());
  for (size_t a = 0; a < s.R.size(); ++a)
    t += signs[a] * naive_kron(s.R[a], s.R[a].conjugate());
  return t;
}

inline Vector naive_vec(const Matrix& f) {
  Vector v(f.rows() * f.cols());
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j) v(i * f.cols() + j) = f(i, j);
  return v;
}

}  // namespace testutil
