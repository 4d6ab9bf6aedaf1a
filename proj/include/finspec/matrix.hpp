#pragma once

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <stdexcept>
#include <string>

namespace finspec {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;
using Index   = Eigen::Index;

// Default relative singular-value cutoff used for all rank decisions.
inline constexpr double kRankTol = 1e-10;
// Default HS-norm acceptance threshold for identities that hold exactly.
inline constexpr double kResidualTol = 1e-9;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a closure or rank computation cannot be resolved at the
// requested tolerance (e.g. a span that keeps growing past dim_H^2).
struct ToleranceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a structural axiom of a triple fails (selfadjointness,
// unitarity, grading relations, ...).
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

// Hilbert-Schmidt inner product tr(X^dag Y); conjugate linear in X.
inline Complex hs_inner(const MatrixC& x, const MatrixC& y) {
  require(x.rows() == y.rows() && x.cols() == y.cols(),
          "hs_inner: shape mismatch");
  return (x.conjugate().cwiseProduct(y)).sum();
}

inline double hs_norm(const MatrixC& x) { return x.norm(); }

// Row-major vectorization: vec(m)[i*cols + j] = m(i, j).
// With this convention vec(a * v * b) = (a (x) b^T) vec(v).
inline VectorC vec_rm(const MatrixC& m) {
  VectorC v(m.size());
  Index k = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) v(k++) = m(i, j);
  return v;
}

inline MatrixC unvec_rm(const VectorC& v, Index rows, Index cols) {
  require(v.size() == rows * cols, "unvec_rm: size mismatch");
  MatrixC m(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = v(k++);
  return m;
}

inline MatrixC kron(const MatrixC& a, const MatrixC& b) {
  MatrixC out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline MatrixC kron(const MatrixC& a, const MatrixC& b, const MatrixC& c) {
  return kron(kron(a, b), c);
}

inline MatrixC matrix_unit(Index rows, Index cols, Index i, Index j) {
  require(i >= 0 && i < rows && j >= 0 && j < cols, "matrix_unit: index");
  MatrixC m = MatrixC::Zero(rows, cols);
  m(i, j) = 1.0;
  return m;
}

inline MatrixC matrix_unit(Index n, Index i, Index j) {
  return matrix_unit(n, n, i, j);
}

// Materializes v |-> left * v * right on the row-major vectorized space of
// p x q matrices.  left must be p x p and right q x q.
inline MatrixC embed_left_right(const MatrixC& left, const MatrixC& right) {
  require(left.rows() == left.cols(), "embed_left_right: left not square");
  require(right.rows() == right.cols(), "embed_left_right: right not square");
  return kron(left, right.transpose());
}

inline MatrixC commutator(const MatrixC& a, const MatrixC& b) {
  return a * b - b * a;
}

inline MatrixC anticommutator(const MatrixC& a, const MatrixC& b) {
  return a * b + b * a;
}

// Deterministic pseudo-random helpers; every caller passes a seeded engine.
inline MatrixC random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixC m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(dist(rng), dist(rng));
  return m;
}

inline MatrixC random_hermitian(Index n, std::mt19937_64& rng) {
  MatrixC m = random_matrix(n, n, rng);
  return 0.5 * (m + m.adjoint());
}

// Haar-like random unitary via QR with the phase convention that makes the
// factorization unique (positive diagonal of R).
inline MatrixC random_unitary(Index n, std::mt19937_64& rng) {
  MatrixC m = random_matrix(n, n, rng);
  Eigen::HouseholderQR<MatrixC> qr(m);
  MatrixC q = qr.householderQ() * MatrixC::Identity(n, n);
  MatrixC r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    Complex d = r(j, j);
    double a = std::abs(d);
    q.col(j) *= (a > 0) ? d / a : Complex(1.0, 0.0);
  }
  return q;
}

}  // namespace finspec
