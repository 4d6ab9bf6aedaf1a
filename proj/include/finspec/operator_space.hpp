#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "finspec/matrix.hpp"

namespace finspec {

// An HS-orthonormal basis of a complex linear subspace of operators on an
// n-dimensional Hilbert space.  Immutable after construction.
struct OperatorSpace {
  Index dim_h = 0;
  double tol = kRankTol;
  std::vector<MatrixC> basis;

  // Optional performance hint: a *-closed set known to generate the span as
  // an algebra.  Commutant computations may then constrain on the hint first
  // and verify the rest by residuals.  Never affects the mathematical result.
  std::vector<MatrixC> generator_hint;

  Index dim() const { return static_cast<Index>(basis.size()); }
};

namespace detail {

// Incrementally grown orthonormal basis of vec'd operators.  Candidates are
// projected against the current basis (twice, for stability) and accepted
// when the residual exceeds the running relative threshold.
class SpanBuilder {
 public:
  SpanBuilder(Index vec_dim, double rel_tol)
      : vec_dim_(vec_dim), rel_tol_(rel_tol) {}

  Index size() const { return size_; }
  double scale() const { return scale_; }

  VectorC direction(Index k) const { return q_.col(k); }

  const MatrixC& stacked() const { return q_; }
  MatrixC basis_block() const { return q_.leftCols(size_); }

  // Adds one candidate; returns its new basis index or -1 if absorbed.
  Index add(const VectorC& v) {
    scale_ = std::max(scale_, v.norm());
    if (v.norm() <= rel_tol_ * scale_) return -1;
    VectorC r = v;
    for (int pass = 0; pass < 2; ++pass)
      if (size_ > 0)
        r -= q_.leftCols(size_) * (q_.leftCols(size_).adjoint() * r);
    const double rn = r.norm();
    if (rn <= rel_tol_ * scale_) return -1;
    ensure_capacity(size_ + 1);
    q_.col(size_) = r / rn;
    return size_++;
  }

  // Adds a block of candidates (columns), in order.  Returns the basis
  // indices of the accepted ones.  Block projection against the existing
  // basis runs as a matrix product; candidates accepted earlier in the same
  // block are handled by a short sequential pass.
  std::vector<Index> add_batch(const MatrixC& cand) {
    std::vector<Index> accepted;
    if (cand.cols() == 0) return accepted;
    for (Index j = 0; j < cand.cols(); ++j)
      scale_ = std::max(scale_, cand.col(j).norm());
    MatrixC r = cand;
    const Index d0 = size_;
    if (d0 > 0) {
      auto q = q_.leftCols(d0);
      for (int pass = 0; pass < 2; ++pass) r -= q * (q.adjoint() * r).eval();
    }
    for (Index j = 0; j < cand.cols(); ++j) {
      if (cand.col(j).norm() <= rel_tol_ * scale_) continue;
      VectorC v = r.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (Index k = d0; k < size_; ++k)
          v -= q_.col(k) * (q_.col(k).dot(v));
      const double rn = v.norm();
      if (rn <= rel_tol_ * scale_) continue;
      ensure_capacity(size_ + 1);
      q_.col(size_) = v / rn;
      accepted.push_back(size_++);
    }
    return accepted;
  }

 private:
  void ensure_capacity(Index want) {
    if (q_.cols() >= want) return;
    Index cap = std::max<Index>(64, q_.cols());
    while (cap < want) cap *= 2;
    MatrixC grown(vec_dim_, cap);
    if (size_ > 0) grown.leftCols(size_) = q_.leftCols(size_);
    q_.swap(grown);
  }

  Index vec_dim_;
  double rel_tol_;
  double scale_ = 0.0;
  Index size_ = 0;
  MatrixC q_;
};

inline MatrixC stack_columns(const std::vector<MatrixC>& ops) {
  if (ops.empty()) return MatrixC(0, 0);
  MatrixC m(ops.front().size(), static_cast<Index>(ops.size()));
  for (Index j = 0; j < m.cols(); ++j) m.col(j) = vec_rm(ops[j]);
  return m;
}

inline std::uint64_t shape_seed(Index n, Index d, std::uint64_t salt) {
  std::uint64_t s = 0x9e3779b97f4a7c15ull ^ salt;
  s ^= static_cast<std::uint64_t>(n) * 0x100000001b3ull;
  s ^= static_cast<std::uint64_t>(d) * 0xc2b2ae3d27d4eb4full;
  return s;
}

}  // namespace detail

// HS-orthonormal basis of the complex span, via SVD of the stacked
// coefficient matrix.  Output size is the numerical rank at the relative
// threshold tol * sigma_max.  Deterministic for a fixed input order.
inline std::vector<MatrixC> orthonormalize(const std::vector<MatrixC>& vectors,
                                           double tol = kRankTol) {
  std::vector<MatrixC> out;
  if (vectors.empty()) return out;
  const Index rows = vectors.front().rows(), cols = vectors.front().cols();
  for (const auto& v : vectors)
    require(v.rows() == rows && v.cols() == cols,
            "orthonormalize: shape mismatch");
  MatrixC a = detail::stack_columns(vectors);
  if (a.norm() == 0.0) return out;
  Eigen::BDCSVD<MatrixC> svd(a, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cut = tol * sv(0);
  for (Index k = 0; k < sv.size(); ++k) {
    if (sv(k) <= cut) break;
    out.push_back(unvec_rm(svd.matrixU().col(k), rows, cols));
  }
  return out;
}

inline OperatorSpace make_space(Index dim_h, const std::vector<MatrixC>& vecs,
                                double tol = kRankTol) {
  for (const auto& v : vecs)
    require(v.rows() == dim_h && v.cols() == dim_h,
            "make_space: operator shape mismatch");
  OperatorSpace s;
  s.dim_h = dim_h;
  s.tol = tol;
  s.basis = orthonormalize(vecs, tol);
  return s;
}

// Coefficients of X against the basis of S.
inline VectorC project_coefficients(const OperatorSpace& s, const MatrixC& x) {
  VectorC c(s.dim());
  for (Index k = 0; k < s.dim(); ++k) c(k) = hs_inner(s.basis[k], x);
  return c;
}

inline MatrixC project(const OperatorSpace& s, const MatrixC& x) {
  MatrixC p = MatrixC::Zero(s.dim_h, s.dim_h);
  for (Index k = 0; k < s.dim(); ++k) p += hs_inner(s.basis[k], x) * s.basis[k];
  return p;
}

// HS distance from X to the span of S.
inline double distance(const OperatorSpace& s, const MatrixC& x) {
  return (x - project(s, x)).norm();
}

// (membership verdict, HS norm of X minus its projection onto S).
inline std::pair<bool, double> contains(const OperatorSpace& s,
                                        const MatrixC& x) {
  require(x.rows() == s.dim_h && x.cols() == s.dim_h, "contains: shape");
  const double r = distance(s, x);
  return {r <= kResidualTol * std::max(1.0, x.norm()), r};
}

// Mutual containment of bases.  Residual is the worst projection defect.
inline std::pair<bool, double> equal_spaces(const OperatorSpace& s,
                                            const OperatorSpace& t) {
  require(s.dim_h == t.dim_h, "equal_spaces: ambient mismatch");
  double worst = 0.0;
  if (s.dim() == 0 && t.dim() == 0) return {true, 0.0};
  if (s.dim() > 0 && t.dim() > 0) {
    MatrixC qs = detail::stack_columns(s.basis);
    MatrixC qt = detail::stack_columns(t.basis);
    // Residual vectors are formed explicitly: a coefficient-norm shortcut
    // cannot resolve defects below sqrt(machine epsilon).
    MatrixC rs = qs - qt * (qt.adjoint() * qs).eval();
    MatrixC rt = qt - qs * (qs.adjoint() * qt).eval();
    for (Index j = 0; j < rs.cols(); ++j)
      worst = std::max(worst, rs.col(j).norm());
    for (Index j = 0; j < rt.cols(); ++j)
      worst = std::max(worst, rt.col(j).norm());
  } else {
    worst = 1.0;
  }
  return {s.dim() == t.dim() && worst <= kResidualTol, worst};
}

inline OperatorSpace sum_spaces(const OperatorSpace& s, const OperatorSpace& t) {
  require(s.dim_h == t.dim_h, "sum_spaces: ambient mismatch");
  std::vector<MatrixC> all = s.basis;
  all.insert(all.end(), t.basis.begin(), t.basis.end());
  return make_space(s.dim_h, all, std::min(s.tol, t.tol));
}

// Intersection via the kernel of the stacked coefficient matrix [Qs | -Qt].
inline OperatorSpace intersect(const OperatorSpace& s, const OperatorSpace& t) {
  require(s.dim_h == t.dim_h, "intersect: ambient mismatch");
  OperatorSpace out;
  out.dim_h = s.dim_h;
  out.tol = std::min(s.tol, t.tol);
  if (s.dim() == 0 || t.dim() == 0) return out;
  MatrixC m(s.dim_h * s.dim_h, s.dim() + t.dim());
  m.leftCols(s.dim()) = detail::stack_columns(s.basis);
  m.rightCols(t.dim()) = -detail::stack_columns(t.basis);
  // Kernel through the Gram matrix; spectra here are far from the cutoff.
  MatrixC g = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<MatrixC> eig(g);
  const auto& ev = eig.eigenvalues();
  const double lmax = std::max(ev(ev.size() - 1), 0.0);
  const double lcut =
      std::max(out.tol * out.tol * lmax, 64.0 * 2.2e-16 * std::max(lmax, 1.0));
  std::vector<MatrixC> members;
  for (Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > lcut) continue;
    VectorC a = eig.eigenvectors().col(k).head(s.dim());
    MatrixC x = MatrixC::Zero(s.dim_h, s.dim_h);
    for (Index j = 0; j < s.dim(); ++j) x += a(j) * s.basis[j];
    members.push_back(x);
  }
  out.basis = orthonormalize(members, out.tol);
  return out;
}

namespace detail {

// Brute-force kernel of the stacked commutator maps, for spaces that are not
// *-closed (only viable at small ambient dimension).
inline std::vector<MatrixC> dense_commutant_basis(const OperatorSpace& s) {
  const Index n = s.dim_h;
  require(n <= 50, "commutant: dense fallback limited to dim_H <= 50");
  const Index n2 = n * n;
  MatrixC stacked(static_cast<Index>(s.dim()) * n2, n2);
  MatrixC id = MatrixC::Identity(n, n);
  for (Index b = 0; b < s.dim(); ++b)
    stacked.middleRows(b * n2, n2) =
        kron(id, s.basis[b].transpose()) - kron(s.basis[b], id);
  Eigen::BDCSVD<MatrixC> svd(stacked, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = (sv.size() > 0) ? s.tol * sv(0) : 0.0;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  std::vector<MatrixC> out;
  for (Index k = rank; k < n2; ++k)
    out.push_back(unvec_rm(svd.matrixV().col(k), n, n));
  return out;
}

// Gram matrix of the commutators [u_p, b] over a dictionary of eigenvector
// block units u_(i,j) = v_i v_j^dag, evaluated from B = V^dag b V alone:
//   <[u_ij,b],[u_kl,b]> = d_ik (BB*)_lj + d_jl (B*B)_ik - B_ik conj(B_jl)
//                         - conj(B_ki) B_lj.
inline MatrixC unit_commutator_gram(const MatrixC& bt,
                                    const std::vector<std::pair<Index, Index>>& dict) {
  const MatrixC p = bt * bt.adjoint();
  const MatrixC q = bt.adjoint() * bt;
  const Index d = static_cast<Index>(dict.size());
  MatrixC g(d, d);
  for (Index a = 0; a < d; ++a) {
    const auto [i, j] = dict[a];
    for (Index c = 0; c < d; ++c) {
      const auto [k, l] = dict[c];
      Complex val = -bt(i, k) * std::conj(bt(j, l)) -
                    std::conj(bt(k, i)) * bt(l, j);
      if (i == k) val += p(l, j);
      if (j == l) val += q(i, k);
      g(a, c) = val;
    }
  }
  return g;
}

struct CommutantWork {
  MatrixC eigvecs;                             // V, columns = eigenbasis of h
  std::vector<std::pair<Index, Index>> dict;   // in-cluster unit indices
  MatrixC coeffs;                              // dict.size() x candidates
};

inline MatrixC materialize_candidate(const CommutantWork& w, Index col,
                                     Index n) {
  MatrixC m = MatrixC::Zero(n, n);
  for (Index p = 0; p < static_cast<Index>(w.dict.size()); ++p)
    m(w.dict[p].first, w.dict[p].second) = w.coeffs(p, col);
  return w.eigvecs * m * w.eigvecs.adjoint();
}

}  // namespace detail

// Commutant {X : [X, b] = 0 for every b in the basis of S}.
//
// For a *-closed span the search starts from the eigenspace block units of a
// generic hermitian element of the span (every commutant element is block
// diagonal with respect to it) and then intersects, constraint by
// constraint, with the kernels of the commutator maps restricted to the
// shrinking candidate space.  Each returned element is re-verified against
// the inputs.
inline OperatorSpace commutant(const OperatorSpace& s) {
  const Index n = s.dim_h;
  OperatorSpace out;
  out.dim_h = n;
  out.tol = s.tol;

  if (s.dim() == 0) {
    require(n <= 64, "commutant of the zero space: ambient too large");
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) out.basis.push_back(matrix_unit(n, i, j));
    return out;
  }

  bool star_closed = true;
  for (const auto& b : s.basis)
    if (distance(s, b.adjoint()) > kResidualTol) {
      star_closed = false;
      break;
    }

  if (!star_closed) {
    out.basis = orthonormalize(detail::dense_commutant_basis(s), s.tol);
    return out;
  }

  // Generic hermitian element of the span.
  std::mt19937_64 rng(detail::shape_seed(n, s.dim(), 0xc0117ea5ull));
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixC h = MatrixC::Zero(n, n);
  for (const auto& b : s.basis) {
    h += dist(rng) * (b + b.adjoint());
    h += dist(rng) * (Complex(0, 1) * (b - b.adjoint()));
  }
  if (h.norm() > 0) h /= h.norm();
  Eigen::SelfAdjointEigenSolver<MatrixC> eig(h);
  const auto& ev = eig.eigenvalues();
  const double spread = std::max(ev(n - 1) - ev(0), 1e-300);
  const double gap_tol = std::max(1e-8 * spread, 1e-13);

  detail::CommutantWork w;
  w.eigvecs = eig.eigenvectors();
  Index cluster_begin = 0;
  for (Index k = 0; k < n; ++k) {
    const bool last = (k == n - 1);
    if (last || ev(k + 1) - ev(k) > gap_tol) {
      for (Index i = cluster_begin; i <= k; ++i)
        for (Index j = cluster_begin; j <= k; ++j) w.dict.push_back({i, j});
      cluster_begin = k + 1;
    }
  }
  const Index dict_size = static_cast<Index>(w.dict.size());
  w.coeffs = MatrixC::Identity(dict_size, dict_size);

  // The Gram route resolves residual^2, so it cannot certify below the
  // square root of machine noise; the post-verification pass below uses
  // direct commutators instead.
  const double keep_res = std::max(s.tol, 3e-7);

  const std::vector<MatrixC>& constraints =
      s.generator_hint.empty() ? s.basis : s.generator_hint;

  for (const auto& b : constraints) {
    if (w.coeffs.cols() == 0) break;
    const double bscale = std::max(1.0, b.norm());
    MatrixC bt = w.eigvecs.adjoint() * b * w.eigvecs;
    MatrixC g = detail::unit_commutator_gram(bt, w.dict);
    MatrixC y = g * w.coeffs;
    double worst2 = 0.0;
    for (Index c = 0; c < w.coeffs.cols(); ++c)
      worst2 = std::max(worst2, std::real(w.coeffs.col(c).dot(y.col(c))));
    if (worst2 <= keep_res * keep_res * bscale * bscale) continue;
    MatrixC small = w.coeffs.adjoint() * y;
    small = 0.5 * (small + small.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixC> se(small);
    const auto& lam = se.eigenvalues();
    const double lmax = std::max(lam(lam.size() - 1), 0.0);
    const double lcut = std::max(keep_res * keep_res * bscale * bscale,
                                 64.0 * 2.2e-16 * std::max(lmax, 1.0));
    Index keep = 0;
    while (keep < lam.size() && lam(keep) <= lcut) ++keep;
    w.coeffs = (w.coeffs * se.eigenvectors().leftCols(keep)).eval();
  }

  std::vector<MatrixC> members;
  for (Index c = 0; c < w.coeffs.cols(); ++c)
    members.push_back(detail::materialize_candidate(w, c, n));

  // Verification against the full input basis, direct commutators.  When the
  // all-pairs sweep is too expensive the check runs on a seeded sample.
  const double budget = 2e11;
  const double full_cost = static_cast<double>(members.size()) * s.dim() *
                           16.0 * std::pow(static_cast<double>(n), 3);
  std::mt19937_64 vrng(detail::shape_seed(n, s.dim(), 0x7e57ull));
  const bool full = full_cost <= budget;
  const Index samples = full ? 0 : 4096;
  double worst = 0.0;
  auto check_pair = [&](Index c, Index b) {
    const double scale = std::max(1.0, s.basis[b].norm());
    worst = std::max(worst,
                     commutator(members[c], s.basis[b]).norm() / scale);
  };
  if (full) {
    for (Index c = 0; c < static_cast<Index>(members.size()); ++c)
      for (Index b = 0; b < s.dim(); ++b) check_pair(c, b);
  } else if (!members.empty()) {
    std::uniform_int_distribution<Index> pick_c(0, members.size() - 1);
    std::uniform_int_distribution<Index> pick_b(0, s.dim() - 1);
    for (Index k = 0; k < samples; ++k) check_pair(pick_c(vrng), pick_b(vrng));
  }
  if (worst > kResidualTol)
    throw ToleranceError(
        "commutant: candidate verification failed, worst residual " +
        std::to_string(worst));

  out.basis = std::move(members);
  return out;
}

// Algebra generated by the span of `generators` under products and adjoints.
// Breadth-first word closure: every direction that enters the basis is
// multiplied by the (adjoint-augmented) generating set until the span is
// stable.  The identity is not adjoined.
inline OperatorSpace generate_algebra(const std::vector<MatrixC>& generators,
                                      double tol = kRankTol) {
  require(!generators.empty(), "generate_algebra: no generators");
  const Index n = generators.front().rows();
  for (const auto& g : generators)
    require(g.rows() == n && g.cols() == n, "generate_algebra: non-square");

  double gscale = 0.0;
  for (const auto& g : generators) gscale = std::max(gscale, g.norm());

  std::vector<MatrixC> mult_set;
  for (const auto& g : generators)
    if (g.norm() > tol * gscale) mult_set.push_back(g);
  OperatorSpace out;
  out.dim_h = n;
  out.tol = tol;
  if (mult_set.empty()) return out;
  {
    const Index base = static_cast<Index>(mult_set.size());
    for (Index k = 0; k < base; ++k) mult_set.push_back(mult_set[k].adjoint());
  }

  detail::SpanBuilder sb(n * n, tol);
  std::vector<MatrixC> frontier;
  auto accept_with_adjoint = [&](const MatrixC& cand) {
    Index idx = sb.add(vec_rm(cand));
    if (idx < 0) return;
    MatrixC dir = unvec_rm(sb.direction(idx), n, n);
    frontier.push_back(dir);
    Index adj = sb.add(vec_rm(dir.adjoint()));
    if (adj >= 0) frontier.push_back(unvec_rm(sb.direction(adj), n, n));
  };
  for (const auto& g : mult_set) accept_with_adjoint(g);

  Index rounds = 0;
  while (!frontier.empty()) {
    if (sb.size() > n * n)
      throw ToleranceError("generate_algebra: span exceeded dim_H^2");
    if (++rounds > n * n + 2)
      throw ToleranceError("generate_algebra: closure failed to stabilize");
    std::vector<MatrixC> current;
    current.swap(frontier);
    for (const auto& f : current) {
      MatrixC batch(n * n, static_cast<Index>(mult_set.size()));
      for (Index gi = 0; gi < static_cast<Index>(mult_set.size()); ++gi)
        batch.col(gi) = vec_rm(mult_set[gi] * f);
      std::vector<Index> got = sb.add_batch(batch);
      for (Index idx : got) {
        MatrixC dir = unvec_rm(sb.direction(idx), n, n);
        frontier.push_back(dir);
        Index adj = sb.add(vec_rm(dir.adjoint()));
        if (adj >= 0) frontier.push_back(unvec_rm(sb.direction(adj), n, n));
      }
    }
  }

  for (Index k = 0; k < sb.size(); ++k)
    out.basis.push_back(unvec_rm(sb.direction(k), n, n));
  out.generator_hint = mult_set;

  // Fixed-point audit: products of basis elements must stay in the span.
  const Index d = out.dim();
  std::mt19937_64 rng(detail::shape_seed(n, d, 0xa1d17ull));
  std::vector<std::pair<Index, Index>> pairs;
  if (d * d <= 1024) {
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) pairs.push_back({i, j});
  } else {
    std::uniform_int_distribution<Index> pick(0, d - 1);
    for (int k = 0; k < 1024; ++k) pairs.push_back({pick(rng), pick(rng)});
  }
  double worst = 0.0;
  for (auto [i, j] : pairs) {
    MatrixC prod = out.basis[i] * out.basis[j];
    worst = std::max(worst,
                     distance(out, prod) / std::max(1.0, prod.norm()));
  }
  if (worst > kResidualTol)
    throw ToleranceError(
        "generate_algebra: span is not multiplicatively closed at tol, "
        "worst product residual " + std::to_string(worst));
  return out;
}

inline OperatorSpace center(const OperatorSpace& s) {
  return intersect(s, commutant(s));
}

}  // namespace finspec
