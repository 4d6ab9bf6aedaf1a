#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "finspec/spectral.hpp"

namespace finspec {

// Complex exterior algebra over C^n with the Euclidean metric on the
// generators.  Basis states are indexed by subsets of {1..n}, enumerated by
// (degree, lexicographic order of the element list); the subset basis is
// orthonormal.
class ExteriorFiber {
 public:
  explicit ExteriorFiber(int n) : n_(n), dim_(Index(1) << n) {
    require(n >= 1 && n <= 16, "ExteriorFiber: n out of range");
    build_enumeration();
    build_ladder_ops();
  }

  int n() const { return n_; }
  Index dim() const { return dim_; }

  int degree(Index state) const { return popcount(subset_of_[state]); }
  std::uint32_t subset(Index state) const { return subset_of_[state]; }
  Index state_of_subset(std::uint32_t mask) const { return index_of_[mask]; }

  // Creation by the j-th generator (1-based), e_j ^ (.); its adjoint is the
  // contraction e_j _| (.).
  const MatrixC& wedge(int j) const { return wedge_[j - 1]; }
  MatrixC contract(int j) const { return wedge_[j - 1].adjoint(); }

  // Clifford action lambda(v) = v^ - v_| ; lambda(v)^2 = -g(v,v).
  MatrixC lambda(const VectorC& v) const {
    require(v.size() == n_, "lambda: vector dimension");
    MatrixC m = MatrixC::Zero(dim_, dim_);
    for (int j = 1; j <= n_; ++j) m += v(j - 1) * (wedge(j) - contract(j));
    return m;
  }

  // Commuting right action rho(v) = (v^ + v_|) chi_parity.
  MatrixC rho(const VectorC& v) const {
    require(v.size() == n_, "rho: vector dimension");
    MatrixC m = MatrixC::Zero(dim_, dim_);
    for (int j = 1; j <= n_; ++j) m += v(j - 1) * (wedge(j) + contract(j));
    return m * chi_parity();
  }

  // (-1)^degree grading.
  MatrixC chi_parity() const {
    MatrixC m = MatrixC::Zero(dim_, dim_);
    for (Index s = 0; s < dim_; ++s) m(s, s) = (degree(s) % 2 == 0) ? 1.0 : -1.0;
    return m;
  }

  // Normalized Hodge-star grading (n = 2m even): a degree-k state maps to
  // i^{k(k-1)+m} times the signed complementary state.
  MatrixC chi_hodge() const {
    require(n_ % 2 == 0, "chi_hodge: requires even n");
    const int m = n_ / 2;
    const std::uint32_t full = (n_ == 32) ? 0xffffffffu : ((1u << n_) - 1);
    MatrixC out = MatrixC::Zero(dim_, dim_);
    for (Index s = 0; s < dim_; ++s) {
      const std::uint32_t set = subset_of_[s];
      const std::uint32_t comp = full & ~set;
      const int k = popcount(set);
      Complex phase = i_power(k * (k - 1) + m);
      out(index_of_[comp], s) = phase * double(split_sign(set, comp));
    }
    return out;
  }

  // Plain conjugation of forms.
  AntiUnitary j_plain() const { return {MatrixC::Identity(dim_, dim_)}; }

  // (-1)^{k(k-1)/2} composed with conjugation; intertwines lambda and rho.
  AntiUnitary j_prime() const {
    MatrixC u = MatrixC::Zero(dim_, dim_);
    for (Index s = 0; s < dim_; ++s) {
      const int k = degree(s);
      u(s, s) = ((k * (k - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    }
    return {u};
  }

  std::vector<MatrixC> lambda_generators() const {
    std::vector<MatrixC> out;
    for (int j = 1; j <= n_; ++j) out.push_back(lambda(unit_vector(j)));
    return out;
  }

  std::vector<MatrixC> rho_generators() const {
    std::vector<MatrixC> out;
    for (int j = 1; j <= n_; ++j) out.push_back(rho(unit_vector(j)));
    return out;
  }

  VectorC unit_vector(int j) const {
    VectorC v = VectorC::Zero(n_);
    v(j - 1) = 1.0;
    return v;
  }

 private:
  static int popcount(std::uint32_t x) {
    int c = 0;
    while (x) { c += int(x & 1u); x >>= 1; }
    return c;
  }

  static Complex i_power(int k) {
    switch (((k % 4) + 4) % 4) {
      case 0: return {1, 0};
      case 1: return {0, 1};
      case 2: return {-1, 0};
      default: return {0, -1};
    }
  }

  // Sign of the permutation (sorted S, sorted complement) of (1..n):
  // parity of the number of pairs s in S, t in complement with s > t.
  static int split_sign(std::uint32_t set, std::uint32_t comp) {
    int inv = 0;
    for (int s = 0; s < 32; ++s) {
      if (!(set >> s & 1u)) continue;
      for (int t = 0; t < s; ++t)
        if (comp >> t & 1u) ++inv;
    }
    return (inv % 2 == 0) ? 1 : -1;
  }

  void build_enumeration() {
    std::vector<std::uint32_t> masks;
    for (std::uint32_t m = 0; m < (1u << n_); ++m) masks.push_back(m);
    std::sort(masks.begin(), masks.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                const int ka = popcount(a), kb = popcount(b);
                if (ka != kb) return ka < kb;
                // lexicographic on the sorted element lists
                for (int bit = 0; bit < n_; ++bit) {
                  const bool ia = a >> bit & 1u, ib = b >> bit & 1u;
                  if (ia != ib) return ia;
                }
                return false;
              });
    subset_of_ = masks;
    index_of_.assign(1u << n_, 0);
    for (Index s = 0; s < dim_; ++s) index_of_[subset_of_[s]] = s;
  }

  void build_ladder_ops() {
    wedge_.clear();
    for (int j = 1; j <= n_; ++j) {
      const std::uint32_t bit = 1u << (j - 1);
      MatrixC w = MatrixC::Zero(dim_, dim_);
      for (Index s = 0; s < dim_; ++s) {
        const std::uint32_t set = subset_of_[s];
        if (set & bit) continue;
        const int below = popcount(set & (bit - 1));
        w(index_of_[set | bit], s) = (below % 2 == 0) ? 1.0 : -1.0;
      }
      wedge_.push_back(std::move(w));
    }
  }

  int n_;
  Index dim_;
  std::vector<std::uint32_t> subset_of_;
  std::vector<Index> index_of_;
  std::vector<MatrixC> wedge_;
};

struct FiberReport {
  int n = 0;
  int m = 0;  // n/2 when even, -1 otherwise
  int eps_plain = 1, eps_prime_ko = 0;  // eps' has no fiber-level meaning
  // eps'' for the four grading / real-structure pairings
  GradedSign epp_parity_plain = GradedSign::Absent;
  GradedSign epp_hodge_plain = GradedSign::Absent;
  GradedSign epp_parity_prime = GradedSign::Absent;
  GradedSign epp_hodge_prime = GradedSign::Absent;
  std::vector<int> ko_hodge_plain;  // classes from (eps, eps'=1, eps''_hodge)
  Index lambda_dim = 0, rho_dim = 0, lambda_commutant_dim = 0;
  std::optional<bool> morita;  // asserted for even n only
  double worst_residual = 0.0;
};

// Sign and Morita summary of the fiber structures.  eps' facts about d + d*
// need a manifold, so no fiber-level eps' is reported.
inline FiberReport fiber_report(int n, double tol = kRankTol) {
  require(n >= 1 && n <= 8, "fiber_report: n out of range (1..8)");
  ExteriorFiber fib(n);
  FiberReport rep;
  rep.n = n;
  rep.m = (n % 2 == 0) ? n / 2 : -1;

  auto triple_with = [&](const MatrixC& chi,
                         const AntiUnitary& j) -> FiniteSpectralTriple {
    FiniteSpectralTriple t;
    t.dim_h = fib.dim();
    t.algebra_generators = fib.lambda_generators();
    t.dirac = MatrixC::Zero(fib.dim(), fib.dim());
    t.grading = chi;
    t.real_structure = j;
    t.tol = tol;
    return t;
  };

  const MatrixC parity = fib.chi_parity();
  {
    SignProfile p = detect_signs(triple_with(parity, fib.j_plain()));
    rep.eps_plain = p.eps;
    rep.epp_parity_plain = p.eps_double_prime;
    rep.worst_residual = std::max(rep.worst_residual, p.eps_double_prime_residual);
  }
  {
    SignProfile p = detect_signs(triple_with(parity, fib.j_prime()));
    rep.epp_parity_prime = p.eps_double_prime;
    rep.worst_residual = std::max(rep.worst_residual, p.eps_double_prime_residual);
  }
  if (n % 2 == 0) {
    const MatrixC hodge = fib.chi_hodge();
    {
      SignProfile p = detect_signs(triple_with(hodge, fib.j_plain()));
      rep.epp_hodge_plain = p.eps_double_prime;
      auto [ko, gen] = ko_dimension(p);
      (void)gen;
      rep.ko_hodge_plain = ko;
      rep.worst_residual =
          std::max(rep.worst_residual, p.eps_double_prime_residual);
    }
    {
      SignProfile p = detect_signs(triple_with(hodge, fib.j_prime()), parity);
      rep.epp_hodge_prime = p.eps_double_prime;
      rep.worst_residual =
          std::max(rep.worst_residual, p.eps_double_prime_residual);
    }
  }

  OperatorSpace lam = generate_algebra(fib.lambda_generators(), tol);
  OperatorSpace rho = generate_algebra(fib.rho_generators(), tol);
  OperatorSpace lamc = commutant(lam);
  rep.lambda_dim = lam.dim();
  rep.rho_dim = rho.dim();
  rep.lambda_commutant_dim = lamc.dim();
  if (n % 2 == 0) {
    auto [eq1, r1] = equal_spaces(lamc, rho);
    auto [eq2, r2] = equal_spaces(commutant(rho), lam);
    rep.morita = eq1 && eq2;
    rep.worst_residual = std::max({rep.worst_residual, r1, r2});
  }
  return rep;
}

}  // namespace finspec
