#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finspec/operator_space.hpp"

namespace finspec {

// Antiunitary operator x |-> U conj(x), stored through its unitary part.
struct AntiUnitary {
  MatrixC u;

  Index dim() const { return u.rows(); }

  // J X J^{-1} for a linear operator X.
  MatrixC conjugate_op(const MatrixC& x) const {
    return u * x.conjugate() * u.adjoint();
  }

  double unitarity_residual() const {
    const Index n = u.rows();
    return (u.adjoint() * u - MatrixC::Identity(n, n)).norm();
  }

  // Sign in J^2 = eps * id, from U conj(U) = eps * I.
  std::pair<int, double> square_sign() const {
    const Index n = u.rows();
    MatrixC uu = u * u.conjugate();
    const double rp = (uu - MatrixC::Identity(n, n)).norm();
    const double rm = (uu + MatrixC::Identity(n, n)).norm();
    return rp <= rm ? std::make_pair(1, rp) : std::make_pair(-1, rm);
  }
};

struct FiniteSpectralTriple {
  Index dim_h = 0;
  std::vector<MatrixC> algebra_generators;
  MatrixC dirac;
  std::optional<MatrixC> grading;
  std::optional<AntiUnitary> real_structure;
  double tol = kRankTol;

  // Optional candidate witnesses carried alongside the data (e.g. by an
  // exported file); spin/hodge checks prefer a qualifying probe over the
  // generic basis-element selection.
  std::vector<MatrixC> witness_probes;
};

struct AxiomResidual {
  std::string axiom;
  double residual = 0.0;
  bool ok = true;
};

// Structural invariants: selfadjoint D, unitary J with a definite sign of
// J^2, involutive selfadjoint grading commuting with the algebra and
// anticommuting with D.  Bounded-commutator and compact-resolvent conditions
// are vacuous at finite dimension and are not tested.
inline std::vector<AxiomResidual> validate(const FiniteSpectralTriple& t) {
  std::vector<AxiomResidual> out;
  const Index n = t.dim_h;
  const double acc = std::max(kResidualTol, t.tol);
  auto push = [&](const std::string& name, double res, double scale = 1.0) {
    out.push_back({name, res, res <= acc * std::max(1.0, scale)});
  };
  require(t.dirac.rows() == n && t.dirac.cols() == n, "validate: D shape");
  push("D selfadjointness", (t.dirac - t.dirac.adjoint()).norm(),
       t.dirac.norm());
  for (const auto& g : t.algebra_generators)
    require(g.rows() == n && g.cols() == n, "validate: generator shape");
  if (t.grading) {
    const MatrixC& chi = *t.grading;
    require(chi.rows() == n && chi.cols() == n, "validate: grading shape");
    push("grading involution", (chi * chi - MatrixC::Identity(n, n)).norm());
    push("grading selfadjointness", (chi - chi.adjoint()).norm());
    double worst = 0.0;
    for (const auto& g : t.algebra_generators)
      worst = std::max(worst, commutator(chi, g).norm() / std::max(1.0, g.norm()));
    push("grading commutes with algebra", worst);
    push("grading anticommutes with D", anticommutator(chi, t.dirac).norm(),
         t.dirac.norm());
  }
  if (t.real_structure) {
    require(t.real_structure->u.rows() == n, "validate: J shape");
    push("J unitarity", t.real_structure->unitarity_residual());
    auto [eps, res] = t.real_structure->square_sign();
    push("J squared sign", res);
    (void)eps;
  }
  return out;
}

inline void validate_or_throw(const FiniteSpectralTriple& t) {
  for (const auto& a : validate(t))
    if (!a.ok)
      throw InvariantError(a.axiom + " residual " + std::to_string(a.residual));
}

// Right action of a: J a^dag J^{-1} = U a^T U^dag.
inline MatrixC right_action(const FiniteSpectralTriple& t, const MatrixC& a) {
  if (!t.real_structure)
    throw InvariantError("right_action: no real structure present");
  return t.real_structure->u * a.transpose() * t.real_structure->u.adjoint();
}

enum class GradedSign { Plus, Minus, Graded, Absent };

inline std::string to_string(GradedSign s) {
  switch (s) {
    case GradedSign::Plus: return "+1";
    case GradedSign::Minus: return "-1";
    case GradedSign::Graded: return "graded";
    default: return "absent";
  }
}

struct SignProfile {
  int eps = 1;
  int eps_prime = 1;
  bool eps_prime_defined = true;  // false when D = 0 fits both signs
  GradedSign eps_double_prime = GradedSign::Absent;
  double eps_residual = 0.0;
  double eps_prime_residual = 0.0;
  double eps_double_prime_residual = 0.0;
};

struct OrderVerdict {
  bool holds = false;
  double residual = 0.0;
  Index witness_a = -1;  // algebra-basis indices of the worst pair
  Index witness_b = -1;
};

struct MoritaVerdict {
  bool holds = false;
  double residual = 0.0;            // equality defect of the two spans
  std::optional<MatrixC> witness;   // certificate when the verdict is false
  double witness_distance = 0.0;    // its distance to the right-hand span
};

struct PropertyReport {
  std::vector<AxiomResidual> invariants;
  std::optional<OrderVerdict> order0, order1, order2;
  std::optional<SignProfile> signs;
  std::vector<int> ko_dim;
  bool ko_generalized = false;
  Index algebra_dim = 0;
  Index clifford_dim = 0;
  Index clifford_commutant_dim = 0;
  Index right_algebra_dim = 0;
  std::optional<MoritaVerdict> spin, hodge;
};

// J-conjugate of a whole span; an antiunitary conjugation maps an
// HS-orthonormal basis to an HS-orthonormal basis.
inline OperatorSpace conjugate_space(const AntiUnitary& j,
                                     const OperatorSpace& s) {
  OperatorSpace out;
  out.dim_h = s.dim_h;
  out.tol = s.tol;
  for (const auto& b : s.basis) out.basis.push_back(j.conjugate_op(b));
  for (const auto& g : s.generator_hint)
    out.generator_hint.push_back(j.conjugate_op(g));
  return out;
}

// Detects (eps, eps', eps'') from the defining relations.  For gradings that
// satisfy the sign relation only blockwise, the +-1 eigenspaces of
// `aux_parity` are tested separately and the result is reported as Graded.
inline SignProfile detect_signs(
    const FiniteSpectralTriple& t,
    const std::optional<MatrixC>& aux_parity = std::nullopt) {
  if (!t.real_structure)
    throw InvariantError("detect_signs: no real structure present");
  const AntiUnitary& j = *t.real_structure;
  const double acc = std::max(kResidualTol, t.tol);
  SignProfile p;
  {
    auto [eps, res] = j.square_sign();
    if (res > acc)
      throw InvariantError("detect_signs: J^2 is not a sign, residual " +
                           std::to_string(res));
    p.eps = eps;
    p.eps_residual = res;
  }
  {
    MatrixC jdj = j.conjugate_op(t.dirac);
    const double scale = std::max(1.0, t.dirac.norm());
    const double rp = (jdj - t.dirac).norm();
    const double rm = (jdj + t.dirac).norm();
    if (std::min(rp, rm) > acc * scale)
      throw InvariantError("detect_signs: DJ = +/- JD fails both signs");
    p.eps_prime = (rp <= rm) ? 1 : -1;
    p.eps_prime_residual = std::min(rp, rm);
    p.eps_prime_defined = !(rp <= acc * scale && rm <= acc * scale);
  }
  if (!t.grading) {
    p.eps_double_prime = GradedSign::Absent;
    return p;
  }
  const MatrixC& chi = *t.grading;
  MatrixC jcj = j.conjugate_op(chi);
  const double rp = (jcj - chi).norm();
  const double rm = (jcj + chi).norm();
  if (rp <= acc) {
    p.eps_double_prime = GradedSign::Plus;
    p.eps_double_prime_residual = rp;
    return p;
  }
  if (rm <= acc) {
    p.eps_double_prime = GradedSign::Minus;
    p.eps_double_prime_residual = rm;
    return p;
  }
  if (aux_parity) {
    const Index n = t.dim_h;
    MatrixC pplus = 0.5 * (MatrixC::Identity(n, n) + *aux_parity);
    MatrixC pminus = 0.5 * (MatrixC::Identity(n, n) - *aux_parity);
    MatrixC diff = jcj - chi, sum = jcj + chi;
    const double res =
        std::max((diff * pplus).norm(), (sum * pminus).norm());
    if (res <= acc) {
      p.eps_double_prime = GradedSign::Graded;
      p.eps_double_prime_residual = res;
      return p;
    }
  }
  throw InvariantError(
      "detect_signs: chi J = +/- J chi fails both signs and no graded "
      "decomposition was found");
}

// KO-dimension classes mod 8 compatible with a sign profile:
//   n          0  1  2  3  4  5  6  7
//   eps        +  +  -  -  -  -  +  +
//   eps'       +  -  +  +  +  -  +  +
//   eps''      +     -     +     -
inline std::pair<std::vector<int>, bool> ko_dimension(const SignProfile& p) {
  static constexpr int eps_tab[8] = {+1, +1, -1, -1, -1, -1, +1, +1};
  static constexpr int eps_prime_tab[8] = {+1, -1, +1, +1, +1, -1, +1, +1};
  static constexpr int eps_dp_tab[8] = {+1, 0, -1, 0, +1, 0, -1, 0};
  std::vector<int> out;
  bool generalized = false;
  auto even_match = [&](int sign) {
    for (int n = 0; n < 8; n += 2)
      if (eps_tab[n] == p.eps && eps_prime_tab[n] == p.eps_prime &&
          eps_dp_tab[n] == sign)
        out.push_back(n);
  };
  switch (p.eps_double_prime) {
    case GradedSign::Plus: even_match(+1); break;
    case GradedSign::Minus: even_match(-1); break;
    case GradedSign::Graded:
      even_match(+1);
      even_match(-1);
      generalized = true;
      break;
    case GradedSign::Absent:
      for (int n = 1; n < 8; n += 2)
        if (eps_tab[n] == p.eps && eps_prime_tab[n] == p.eps_prime)
          out.push_back(n);
      break;
  }
  if (out.empty())
    throw InvariantError("ko_dimension: sign profile matches no class");
  return {out, generalized};
}

// Shared lazily-computed data for the per-triple checks.
class TripleAnalysis {
 public:
  explicit TripleAnalysis(FiniteSpectralTriple t, bool spin_cross_check = true)
      : t_(std::move(t)), spin_cross_check_(spin_cross_check) {}

  const FiniteSpectralTriple& triple() const { return t_; }

  const OperatorSpace& algebra() {
    if (!algebra_)
      algebra_ = generate_algebra(t_.algebra_generators, t_.tol);
    return *algebra_;
  }

  // Commutators [D, a] over the algebra basis.
  const std::vector<MatrixC>& dirac_commutators() {
    if (!dcomm_) {
      dcomm_.emplace();
      for (const auto& a : algebra().basis)
        dcomm_->push_back(commutator(t_.dirac, a));
    }
    return *dcomm_;
  }

  const OperatorSpace& clifford() {
    if (!clifford_) {
      std::vector<MatrixC> gens = t_.algebra_generators;
      for (const auto& a : t_.algebra_generators)
        gens.push_back(commutator(t_.dirac, a));
      clifford_ = generate_algebra(gens, t_.tol);
    }
    return *clifford_;
  }

  const OperatorSpace& clifford_commutant() {
    if (!clp_) clp_ = commutant(clifford());
    return *clp_;
  }

  // Span of J A J^{-1} (an algebra; the conjugate of the algebra span).
  const OperatorSpace& right_algebra() {
    if (!right_) right_ = conjugate_space(j(), algebra());
    return *right_;
  }

  const OperatorSpace& conjugated_clifford() {
    if (!jclj_) jclj_ = conjugate_space(j(), clifford());
    return *jclj_;
  }

  // Order-k condition checked over a full basis of the generated algebra.
  OrderVerdict order(int k) {
    const AntiUnitary& jj = j();
    const auto& abasis = algebra().basis;
    std::vector<MatrixC> lefts, rights;
    if (k == 0) {
      lefts = abasis;
      for (const auto& b : abasis) rights.push_back(jj.conjugate_op(b));
    } else if (k == 1) {
      lefts = dirac_commutators();
      for (const auto& b : abasis) rights.push_back(jj.conjugate_op(b));
    } else if (k == 2) {
      lefts = dirac_commutators();
      for (const auto& b : dirac_commutators())
        rights.push_back(jj.conjugate_op(b));
    } else {
      throw ShapeError("order: k must be 0, 1 or 2");
    }
    const double dscale = std::max(1.0, t_.dirac.norm());
    const double scale = (k == 0)   ? 1.0
                         : (k == 1) ? dscale
                                    : dscale * dscale;
    OrderVerdict v;
    for (Index a = 0; a < static_cast<Index>(lefts.size()); ++a)
      for (Index b = 0; b < static_cast<Index>(rights.size()); ++b) {
        const double r = commutator(lefts[a], rights[b]).norm();
        if (r > v.residual) {
          v.residual = r;
          v.witness_a = a;
          v.witness_b = b;
        }
      }
    v.holds = v.residual <= std::max(kResidualTol, t_.tol) * scale;
    return v;
  }

  MoritaVerdict spin() {
    MoritaVerdict v;
    auto [eq1, r1] = equal_spaces(clifford_commutant(), right_algebra());
    v.holds = eq1;
    v.residual = r1;
    if (spin_cross_check_) {
      OperatorSpace right_comm = commutant(right_algebra());
      auto [eq2, r2] = equal_spaces(right_comm, clifford());
      v.holds = v.holds && eq2;
      v.residual = std::max(v.residual, r2);
    }
    if (!v.holds) pick_witness(v, clifford_commutant(), right_algebra());
    return v;
  }

  MoritaVerdict hodge() {
    MoritaVerdict v;
    OrderVerdict o2 = order(2);
    auto [eq, r] = equal_spaces(clifford_commutant(), conjugated_clifford());
    v.holds = o2.holds && eq;
    v.residual = std::max(r, o2.residual);
    if (!eq) pick_witness(v, clifford_commutant(), conjugated_clifford());
    return v;
  }

  // Complex-Hodge variant against a user-supplied right action.
  MoritaVerdict hodge_with_right_action(const std::vector<MatrixC>& right_gens) {
    OperatorSpace target = generate_algebra(right_gens, t_.tol);
    MoritaVerdict v;
    auto [eq, r] = equal_spaces(clifford_commutant(), target);
    v.holds = eq;
    v.residual = r;
    if (!eq) pick_witness(v, clifford_commutant(), target);
    return v;
  }

  SignProfile signs(const std::optional<MatrixC>& aux = std::nullopt) {
    return detect_signs(t_, aux);
  }

 private:
  const AntiUnitary& j() const {
    if (!t_.real_structure)
      throw InvariantError("analysis: no real structure present");
    return *t_.real_structure;
  }

  // Witness for a failed mutual-commutant verdict: a supplied probe that
  // certifies (lies in the left span, far from the right span), otherwise
  // the left-basis element of maximal distance to the right span; ties
  // break towards the first index.
  void pick_witness(MoritaVerdict& v, const OperatorSpace& left,
                    const OperatorSpace& right) {
    const double far = 10.0 * std::max(kResidualTol, t_.tol);
    for (const auto& probe : t_.witness_probes) {
      if (probe.rows() != t_.dim_h) continue;
      MatrixC unit = probe / probe.norm();
      if (distance(left, unit) > std::max(kResidualTol, t_.tol)) continue;
      const double d = distance(right, unit);
      if (d >= far) {
        v.witness = unit;
        v.witness_distance = d;
        return;
      }
    }
    double best = -1.0;
    for (const auto& b : left.basis) {
      const double d = distance(right, b);
      if (d > best + 1e-14) {
        best = d;
        v.witness = b;
      }
    }
    v.witness_distance = std::max(best, 0.0);
    if (left.dim() > right.dim() && best < far)
      v.witness.reset();  // no single basis element certifies; report dims only
  }

  FiniteSpectralTriple t_;
  bool spin_cross_check_;
  std::optional<OperatorSpace> algebra_, clifford_, clp_, right_, jclj_;
  std::optional<std::vector<MatrixC>> dcomm_;
};

// Convenience wrappers matching the one-shot operations.
inline OrderVerdict check_order(const FiniteSpectralTriple& t, int k) {
  TripleAnalysis a(t, false);
  return a.order(k);
}

inline OperatorSpace clifford(const FiniteSpectralTriple& t) {
  TripleAnalysis a(t, false);
  return a.clifford();
}

inline MoritaVerdict spin_check(const FiniteSpectralTriple& t,
                                bool cross_check = true) {
  TripleAnalysis a(t, cross_check);
  return a.spin();
}

inline MoritaVerdict hodge_check(const FiniteSpectralTriple& t) {
  TripleAnalysis a(t, false);
  return a.hodge();
}

struct ReportOptions {
  bool spin_cross_check = true;
  std::optional<MatrixC> aux_parity;
};

inline PropertyReport full_report(const FiniteSpectralTriple& t,
                                  const ReportOptions& opt = {}) {
  PropertyReport r;
  r.invariants = validate(t);
  TripleAnalysis a(t, opt.spin_cross_check);
  r.algebra_dim = a.algebra().dim();
  if (t.real_structure) {
    r.order0 = a.order(0);
    r.order1 = a.order(1);
    r.order2 = a.order(2);
    r.signs = a.signs(opt.aux_parity);
    auto [ko, gen] = ko_dimension(*r.signs);
    r.ko_dim = ko;
    r.ko_generalized = gen;
    r.clifford_dim = a.clifford().dim();
    r.clifford_commutant_dim = a.clifford_commutant().dim();
    r.right_algebra_dim = a.right_algebra().dim();
    r.spin = a.spin();
    r.hodge = a.hodge();
  } else {
    r.clifford_dim = a.clifford().dim();
    r.clifford_commutant_dim = a.clifford_commutant().dim();
  }
  return r;
}

}  // namespace finspec
