#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "finspec/exterior.hpp"
#include "finspec/spectral.hpp"
#include "finspec/standard_model.hpp"

namespace finspec {

using Json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Matrix encoding used repo-wide:
//   {"rows": p, "cols": q, "entries": [[re, im], ...]} in row-major order.
inline Json to_json(const MatrixC& m) {
  Json entries = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      entries.push_back({m(i, j).real(), m(i, j).imag()});
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline MatrixC matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("entries"))
    throw ParseError("matrix: expected {rows, cols, entries}");
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto& entries = j.at("entries");
  if (rows <= 0 || cols <= 0 || !entries.is_array() ||
      static_cast<Index>(entries.size()) != rows * cols)
    throw ParseError("matrix: entry count does not match rows*cols");
  MatrixC m(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j2 = 0; j2 < cols; ++j2) {
      const auto& e = entries[k++];
      if (!e.is_array() || e.size() != 2)
        throw ParseError("matrix: entries must be [re, im] pairs");
      m(i, j2) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

inline Json to_json(const OperatorSpace& s) {
  Json basis = Json::array();
  for (const auto& b : s.basis) basis.push_back(to_json(b));
  return Json{{"dim", s.dim_h}, {"tol", s.tol}, {"basis", basis}};
}

inline OperatorSpace space_from_json(const Json& j) {
  OperatorSpace s;
  s.dim_h = j.at("dim").get<Index>();
  s.tol = j.at("tol").get<double>();
  for (const auto& b : j.at("basis")) s.basis.push_back(matrix_from_json(b));
  return s;
}

// Triple encoding:
//   {dim, tol, generators: [matrix], D: matrix, grading?: matrix,
//    J?: {unitary: matrix}, witness_probes?: [matrix]}
inline Json to_json(const FiniteSpectralTriple& t) {
  Json j;
  j["dim"] = t.dim_h;
  j["tol"] = t.tol;
  Json gens = Json::array();
  for (const auto& g : t.algebra_generators) gens.push_back(to_json(g));
  j["generators"] = gens;
  j["D"] = to_json(t.dirac);
  if (t.grading) j["grading"] = to_json(*t.grading);
  if (t.real_structure)
    j["J"] = Json{{"unitary", to_json(t.real_structure->u)}};
  if (!t.witness_probes.empty()) {
    Json probes = Json::array();
    for (const auto& p : t.witness_probes) probes.push_back(to_json(p));
    j["witness_probes"] = probes;
  }
  return j;
}

inline FiniteSpectralTriple triple_from_json(const Json& j) {
  FiniteSpectralTriple t;
  if (!j.is_object() || !j.contains("dim") || !j.contains("generators") ||
      !j.contains("D"))
    throw ParseError("triple: expected {dim, generators, D, ...}");
  t.dim_h = j.at("dim").get<Index>();
  if (t.dim_h <= 0) throw ParseError("triple: dim must be positive");
  t.tol = j.value("tol", kRankTol);
  for (const auto& g : j.at("generators"))
    t.algebra_generators.push_back(matrix_from_json(g));
  t.dirac = matrix_from_json(j.at("D"));
  if (j.contains("grading")) t.grading = matrix_from_json(j.at("grading"));
  if (j.contains("J"))
    t.real_structure = AntiUnitary{matrix_from_json(j.at("J").at("unitary"))};
  if (j.contains("witness_probes"))
    for (const auto& p : j.at("witness_probes"))
      t.witness_probes.push_back(matrix_from_json(p));
  const Index n = t.dim_h;
  auto check_shape = [&](const MatrixC& m, const char* what) {
    if (m.rows() != n || m.cols() != n)
      throw ParseError(std::string("triple: ") + what + " has wrong shape");
  };
  for (const auto& g : t.algebra_generators) check_shape(g, "generator");
  check_shape(t.dirac, "D");
  if (t.grading) check_shape(*t.grading, "grading");
  if (t.real_structure) check_shape(t.real_structure->u, "J unitary");
  for (const auto& p : t.witness_probes) check_shape(p, "witness probe");
  return t;
}

inline Json to_json(const SignProfile& p) {
  Json j;
  j["eps"] = p.eps;
  j["eps_prime"] = p.eps_prime;
  j["eps_prime_defined"] = p.eps_prime_defined;
  j["eps_double_prime"] = to_string(p.eps_double_prime);
  j["residuals"] = Json{{"eps", p.eps_residual},
                        {"eps_prime", p.eps_prime_residual},
                        {"eps_double_prime", p.eps_double_prime_residual}};
  return j;
}

inline Json to_json(const OrderVerdict& v) {
  return Json{{"holds", v.holds},
              {"residual", v.residual},
              {"witness_pair", {v.witness_a, v.witness_b}}};
}

inline Json to_json(const MoritaVerdict& v, bool include_witness = true) {
  Json j;
  j["holds"] = v.holds;
  j["residual"] = v.residual;
  if (include_witness && v.witness) {
    j["witness"] = to_json(*v.witness);
    j["witness_distance"] = v.witness_distance;
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

inline Json to_json(const PropertyReport& r) {
  Json j;
  Json inv = Json::array();
  for (const auto& a : r.invariants)
    inv.push_back(Json{{"axiom", a.axiom}, {"residual", a.residual},
                       {"ok", a.ok}});
  j["invariants"] = inv;
  j["dims"] = Json{{"algebra", r.algebra_dim},
                   {"clifford", r.clifford_dim},
                   {"clifford_commutant", r.clifford_commutant_dim},
                   {"right_algebra", r.right_algebra_dim}};
  j["order0"] = r.order0 ? to_json(*r.order0) : Json(nullptr);
  j["order1"] = r.order1 ? to_json(*r.order1) : Json(nullptr);
  j["order2"] = r.order2 ? to_json(*r.order2) : Json(nullptr);
  j["signs"] = r.signs ? to_json(*r.signs) : Json(nullptr);
  j["ko_dimension"] = r.ko_dim;
  j["ko_generalized"] = r.ko_generalized;
  j["spin"] = r.spin ? to_json(*r.spin) : Json(nullptr);
  j["hodge"] = r.hodge ? to_json(*r.hodge) : Json(nullptr);
  return j;
}

inline Json to_json(const sm::CommutantReport& r) {
  Json j;
  j["algebra_dim"] = r.algebra_dim;
  j["flavor_commutant_dim"] = r.flavor_commutant_dim;
  j["algebra_commutant_dim"] = r.algebra_commutant_dim;
  j["right_commutant_dim"] = r.right_commutant_dim;
  j["intersection_dim"] = r.intersection_dim;
  j["sum_dim"] = r.sum_dim;
  j["pattern_residuals"] = Json{{"flavor", r.flavor_pattern_residual},
                                {"commutant", r.commutant_pattern_residual},
                                {"right", r.right_pattern_residual}};
  return j;
}

inline Json to_json(const sm::LemmaBReport& r) {
  Json j;
  j["b_dim"] = r.b_dim;
  j["b_commutant_dim"] = r.b_commutant_dim;
  j["clifford_dim"] = r.clifford_dim;
  j["steps"] = Json{
      {"clifford_in_b",
       Json{{"ok", r.step_clifford_in_b}, {"residual", r.clifford_in_b_residual}}},
      {"b_bimodule", Json{{"ok", r.step_b_bimodule},
                          {"commute_residual", r.commute_residual},
                          {"bprime_match_residual", r.bprime_match_residual}}},
      {"commutant_in_jbj", Json{{"ok", r.step_commutant_in_jbj},
                                {"residual", r.commutant_in_jbj_residual}}}};
  j["hodge"] = r.hodge;
  j["brute_hodge"] = r.brute_hodge;
  j["agree"] = r.agree;
  j["failed_step"] = r.failed_step;
  return j;
}

inline Json to_json(const sm::ThreeGenReport& r) {
  Json j;
  if (r.seeded) j["seed"] = r.seed;
  j["dims"] = Json{{"algebra", r.algebra_dim},
                   {"clifford", r.clifford_dim},
                   {"clifford_commutant", r.clifford_commutant_dim}};
  j["order0"] = to_json(r.order0);
  j["order1"] = to_json(r.order1);
  j["order2"] = to_json(r.order2);
  j["signs"] = to_json(r.signs);
  j["ko_dimension"] = r.ko;
  j["spin"] = to_json(r.spin, /*include_witness=*/false);
  Json hodge = to_json(r.hodge, /*include_witness=*/false);
  hodge["note"] = "exploratory: not asserted by the one-generation analysis";
  j["hodge"] = hodge;
  return j;
}

inline Json to_json(const FiberReport& r) {
  Json j;
  j["n"] = r.n;
  j["m"] = r.m;
  Json signs;
  signs["eps"] = r.eps_plain;
  signs["eps_prime"] = "out-of-scope";  // needs the operator d + d*
  signs["eps_pp_parity_plain"] = to_string(r.epp_parity_plain);
  signs["eps_pp_hodge_plain"] = to_string(r.epp_hodge_plain);
  signs["eps_pp_parity_prime"] = to_string(r.epp_parity_prime);
  signs["eps_pp_hodge_prime"] = to_string(r.epp_hodge_prime);
  j["signs"] = signs;
  j["ko_hodge_plain"] = r.ko_hodge_plain;
  j["dims"] = Json{{"lambda_algebra", r.lambda_dim},
                   {"rho_algebra", r.rho_dim},
                   {"lambda_commutant", r.lambda_commutant_dim}};
  j["morita"] = r.morita ? Json(*r.morita) : Json(nullptr);
  j["worst_residual"] = r.worst_residual;
  return j;
}

}  // namespace finspec
