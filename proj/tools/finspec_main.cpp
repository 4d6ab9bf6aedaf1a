// Command-line front end: triple verification, internal Standard Model
// reports and scans, and exterior-fiber sign reports.
//
// Exit codes: 0 success, 2 parse/IO error, 3 structural invariant violation,
// 4 expected-fact deviation, 5 off-margin scan disagreement.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <finspec/finspec.hpp>

namespace {

using namespace finspec;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitFact = 4;
constexpr int kExitScanDisagreement = 5;

Complex parse_complex(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ParseError("empty complex literal");
  auto stod_all = [](const std::string& t) {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw ParseError("bad numeric literal: " + t);
    return v;
  };
  if (s.back() != 'i' && s.back() != 'I') return {stod_all(s), 0.0};
  std::string body = s.substr(0, s.size() - 1);
  // split real and imaginary at the last sign that is not an exponent sign
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') &&
        body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_of = [&](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return stod_all(t);
  };
  if (split == std::string::npos) return {0.0, imag_of(body)};
  return {stod_all(body.substr(0, split)), imag_of(body.substr(split))};
}

std::string format_complex(Complex v) {
  char buf[64];
  if (v.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, "%.10g", v.real());
    return buf;
  }
  char buf2[128];
  std::snprintf(buf2, sizeof buf2, "%.10g%+.10gi", v.real(), v.imag());
  return buf2;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("JSON parse error in ") + path + ": " +
                     e.what());
  }
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("write failed: " + path);
}

void print_report(const Json& j) { std::cout << j.dump(2) << "\n"; }

int run_check(const std::string& file, double tol, bool has_tol) {
  Json j = load_json_file(file);
  FiniteSpectralTriple t = triple_from_json(j);
  if (has_tol) t.tol = tol;
  auto axioms = validate(t);
  for (const auto& a : axioms)
    if (!a.ok) {
      std::cerr << "invariant violation: " << a.axiom << " residual "
                << a.residual << "\n";
      return kExitInvariant;
    }
  PropertyReport rep = full_report(t);
  print_report(to_json(rep));
  std::cerr << "check: dim " << t.dim_h << ", algebra dim " << rep.algebra_dim;
  if (rep.spin)
    std::cerr << ", spin " << (rep.spin->holds ? "true" : "false") << ", hodge "
              << (rep.hodge->holds ? "true" : "false");
  std::cerr << "\n";
  return kExitOk;
}

sm::YukawaParams yukawa_from_file(const std::string& path) {
  Json j = load_json_file(path);
  sm::YukawaParams y{matrix_from_json(j.at("ynu")), matrix_from_json(j.at("ye")),
                     matrix_from_json(j.at("yu")), matrix_from_json(j.at("yd")),
                     matrix_from_json(j.at("yr"))};
  y.check_shapes();
  return y;
}

int run_sm_one_gen(const sm::YukawaParams& y, double tol) {
  FiniteSpectralTriple t = sm::triple(y, tol);
  TripleAnalysis a(t, /*spin_cross_check=*/true);

  Json out;
  out["generations"] = 1;
  out["yukawa"] = Json{{"ynu", format_complex(y.nu(0, 0))},
                       {"ye", format_complex(y.e(0, 0))},
                       {"yu", format_complex(y.u(0, 0))},
                       {"yd", format_complex(y.d(0, 0))},
                       {"yr", format_complex(y.r(0, 0))}};
  sm::CommutantReport cr = sm::commutant_report(tol);  // throws FactError on deviation
  out["commutant_structure"] = to_json(cr);

  PropertyReport rep;
  rep.invariants = validate(t);
  rep.algebra_dim = a.algebra().dim();
  rep.order0 = a.order(0);
  rep.order1 = a.order(1);
  rep.order2 = a.order(2);
  rep.signs = a.signs();
  auto [ko, gen] = ko_dimension(*rep.signs);
  rep.ko_dim = ko;
  rep.ko_generalized = gen;
  rep.clifford_dim = a.clifford().dim();
  rep.clifford_commutant_dim = a.clifford_commutant().dim();
  rep.right_algebra_dim = a.right_algebra().dim();
  rep.spin = a.spin();
  rep.hodge = a.hodge();
  out["report"] = to_json(rep);

  sm::LemmaBReport lem = sm::lemma_b_pathway(a);
  out["lemma_b"] = to_json(lem);
  if (!lem.agree)
    throw FactError("sm: enveloping-algebra route disagrees with the "
                    "brute-force Hodge verdict");
  if (!rep.order0->holds || !rep.order1->holds)
    throw FactError("sm: order 0/1 conditions must hold");
  if (rep.ko_dim != std::vector<int>{6})
    throw FactError("sm: KO-dimension is not 6");

  print_report(out);
  std::cerr << "sm: hodge " << (lem.brute_hodge ? "true" : "false") << ", spin "
            << (rep.spin->holds ? "true" : "false") << ", clifford dim "
            << rep.clifford_dim << "\n";
  return kExitOk;
}

int run_sm_three_gen(const sm::YukawaParams* y, std::uint64_t seed, double tol,
                     bool cross_check) {
  sm::ThreeGenReport rep =
      y ? sm::three_generation_report(*y, tol, cross_check)
        : sm::three_generation_report_seeded(seed, tol, cross_check);
  Json out;
  out["generations"] = 3;
  out["report"] = to_json(rep);
  print_report(out);
  std::cerr << "three-gen: order2 " << (rep.order2.holds ? "true" : "false")
            << ", spin " << (rep.spin.holds ? "true" : "false")
            << ", hodge (exploratory) " << (rep.hodge.holds ? "true" : "false")
            << "\n";
  if (!rep.order2.holds)
    throw FactError("three-gen: order 2 condition failed for generic couplings");
  if (rep.spin.holds)
    throw FactError("three-gen: spin property unexpectedly holds");
  return kExitOk;
}

std::vector<sm::ScanPoint> grid_from_json(const Json& j) {
  const Json* arr = nullptr;
  if (j.is_array()) arr = &j;
  else if (j.is_object() && j.contains("points")) arr = &j.at("points");
  else throw ParseError("grid: expected an array or {points: [...]}");
  auto entry = [](const Json& e) -> Complex {
    if (e.is_number()) return {e.get<double>(), 0.0};
    if (e.is_array() && e.size() == 2)
      return {e[0].get<double>(), e[1].get<double>()};
    if (e.is_string()) return parse_complex(e.get<std::string>());
    throw ParseError("grid: entries must be numbers, [re,im] pairs or strings");
  };
  std::vector<sm::ScanPoint> out;
  for (const auto& p : *arr) {
    if (!p.is_array() || p.size() != 5)
      throw ParseError("grid: each point must list 5 couplings");
    out.push_back({entry(p[0]), entry(p[1]), entry(p[2]), entry(p[3]),
                   entry(p[4])});
  }
  return out;
}

std::string scan_csv(const std::vector<sm::ScanRow>& rows) {
  std::ostringstream os;
  os << "ynu,ye,yu,yd,yr,predicted,computed,margin_flag,clifford_dim,"
        "commutant_dim,runtime_ms\n";
  for (const auto& r : rows) {
    os << format_complex(r.point.nu) << ',' << format_complex(r.point.e) << ','
       << format_complex(r.point.u) << ',' << format_complex(r.point.d) << ','
       << format_complex(r.point.r) << ',' << (r.predicted ? "true" : "false")
       << ',' << (r.computed ? "true" : "false") << ','
       << (r.near_degenerate ? "near_degenerate" : "ok") << ','
       << r.clifford_dim << ',' << r.commutant_dim << ',';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", r.runtime_ms);
    os << buf << '\n';
  }
  return os.str();
}

int run_scan(const std::string& grid_file, const std::string& out_file,
             double tol, int threads) {
  std::vector<sm::ScanPoint> grid = grid_from_json(load_json_file(grid_file));
  std::vector<sm::ScanRow> rows = sm::theorem_scan(grid, tol, threads);
  write_file(out_file, scan_csv(rows));
  int disagreements = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!rows[i].agree) {
      ++disagreements;
      std::cerr << "scan: off-margin disagreement at point " << i << "\n";
    }
  std::cerr << "scan: " << rows.size() << " points, " << disagreements
            << " disagreements -> " << out_file << "\n";
  return disagreements == 0 ? kExitOk : kExitScanDisagreement;
}

int run_fiber(int n, double tol) {
  FiberReport rep = fiber_report(n, tol);
  print_report(to_json(rep));
  std::cerr << "fiber: n " << n << ", lambda algebra dim " << rep.lambda_dim
            << "\n";
  return kExitOk;
}

int run_export(const sm::YukawaParams& y, double tol,
               const std::string& out_file) {
  FiniteSpectralTriple t = sm::triple(y, tol);
  write_file(out_file, to_json(t).dump(2) + "\n");
  std::cerr << "export: wrote " << out_file << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finspec: verification toolkit for finite real spectral triples"};
  app.require_subcommand(1);

  std::string file, grid_file, out_file, yukawa_file;
  std::string ynu = "1", ye = "2", yu = "3", yd = "4", yr = "1";
  double tol = kRankTol;
  bool has_tol = false;
  int gens = 1, fiber_n = 2, threads = 1;
  std::uint64_t seed = 7;
  bool no_cross_check = false;

  auto add_tol = [&](CLI::App* cmd) {
    cmd->add_option("--tol", tol, "rank tolerance")->each([&](const std::string&) {
      has_tol = true;
    });
  };

  CLI::App* check = app.add_subcommand("check", "verify a triple JSON file");
  check->add_option("file", file, "Triple JSON")->required();
  add_tol(check);

  CLI::App* smc = app.add_subcommand("sm", "internal Standard Model report");
  smc->add_option("--gens", gens, "generations (1 or 3)");
  smc->add_option("--ynu", ynu, "neutrino coupling");
  smc->add_option("--ye", ye, "electron coupling");
  smc->add_option("--yu", yu, "up coupling");
  smc->add_option("--yd", yd, "down coupling");
  smc->add_option("--yr", yr, "Majorana coupling");
  smc->add_option("--seed", seed, "seed for generic 3-generation couplings");
  smc->add_option("--yukawa-file", yukawa_file, "JSON file with 3x3 couplings");
  smc->add_flag("--no-cross-check", no_cross_check,
                "skip the symmetric spin cross-check");
  add_tol(smc);

  CLI::App* scan = app.add_subcommand("sm-scan", "coupling-grid Hodge scan");
  scan->add_option("--grid", grid_file, "grid JSON")->required();
  scan->add_option("--out", out_file, "output CSV")->required();
  scan->add_option("--threads", threads, "worker threads");
  add_tol(scan);

  CLI::App* tg = app.add_subcommand("three-gen", "three-generation report");
  tg->add_option("--seed", seed, "seed for generic couplings");
  tg->add_option("--yukawa-file", yukawa_file, "JSON file with 3x3 couplings");
  tg->add_flag("--no-cross-check", no_cross_check,
               "skip the symmetric spin cross-check");
  add_tol(tg);

  CLI::App* fib = app.add_subcommand("fiber", "exterior-fiber sign report");
  fib->add_option("--n", fiber_n, "number of generators (1..8)")->required();
  add_tol(fib);

  CLI::App* exp = app.add_subcommand("export-sm", "write the canonical triple JSON");
  exp->add_option("--out", out_file, "output file")->required();
  exp->add_option("--ynu", ynu, "neutrino coupling");
  exp->add_option("--ye", ye, "electron coupling");
  exp->add_option("--yu", yu, "up coupling");
  exp->add_option("--yd", yd, "down coupling");
  exp->add_option("--yr", yr, "Majorana coupling");
  add_tol(exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitParse;
  }

  try {
    if (check->parsed()) return run_check(file, tol, has_tol);
    if (smc->parsed()) {
      if (gens == 1)
        return run_sm_one_gen(
            sm::YukawaParams::scalars(parse_complex(ynu), parse_complex(ye),
                                      parse_complex(yu), parse_complex(yd),
                                      parse_complex(yr)),
            tol);
      if (gens == 3) {
        if (!yukawa_file.empty()) {
          sm::YukawaParams y = yukawa_from_file(yukawa_file);
          return run_sm_three_gen(&y, seed, tol, !no_cross_check);
        }
        return run_sm_three_gen(nullptr, seed, tol, !no_cross_check);
      }
      throw ParseError("sm: --gens must be 1 or 3");
    }
    if (scan->parsed()) return run_scan(grid_file, out_file, tol, threads);
    if (tg->parsed()) {
      if (!yukawa_file.empty()) {
        sm::YukawaParams y = yukawa_from_file(yukawa_file);
        return run_sm_three_gen(&y, seed, tol, !no_cross_check);
      }
      return run_sm_three_gen(nullptr, seed, tol, !no_cross_check);
    }
    if (fib->parsed()) return run_fiber(fiber_n, tol);
    if (exp->parsed())
      return run_export(
          sm::YukawaParams::scalars(parse_complex(ynu), parse_complex(ye),
                                    parse_complex(yu), parse_complex(yd),
                                    parse_complex(yr)),
          tol, out_file);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const FactError& e) {
    std::cerr << "fact deviation: " << e.what() << "\n";
    return kExitFact;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ToleranceError& e) {
    std::cerr << "tolerance failure: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitParse;
}
