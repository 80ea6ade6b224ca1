// perturba: batch front-end over the library. One subcommand per pipeline;
// exit 0 on success, 2 on a mathematical failure, 1 on I/O or schema errors.

#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "io.hpp"

namespace {

using namespace perturba;
using io::json;

constexpr const char *kSchema = "perturba-report/1";

struct Global {
  std::string scalar = "rational";
  double tol = Tolerance{}.tau;
  std::string report;
};

/// Library errors raised while building inputs are schema errors.
template <class F> auto parsing(F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const io::IoError &) {
    throw;
  } catch (const SchemaError &) {
    throw;
  } catch (const Error &e) {
    throw SchemaError(e.what());
  }
}

json load(const std::string &path) { return parsing([&] { return io::load(path); }); }

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

double max_residual(const Report &r) {
  double m = 0.0;
  for (const auto &c : r.checks) m = std::max(m, c.residual);
  return m;
}

std::string report_summary(const Report &r, Orientation o) {
  if (const Check *bad = r.first_failure())
    return "fail: " + bad->name + " at degree " + std::to_string(io::stored_degree(bad->degree, o));
  return "ok, " + std::to_string(r.checks.size()) + " checks, max residual " + fmt(max_residual(r));
}

json profile_json(const std::vector<double> &grid, const std::vector<double> &defects,
                  const std::vector<double> *condition = nullptr) {
  json rows = json::array();
  for (std::size_t s = 0; s < grid.size() && s < defects.size(); ++s) {
    json row = {{"t", grid[s]}, {"defect", defects[s]}};
    if (condition && s < condition->size()) row["condition"] = (*condition)[s];
    rows.push_back(std::move(row));
  }
  return rows;
}

json trivialization_json(const TrivializationResult &res) {
  return {{"profile", profile_json(res.grid, res.defects, &res.condition)},
          {"max_defect", res.max_defect()},
          {"sign", res.sign},
          {"final_map", io::to_json(res.h.back())}};
}

using Body = std::function<json(std::string &summary)>;

void emit_text(const std::string &text, bool to_stdout) { (to_stdout ? std::cout : std::cerr) << text << "\n"; }

int execute(const std::string &command, const std::vector<std::string> &inputs, const Global &g, const Body &body) {
  json rep = {{"schema", kSchema}, {"command", command}, {"scalar", g.scalar}, {"inputs", inputs}, {"tol", g.tol}};
  std::string summary;
  int code = 0;
  try {
    rep.update(body(summary));
    code = rep.value("status", "") == "ok" ? 0 : 2;
  } catch (const std::exception &e) {
    auto [fields, c] = io::error_report(e);
    rep.update(fields);
    summary = fields["status"].get<std::string>() + " (" + e.what() + ")";
    code = c;
  }
  const std::string text = rep.dump(2) + "\n";
  if (!g.report.empty()) {
    std::ofstream out(g.report, std::ios::binary);
    if (!out || !(out << text)) {
      std::cerr << command << ": cannot write report to '" << g.report << "'\n";
      return 1;
    }
  } else {
    std::cout << text;
  }
  emit_text(command + ": " + summary, !g.report.empty());
  return code;
}

// verify-he

template <Scalar T> json verify_he_cmd(const std::string &path, const Global &g, std::string &summary) {
  const auto he = parsing([&] { return io::he_bundle<T>(load(path)); });
  const auto o = he.L.orientation();
  const auto r = verify_he(he, Tolerance{g.tol});
  summary = report_summary(r, o);
  return {{"status", r.ok() ? "ok" : "fail"}, {"checks", io::to_json(r, o)}};
}

// perturb

template <Scalar T> std::vector<std::string> he_mismatches(const HEData<T> &a, const HEData<T> &b, const Tolerance &tol) {
  std::vector<std::string> out;
  if (!equal(a.L.d(), b.L.d(), tol)) out.push_back("L.d");
  if (!equal(a.M.d(), b.M.d(), tol)) out.push_back("M.d");
  if (!equal(a.i, b.i, tol)) out.push_back("i");
  if (!equal(a.p, b.p, tol)) out.push_back("p");
  if (!equal(a.h, b.h, tol)) out.push_back("h");
  return out;
}

template <Scalar T>
json perturb_cmd(const std::string &he_path, const std::string &delta_path, bool roundtrip, const Global &g,
                 std::string &summary) {
  const auto he = parsing([&] { return io::he_bundle<T>(load(he_path)); });
  const auto delta = parsing([&] { return io::perturbation<T>(load(delta_path), he.M); });
  const Tolerance tol{g.tol};
  const auto o = he.L.orientation();
  json out;
  const auto input = verify_he(he, tol);
  out["input_checks"] = io::to_json(input, o);
  if (!input.ok()) {
    summary = "input is not homotopy-equivalence data: " + report_summary(input, o);
    out["status"] = "fail";
    out["error"] = "PreconditionViolation";
    return out;
  }
  require_perturbation(he.M, delta, tol);
  const auto cert = certify_smallness(delta, he.h, tol);
  out["smallness"] = cert.kind == SmallnessKind::Nilpotent ? "nilpotent" : "degreewise-inverse";
  const auto rel = lemma_relations(he, delta, compute_A(delta, he.h, cert), tol);
  out["relations"] = io::to_json(rel, o);
  if (const Check *bad = rel.first_failure()) {
    out["status"] = "fail";
    out["relation"] = bad->name;
    out["degree"] = io::stored_degree(bad->degree, o);
    summary = "fail: relation " + bad->name + " at degree " + std::to_string(io::stored_degree(bad->degree, o));
    return out;
  }
  const auto res = perturb(he, delta, cert, tol);
  out["result"] = io::to_json(res);
  out["result_checks"] = io::to_json(verify_he(res, tol), o);
  out["status"] = "ok";
  summary = "ok, relations hold (max residual " + fmt(max_residual(rel)) + ")";
  if (roundtrip) {
    const auto back = perturb(res, -delta, tol);
    const auto bad = he_mismatches(he, back, tol);
    out["roundtrip"] = {{"recovered", bad.empty()}, {"mismatches", bad}};
    if (!bad.empty()) out["status"] = "fail";
    summary += bad.empty() ? "; round trip recovers the input" : "; round trip differs in " + bad.front();
  }
  return out;
}

// contract-rows

template <Scalar T> json contract_rows_cmd(const std::string &path, const Global &g, std::string &summary) {
  const auto dc = parsing([&] { return io::double_complex<T>(load(path)); });
  const Tolerance tol{g.tol};
  dc.validate(tol);
  const auto rc = build_row_contraction(dc, tol);
  const auto t = contract_rows(dc, rc, tol);
  // i1 against the expansion sum_n (h delta)^n i, which terminates because
  // h delta lowers the column index.
  auto term = t.base.i, series = t.base.i;
  for (int n = 0; n <= dc.max_p() + 1; ++n) {
    term = compose(compose(t.base.h, t.delta), term);
    series = series + term;
  }
  const bool series_ok = equal(series, t.dr.i, tol) && term.is_zero(tol);
  const auto checks = verify_he(t.dr, tol);
  const bool dr = is_dr(t.dr, tol);
  json hd = json::object();
  for (auto [q, n] : t.dr.L.module().dims()) hd[std::to_string(q)] = n;
  summary = std::string(checks.ok() && dr && series_ok ? "ok" : "fail") + ", H dims " + hd.dump() +
            (series_ok ? "" : "; i1 differs from the series");
  return {{"status", checks.ok() && dr && series_ok ? "ok" : "fail"},
          {"checks", io::to_json(checks)},
          {"is_dr", dr},
          {"i1_matches_series", series_ok},
          {"row_homology_dims", hd},
          {"result", io::to_json(t.dr)}};
}

// kill-contractible

template <Scalar T> json kill_contractible_cmd(const std::string &path, const Global &g, std::string &summary) {
  const auto bc = parsing([&] { return io::block_complex<T>(load(path)); });
  const Tolerance tol{g.tol};
  bc.validate(tol);
  const auto out = kill_contractible(bc, tol);
  const bool closed = equal(out.L.d(), kill_contractible_closed_form(bc), tol);
  const auto checks = verify_he(out, tol);
  const bool ok = closed && checks.ok();
  summary = std::string(ok ? "ok" : "fail") + (closed ? ", b1 = alpha - beta H gamma" : ", b1 differs from alpha - beta H gamma");
  return {{"status", ok ? "ok" : "fail"},
          {"checks", io::to_json(checks, Orientation::Chain)},
          {"b1_matches_closed_form", closed},
          {"result", io::to_json(out)}};
}

// lie-rigidity

struct PathFlags {
  double t_max = -1.0; ///< negative: take it from the family file
  int steps = TrivializationOptions{}.steps;
  double tau_triv = TrivializationOptions{}.tau_triv;
  double tau_sign = TrivializationOptions{}.tau_sign;
  bool diagnostic = false;
};

TrivializationOptions path_options(const PathFlags &f, double family_t_max, const Global &g) {
  TrivializationOptions o;
  o.t_max = f.t_max >= 0.0 ? f.t_max : family_t_max;
  o.steps = f.steps;
  o.tau_triv = f.tau_triv;
  o.tau_sign = f.tau_sign;
  o.tol = Tolerance{g.tol};
  return o;
}

template <Scalar T>
json lie_rigidity_cmd(const std::string &alg_path, const std::string &fam_path, const PathFlags &flags, const Global &g,
                      std::string &summary) {
  const auto alg = parsing([&] { return io::lie_algebra<T>(load(alg_path)); });
  const auto fam = parsing([&] {
    auto f = io::bracket_family<T>(load(fam_path), alg.n);
    if (f.coeffs.front().c != alg.c) io::fail("$.coeffs[0]", "must equal the structure constants of the algebra");
    return f;
  });
  const Tolerance tol{g.tol};
  const auto opt = path_options(flags, fam.t_max, g);
  json out;
  out["h2_dim"] = cohomology_basis(ce_complex(alg, tol), 2, tol).dim;
  json fd = json::array();
  bool fd_ok = true;
  for (const auto &c : lie_finite_differences(alg.template cast<double>())) {
    fd.push_back({{"name", c.name}, {"step", c.step}, {"error", c.error}, {"error_half_step", c.error_half},
                  {"reduction", c.reduction()}, {"ok", c.ok()}});
    fd_ok = fd_ok && c.ok();
  }
  out["finite_differences"] = fd;
  const auto res = trivialize(fam, opt, tol);
  out.update(trivialization_json(res));
  out["t_max"] = opt.t_max;
  out["steps"] = opt.steps;
  out["status"] = fd_ok ? "ok" : "fail";
  summary = std::string(fd_ok ? "ok" : "fail") + ", max defect " + fmt(res.max_defect()) + " on [0, " + fmt(opt.t_max) +
            "] in " + std::to_string(opt.steps) + " steps";
  return out;
}

// hochschild-rigidity

template <Scalar T> json cochain_json(const HochschildCochain<T> &c) { return io::to_json(c.v); }

template <Scalar T>
json formal_cmd(const AssocAlgebra<T> &A, const json &j, const Tolerance &tol, std::string &summary) {
  const auto def = parsing([&] { return io::formal_deformation<T>(j, A.n); });
  json out;
  const auto split = build_degree2_splitting(A, tol);
  out["h2_dim"] = split.h2_dim;
  out["splitting"] = split.ok();
  json orders = json::array();
  bool assoc = true;
  for (int k = 1; k <= def.order(); ++k) {
    const bool z = check_formal_order(def, A, k).is_zero(tol);
    orders.push_back({{"order", k}, {"associative", z}});
    assoc = assoc && z;
  }
  out["orders"] = orders;
  if (def.order() >= 1) {
    const auto pc = poisson_check(def.c(1), A, tol);
    out["c1_is_cocycle"] = pc.is_cocycle;
    out["c1_bracket_is_coboundary"] = pc.bracket_class_zero;
  }
  if (!assoc) {
    out["status"] = "fail";
    out["error"] = "AxiomViolation";
    summary = "fail: the coefficients do not define an associative product";
    return out;
  }
  const auto triv = split.ok() ? trivialize_formal(def, A, *split.splitting, tol) : trivialize_formal(def, A, tol);
  json phi = json::array();
  for (const auto &m : triv.phi) phi.push_back(io::to_json(m));
  out["phi"] = phi;
  out["reproduces_base"] = true;
  out["status"] = "ok";
  summary = "ok, trivialized through order " + std::to_string(def.order());
  return out;
}

template <Scalar T>
json product_cmd(const AssocAlgebra<T> &A, const json &j, const PathFlags &flags, const Global &g,
                 std::string &summary) {
  const auto fam = parsing([&] {
    auto f = io::product_family<T>(j, A.n);
    if (!(f.coeffs.front() == A.product())) io::fail("$.coeffs[0]", "must equal the product of the algebra");
    return f;
  });
  const Tolerance tol{g.tol};
  auto opt = path_options(flags, fam.t_max, g);
  json out;
  const auto split = build_degree2_splitting(A, tol);
  out["h2_dim"] = split.h2_dim;
  out["diagnostic"] = flags.diagnostic;
  Degree2Splitting<T> s;
  if (split.ok()) {
    s = *split.splitting;
  } else if (flags.diagnostic) {
    s = pseudo_splitting(A, tol);
    opt.strict = false;
  } else {
    throw CohomologyNonzero("H^2(A; A) has dimension " + std::to_string(split.h2_dim) + "; no splitting");
  }
  const auto res = trivialize_product_family(fam, s, opt, tol);
  out.update(trivialization_json(res));
  out["t_max"] = opt.t_max;
  out["steps"] = opt.steps;
  out["status"] = "ok";
  summary = "ok, max defect " + fmt(res.max_defect()) + " on [0, " + fmt(opt.t_max) + "]";
  return out;
}

template <Scalar T>
json hochschild_cmd(const std::string &alg_path, const std::string &def_path, const PathFlags &flags, const Global &g,
                    std::string &summary) {
  const auto A = parsing([&] { return io::algebra<T>(load(alg_path)); });
  const auto j = load(def_path);
  require_assoc(A, Tolerance{g.tol});
  if (j.is_object() && j.contains("order")) {
    auto out = formal_cmd(A, j, Tolerance{g.tol}, summary);
    out["kind"] = "formal";
    return out;
  }
  auto out = product_cmd(A, j, flags, g, summary);
  out["kind"] = "family";
  return out;
}

// metric-contraction

HReading parse_reading(const std::string &s) { return s == "verbatim" ? HReading::Verbatim : HReading::Corrected; }

json metric_cmd(const std::string &path, int max_arity, const std::string &reading, const std::string &sign,
                const Global &g, std::string &summary) {
  if (g.scalar != "rational") throw SchemaError("metric-contraction is exact only; use --scalar rational");
  const auto ms = parsing([&] { return io::metric_space<Rational>(load(path)); });
  ms.validate();
  std::vector<std::string> readings =
      reading == "both" ? std::vector<std::string>{"corrected", "verbatim"} : std::vector<std::string>{reading};
  json out, per = json::object(), passing = json::array();
  for (const auto &r : readings) {
    MetricContractionOptions opt;
    opt.reading = parse_reading(r);
    opt.sign = sign == "alternating" ? BPrimeSign::Alternating : BPrimeSign::Signed;
    const auto rep = verify_contraction(ms, max_arity, opt);
    json degrees = json::array();
    for (const auto &d : rep.degrees)
      degrees.push_back({{"arity", d.arity}, {"homotopy", d.homotopy}, {"basis", d.basis},
                         {"mismatches", d.mismatches}, {"h_normalized", d.h_normalized},
                         {"bprime_normalized", d.bprime_normalized}, {"ok", d.ok()}});
    per[r] = {{"degrees", degrees}, {"ok", rep.ok()}};
    if (rep.ok()) passing.push_back(r);
  }
  out["points"] = ms.n;
  out["max_arity"] = max_arity;
  out["sign"] = sign;
  out["readings"] = per;
  out["passing_readings"] = passing;
  out["status"] = passing.empty() ? "fail" : "ok";
  summary = std::string(passing.empty() ? "fail" : "ok") + ", passing readings " + passing.dump();
  return out;
}

// transgress

struct SeriesFlags {
  SeriesOptions opt;
  std::string norm = "sup";
};

json transgress_cmd(const std::string &path, const SeriesFlags &flags, std::string &summary) {
  const auto s = parsing([&] { return io::series_bundle(load(path)); });
  const auto seed = default_seed();
  Rng rng(seed);
  const auto kind = flags.norm == "euclidean" ? NormKind::Euclidean : NormKind::Sup;
  const auto nd = linear_normed_degree(s.C, s.k, rng, kind);
  const double eps = banach_epsilon(nd);
  const double dn = std::max(sup_operator_norm(s.delta.block(s.k - 1)), sup_operator_norm(s.delta.block(s.k)));
  json out = {{"seed", seed},     {"C_h", nd.C_h}, {"C_lambda", nd.C_lambda}, {"epsilon", eps},
              {"delta_norm", dn}, {"below_epsilon", dn < eps}};
  const auto res = transgress_series(nd, s.C.d(), s.delta, s.v, flags.opt);
  out["iterations"] = res.iterations;
  out["residual"] = res.residual;
  out["w"] = io::to_json(res.w);
  out["term_norms"] = io::to_json(res.term_norms);
  out["status"] = "ok";
  summary = "ok, " + std::to_string(res.iterations) + " terms, residual " + fmt(res.residual);
  return out;
}

template <class F> int by_scalar(const Global &g, F &&f) {
  if (g.scalar == "f64") return f(double{});
  return f(Rational{});
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Homological perturbation pipelines over finite-dimensional complexes"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--scalar", g.scalar, "Coefficient field")->check(CLI::IsMember({"rational", "f64"}));
  app.add_option("--tol", g.tol, "Float64 comparison tolerance");
  app.add_option("--report", g.report, "Write the JSON report here instead of stdout");

  std::string in1, in2;
  int code = 0;
  auto positional = [](CLI::App *sub, std::string &target, const char *name, const char *desc) {
    sub->add_option(name, target, desc)->required();
  };

  auto *verify = app.add_subcommand("verify-he", "Check the identities of homotopy-equivalence data");
  positional(verify, in1, "he", "HE bundle JSON");
  verify->callback([&] {
    code = by_scalar(g, [&](auto t) {
      using T = decltype(t);
      return execute("verify-he", {in1}, g, [&](std::string &s) { return verify_he_cmd<T>(in1, g, s); });
    });
  });

  bool roundtrip = false;
  auto *pert = app.add_subcommand("perturb", "Transfer a perturbation through HE data");
  positional(pert, in1, "he", "HE bundle JSON");
  positional(pert, in2, "delta", "Perturbation of M as a graded-map JSON");
  pert->add_flag("--roundtrip", roundtrip, "Perturb back by -delta and compare with the input");
  pert->callback([&] {
    code = by_scalar(g, [&](auto t) {
      using T = decltype(t);
      return execute("perturb", {in1, in2}, g,
                     [&](std::string &s) { return perturb_cmd<T>(in1, in2, roundtrip, g, s); });
    });
  });

  auto *rows = app.add_subcommand("contract-rows", "Deformation retract of a double complex onto its row homology");
  positional(rows, in1, "double_complex", "Double complex JSON");
  rows->callback([&] {
    code = by_scalar(g, [&](auto t) {
      using T = decltype(t);
      return execute("contract-rows", {in1}, g, [&](std::string &s) { return contract_rows_cmd<T>(in1, g, s); });
    });
  });

  auto *kill = app.add_subcommand("kill-contractible", "Remove a contractible summand");
  positional(kill, in1, "block_complex", "Block complex JSON");
  kill->callback([&] {
    code = by_scalar(g, [&](auto t) {
      using T = decltype(t);
      return execute("kill-contractible", {in1}, g, [&](std::string &s) { return kill_contractible_cmd<T>(in1, g, s); });
    });
  });

  PathFlags pf;
  auto add_path_flags = [&](CLI::App *sub) {
    sub->add_option("--t-max", pf.t_max, "End of the parameter interval (default: from the family file)");
    sub->add_option("--steps", pf.steps, "RK4 steps")->check(CLI::PositiveNumber);
    sub->add_option("--tau-triv", pf.tau_triv, "Defect tolerance on the grid");
    sub->add_option("--tau-sign", pf.tau_sign, "Transgression residual tolerance");
  };

  auto *lie = app.add_subcommand("lie-rigidity", "Trivialize a family of Lie brackets");
  positional(lie, in1, "algebra", "Lie algebra JSON");
  positional(lie, in2, "family", "Bracket family JSON");
  add_path_flags(lie);
  lie->callback([&] {
    code = by_scalar(g, [&](auto t) {
      using T = decltype(t);
      return execute("lie-rigidity", {in1, in2}, g,
                     [&](std::string &s) { return lie_rigidity_cmd<T>(in1, in2, pf, g, s); });
    });
  });

  auto *hoch = app.add_subcommand("hochschild-rigidity", "Trivialize a formal deformation or a family of products");
  positional(hoch, in1, "algebra", "Associative algebra JSON");
  positional(hoch, in2, "deformation", "Formal deformation or product family JSON");
  add_path_flags(hoch);
  hoch->add_flag("--diagnostic", pf.diagnostic,
                 "Run a family without a splitting (generalized inverses, no exactness checks)");
  hoch->callback([&] {
    code = by_scalar(g, [&](auto t) {
      using T = decltype(t);
      return execute("hochschild-rigidity", {in1, in2}, g,
                     [&](std::string &s) { return hochschild_cmd<T>(in1, in2, pf, g, s); });
    });
  });

  int max_arity = 5;
  std::string reading = "both", sign = "signed";
  auto *metric = app.add_subcommand("metric-contraction", "Check the contraction of the normalized complex");
  positional(metric, in1, "metric", "Finite metric space JSON");
  metric->add_option("--max-arity", max_arity, "Largest tuple length checked")->check(CLI::Range(2, 7));
  metric->add_option("--reading", reading, "Homotopy reading")->check(CLI::IsMember({"corrected", "verbatim", "both"}));
  metric->add_option("--sign", sign, "Sign of b'")->check(CLI::IsMember({"signed", "alternating"}));
  metric->callback([&] {
    code = execute("metric-contraction", {in1}, g,
                   [&](std::string &s) { return metric_cmd(in1, max_arity, reading, sign, g, s); });
  });

  SeriesFlags sf;
  auto *series = app.add_subcommand("transgress", "Solve (b + delta) w = v by the perturbation series");
  positional(series, in1, "bundle", "Series bundle JSON");
  series->add_option("--tau-series", sf.opt.tau_series, "Stop when the term norm falls below this");
  series->add_option("--tau-accept", sf.opt.tau_accept, "Residual acceptance tolerance");
  series->add_option("--window", sf.opt.window, "Divergence window")->check(CLI::PositiveNumber);
  series->add_option("--max-iterations", sf.opt.max_iterations, "Series length cap")->check(CLI::PositiveNumber);
  series->add_option("--norm", sf.norm, "Norm")->check(CLI::IsMember({"sup", "euclidean"}));
  series->callback([&] {
    code = execute("transgress", {in1}, g, [&](std::string &s) { return transgress_cmd(in1, sf, s); });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }
  return code;
}
