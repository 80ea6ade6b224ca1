#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "io.hpp"

using perturba::io::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int exit = -1;
  json report;
  std::string raw;
};

std::string sample(const std::string &name) { return std::string(PERTURBA_SAMPLES) + name; }

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ScratchDir {
  fs::path path = fs::temp_directory_path() / ("perturba_cli_" + std::to_string(::getpid()));
  ScratchDir() { fs::create_directories(path); }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path scratch(const std::string &name) {
  static const ScratchDir dir;
  return dir.path / name;
}

/// Runs the CLI with a --report file; stdout and stderr are discarded.
Result run(const std::string &args) {
  static int counter = 0;
  const auto report = scratch("report" + std::to_string(counter++) + ".json");
  fs::remove(report);
  const std::string cmd =
      std::string(PERTURBA_CLI) + " --report " + report.string() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (fs::exists(report)) {
    r.raw = slurp(report);
    r.report = json::parse(r.raw, nullptr, false);
  }
  return r;
}

std::string write_temp(const std::string &name, const json &j) {
  const auto p = scratch(name);
  std::ofstream(p) << j.dump();
  return p.string();
}

} // namespace

TEST(Cli, VerifyHeResidualsAreZero) {
  const auto r = run("verify-he " + sample("he.json"));
  ASSERT_EQ(r.exit, 0);
  EXPECT_EQ(r.report["status"], "ok");
  EXPECT_EQ(r.report["schema"], "perturba-report/1");
  ASSERT_FALSE(r.report["checks"].empty());
  for (const auto &c : r.report["checks"]) {
    EXPECT_EQ(c["residual_norm"], 0.0) << c["name"];
    EXPECT_TRUE(c["ok"].get<bool>());
  }
  EXPECT_EQ(run("verify-he " + sample("he_chain.json")).exit, 0);
}

TEST(Cli, VerifyHeFailureExitsTwo) {
  const auto r = run("verify-he " + sample("he_broken.json"));
  EXPECT_EQ(r.exit, 2);
  EXPECT_EQ(r.report["status"], "fail");
}

TEST(Cli, PerturbRoundTripRecoversInput) {
  const auto r = run("perturb " + sample("he.json") + " " + sample("delta.json") + " --roundtrip");
  ASSERT_EQ(r.exit, 0);
  EXPECT_TRUE(r.report["roundtrip"]["recovered"].get<bool>());
  for (const auto &c : r.report["relations"]) EXPECT_EQ(c["residual_norm"], 0.0);
  // The transferred bundle is itself valid input.
  const auto out = write_temp("perturbed.json", r.report["result"]);
  EXPECT_EQ(run("verify-he " + out).exit, 0);
  EXPECT_EQ(run("--scalar f64 perturb " + sample("he.json") + " " + sample("delta.json") + " --roundtrip").exit, 0);
}

TEST(Cli, SchemaDiagnostics) {
  const auto shape = run("perturb " + sample("he.json") + " " + sample("delta_bad_shape.json"));
  EXPECT_EQ(shape.exit, 1);
  EXPECT_EQ(shape.report["error"], "SchemaError");
  const auto msg = shape.report["message"].get<std::string>();
  EXPECT_NE(msg.find("degree 0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("3x2"), std::string::npos) << msg;

  const auto zero = run("verify-he " + sample("bad_rational.json"));
  EXPECT_EQ(zero.exit, 1);
  EXPECT_NE(zero.report["message"].get<std::string>().find("1/0"), std::string::npos);

  auto he = json::parse(slurp(sample("he.json")));
  he["extra"] = 1;
  EXPECT_EQ(run("verify-he " + write_temp("extra.json", he)).exit, 1);
  he.erase("extra");
  he["L"]["d"] = {{"0", {{"1/2", 0.5}}}};
  const auto flt = run("verify-he " + write_temp("float.json", he));
  EXPECT_EQ(flt.exit, 1);

  std::ofstream(scratch("garbage.json")) << "{\"L\": [1, 2";
  const auto garbage = run("verify-he " + scratch("garbage.json").string());
  EXPECT_EQ(garbage.exit, 1);
  EXPECT_NE(garbage.report["message"].get<std::string>().find("line"), std::string::npos);
}

TEST(Cli, IoAndUsageErrorsExitOne) {
  EXPECT_EQ(run("verify-he " + sample("missing.json")).exit, 1);
  EXPECT_EQ(run("frobnicate " + sample("he.json")).exit, 1);
  EXPECT_EQ(run("verify-he").exit, 1);
  EXPECT_EQ(run("--scalar complex verify-he " + sample("he.json")).exit, 1);
}

TEST(Cli, ErrorReportCarriesRelationAndDegree) {
  const auto [r, code] =
      perturba::io::error_report(perturba::RelationViolation("(5)", 1, "relation (5) fails at degree 1"));
  EXPECT_EQ(code, 2);
  EXPECT_EQ(r["status"], "fail");
  EXPECT_EQ(r["relation"], "(5)");
  EXPECT_EQ(r["degree"], 1);
  EXPECT_EQ(perturba::io::error_report(perturba::SchemaError("x")).second, 1);
  EXPECT_EQ(perturba::io::error_report(perturba::NotSmall("x", 0.5)).first["radius"], 0.5);
}

TEST(Cli, Constructions) {
  const auto rows = run("contract-rows " + sample("double_complex.json"));
  ASSERT_EQ(rows.exit, 0);
  EXPECT_TRUE(rows.report["is_dr"].get<bool>());
  EXPECT_TRUE(rows.report["i1_matches_series"].get<bool>());
  const auto kill = run("kill-contractible " + sample("block_complex.json"));
  ASSERT_EQ(kill.exit, 0);
  EXPECT_TRUE(kill.report["b1_matches_closed_form"].get<bool>());
}

TEST(Cli, LieRigidity) {
  const auto r = run("lie-rigidity " + sample("sl2.json") + " " + sample("lie_scaling.json") + " --t-max 0.5 --steps 100");
  ASSERT_EQ(r.exit, 0);
  EXPECT_EQ(r.report["h2_dim"], 0);
  EXPECT_EQ(r.report["profile"].size(), 101u);
  EXPECT_LE(r.report["max_defect"].get<double>(), 1e-6);
  for (const auto &c : r.report["finite_differences"]) EXPECT_TRUE(c["ok"].get<bool>()) << c["name"];
  EXPECT_EQ(run("lie-rigidity " + sample("sl2.json") + " " + sample("lie_conjugation.json")).exit, 0);
  const auto ab = run("lie-rigidity " + sample("abelian2.json") + " " + sample("abelian2_constant.json"));
  EXPECT_EQ(ab.exit, 2);
  EXPECT_EQ(ab.report["error"], "CohomologyNonzero");
  // A family whose base is not the given algebra is an input error.
  EXPECT_EQ(run("lie-rigidity " + sample("abelian2.json") + " " + sample("lie_scaling.json")).exit, 1);
}

TEST(Cli, HochschildRigidity) {
  const auto formal = run("hochschild-rigidity " + sample("m2.json") + " " + sample("m2_formal.json"));
  ASSERT_EQ(formal.exit, 0);
  EXPECT_EQ(formal.report["kind"], "formal");
  EXPECT_EQ(formal.report["phi"].size(), 3u);
  EXPECT_TRUE(formal.report["c1_bracket_is_coboundary"].get<bool>());
  const auto fam = run("hochschild-rigidity " + sample("m2.json") + " " + sample("m2_family.json"));
  ASSERT_EQ(fam.exit, 0);
  EXPECT_LE(fam.report["max_defect"].get<double>(), 1e-6);
  const auto dual = run("hochschild-rigidity " + sample("dual.json") + " " + sample("dual_family.json"));
  EXPECT_EQ(dual.exit, 2);
  EXPECT_EQ(dual.report["error"], "CohomologyNonzero");
  EXPECT_NE(dual.report["message"].get<std::string>().find("dimension 1"), std::string::npos);
  const auto diag = run("hochschild-rigidity " + sample("dual.json") + " " + sample("dual_family.json") + " --diagnostic");
  EXPECT_EQ(diag.exit, 2);
  const std::string kind = diag.report.value("error", "");
  EXPECT_TRUE(kind == "DefectExceeded" || kind == "NotSmall") << kind;
}

TEST(Cli, MetricContraction) {
  const auto three = run("metric-contraction " + sample("metric3.json"));
  ASSERT_EQ(three.exit, 0);
  EXPECT_EQ(three.report["passing_readings"], json({"corrected"}));
  EXPECT_EQ(run("metric-contraction " + sample("metric3.json") + " --reading verbatim").exit, 2);
  EXPECT_EQ(run("metric-contraction " + sample("metric3.json") + " --sign alternating --reading corrected").exit, 2);
  const auto two = run("metric-contraction " + sample("metric2.json"));
  ASSERT_EQ(two.exit, 0);
  EXPECT_EQ(two.report["passing_readings"].size(), 2u);
  json bad = {{"n", 2}, {"rho", {{0, 1}, {2, 0}}}};
  EXPECT_EQ(run("metric-contraction " + write_temp("asym.json", bad)).exit, 2);
}

TEST(Cli, Transgress) {
  const auto ok = run("transgress " + sample("series_scalar.json"));
  ASSERT_EQ(ok.exit, 0);
  EXPECT_NEAR(ok.report["w"][0].get<double>(), 1.0 / 1.25, 1e-10);
  EXPECT_TRUE(ok.report["below_epsilon"].get<bool>());
  const auto div = run("transgress " + sample("series_diverge.json"));
  EXPECT_EQ(div.exit, 2);
  EXPECT_EQ(div.report["error"], "Divergence");
}

TEST(Cli, ReportsAreDeterministic) {
  const std::vector<std::string> jobs = {
      "verify-he " + sample("he.json"),
      "perturb " + sample("he.json") + " " + sample("delta.json") + " --roundtrip",
      "contract-rows " + sample("double_complex.json"),
      "kill-contractible " + sample("block_complex.json"),
      "lie-rigidity " + sample("sl2.json") + " " + sample("lie_conjugation.json"),
      "hochschild-rigidity " + sample("m2.json") + " " + sample("m2_formal.json"),
      "hochschild-rigidity " + sample("dual.json") + " " + sample("dual_family.json") + " --diagnostic",
      "metric-contraction " + sample("metric3.json"),
      "transgress " + sample("series_scalar.json"),
  };
  for (const auto &job : jobs) {
    const auto a = run(job), b = run(job);
    EXPECT_FALSE(a.raw.empty()) << job;
    EXPECT_EQ(a.raw, b.raw) << job;
  }
}
