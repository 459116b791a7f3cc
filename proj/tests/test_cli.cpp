#include "doctest.h"

#include "shiftlab/artifacts.hpp"
#include "shiftlab/config.hpp"
#include "shiftlab/errors.hpp"
#include "shiftlab/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace shiftlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shiftlab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("configuration round trip") {
  RunConfig c;
  c.scenario = "custom";
  c.uL = {1.0, 0.5};
  c.uR = {1.5, -0.25};
  c.eps = 0.0123456789;
  c.profile = ProfileKind::noise;
  c.seed = 99;
  c.grid.N = 777;
  c.grid.cfl = 0.4;
  c.scheme = Scheme::godunov_exact;
  c.t0 = 0.15;
  c.R = 0.5;
  c.output_dir = "some/where";
  const RunConfig back = parse_config(serialize_config(c));
  CHECK(back == c);
  CHECK(parse_config(serialize_config(RunConfig{})) == RunConfig{});
  CHECK(parse_config("") == RunConfig{});
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("malformed configuration names the field") {
  CHECK(config_error("[grid]\nN = abc\n").find("grid.N") != std::string::npos);
  CHECK(config_error("[grid]\nNN = 3\n").find("grid.NN") != std::string::npos);
  CHECK(config_error("[nonsense]\nx = 1\n").find("nonsense") != std::string::npos);
  CHECK(config_error("[perturbation]\neps = 0.1x\n").find("perturbation.eps") != std::string::npos);
  CHECK(config_error("[perturbation]\nprofile = square\n").find("perturbation.profile") != std::string::npos);
  CHECK(config_error("[contraction]\nR = 0.1\nt0 = 0.2\n") != "");
  CHECK(config_error("[scenario]\nname = custom\n").find("uL") != std::string::npos);
  CHECK(config_error("[scenario]\nname = sod\n") != "");
  CHECK(config_error("[model]\nname = full_euler\n[scenario]\nname = sod\n") == "");
  CHECK_THROWS_AS(load_config("/nonexistent/shiftlab.ini"), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code(ErrorCategory::configuration) == 2);
  RunOutcome o;
  o.verdict = Verdict::pass;
  CHECK(exit_code(o) == 0);
  o.verdict = Verdict::fail;
  CHECK(exit_code(o) == 1);
  o.verdict = Verdict::outside_theory;
  CHECK(exit_code(o) == 1);
}

TEST_CASE("unperturbed two-shock run passes and writes valid artifacts") {
  RunConfig c;
  c.grid.N = 500;
  const RunOutcome out = run_pipeline(c);
  CHECK(out.verdict == Verdict::pass);
  CHECK(exit_code(out) == 0);
  REQUIRE(out.report);
  CHECK(out.report->mu1 == 0.0);
  CHECK(out.report->initial_mass < 1e-20);
  CHECK(out.ordering->pass);

  const fs::path dir = scratch("run");
  const auto csvs = write_artifacts(out, dir.string());
  CHECK_FALSE(csvs.empty());
  const ValidationResult v = validate_artifacts(dir.string());
  CHECK(v.ok());
  CHECK(v.files_checked >= csvs.size() + 2);
  CHECK(parse_config(read_file(dir / "config.ini")) == c);
  CHECK(read_file(dir / "manifest.ini").find("PASS") != std::string::npos);

  // corrupt one header
  const fs::path series = dir / "series.csv";
  std::string text = read_file(series);
  text.replace(0, text.find('\n'), "t,E,L2,h1,hn,bogus");
  std::ofstream(series) << text;
  const ValidationResult bad = validate_artifacts(dir.string());
  REQUIRE_FALSE(bad.ok());
  CHECK(bad.problems.front().find("series.csv") != std::string::npos);

  fs::remove(dir / "report.ini");
  CHECK_FALSE(validate_artifacts(dir.string()).ok());
  CHECK_FALSE(validate_artifacts((dir / "missing").string()).ok());
}

TEST_CASE("Sod is outside the verified theory") {
  RunConfig c;
  c.model = "full_euler";
  c.gamma = 1.4;
  c.scenario = "sod";
  c.grid.N = 200;
  const RunOutcome out = run_pipeline(c);
  CHECK(out.verdict == Verdict::outside_theory);
  CHECK(exit_code(out) == 1);
  CHECK_FALSE(out.report);
  const fs::path dir = scratch("sod");
  write_artifacts(out, dir.string());
  CHECK(validate_artifacts(dir.string()).ok());
}

TEST_CASE("configuration errors are captured by the pipeline") {
  RunConfig c;
  c.grid.N = 500;
  c.R = 0.045;
  c.t0 = 0.04;
  const RunOutcome out = run_pipeline(c);
  CHECK(out.verdict == Verdict::error);
  REQUIRE(out.error);
  CHECK(*out.error == ErrorCategory::configuration);
  CHECK(exit_code(out) == 2);
}

TEST_CASE("certification") {
  RunConfig c;
  const CertificationOutcome ok = certify_scenario(c);
  CHECK(ok.pass());
  CHECK(exit_code(ok) == 0);
  CHECK(ok.checks.size() > 5);

  c.gamma = 1.0;
  const CertificationOutcome g1 = certify_scenario(c);
  CHECK_FALSE(g1.pass());
  CHECK(exit_code(g1) == 1);

  c.gamma = 2.0;
  c.scenario = "pure_rarefaction";
  CHECK(certify_scenario(c).pass());

  const fs::path dir = scratch("certify");
  write_certification(ok, dir.string());
  CHECK(fs::exists(dir / "hypotheses.ini"));
  CHECK(fs::exists(dir / "config.ini"));
}

TEST_CASE("sweep: one row per (eps, N), deterministic") {
  RunConfig base;
  const std::vector<double> eps{0.0, 0.01, 0.05};
  const std::vector<int> Ns{500, 600};
  const fs::path d1 = scratch("sweep1"), d2 = scratch("sweep2");
  const auto a = run_sweep(base, eps, Ns, 3, d1.string());
  const auto b = run_sweep(base, eps, Ns, 1, d2.string());
  REQUIRE(a.size() == eps.size() * Ns.size());
  REQUIRE(b.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].verdict == Verdict::pass);
    CHECK(a[i].eps == b[i].eps);
    CHECK(a[i].N == b[i].N);
    CHECK(a[i].mu1 == b[i].mu1);
    CHECK(a[i].sup_E == b[i].sup_E);
    CHECK(a[i].min_gap == b[i].min_gap);
    CHECK(a[i].min_gap >= 0.0);
  }
  CHECK(validate_artifacts(d1.string()).ok());
  CHECK(fs::exists(d1 / "summary.csv"));

  // a grid too coarse to calibrate is recorded and does not stop the sweep
  const auto c = run_sweep(base, {0.0}, {200, 500}, 2, scratch("sweep3").string());
  REQUIRE(c.size() == 2);
  CHECK(c[0].verdict == Verdict::error);
  CHECK_FALSE(c[0].error.empty());
  CHECK(c[1].verdict == Verdict::pass);
}

TEST_CASE("output directory naming") {
  RunConfig c;
  c.eps = 0.01;
  c.grid.N = 1000;
  const std::string d = resolve_output_dir(c, "root");
  CHECK(d.find("two_shock_isentropic") != std::string::npos);
  CHECK(d.find("1000") != std::string::npos);
  c.output_dir = "explicit";
  CHECK(resolve_output_dir(c, "root") == "explicit");
}
