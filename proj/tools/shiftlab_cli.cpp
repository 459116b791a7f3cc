// Command-line front end: run, certify, sweep, validate.

#include "shiftlab/artifacts.hpp"
#include "shiftlab/config.hpp"
#include "shiftlab/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

using namespace shiftlab;

// Flags that override fields of the configuration file.
struct Overrides {
  std::string config_path;
  std::optional<std::string> model, scenario, profile, scheme, output_dir;
  std::optional<double> gamma, kappa, eps, x_min, x_max, cfl, t_end, t0, R;
  std::optional<std::vector<double>> uL, uR;
  std::optional<std::uint64_t> seed, selection_seed;
  std::optional<int> N, n_mollify, samples, snapshots;

  void attach(CLI::App* app, bool with_output_dir = true) {
    app->add_option("-c,--config", config_path, "configuration file (INI)")->check(CLI::ExistingFile);
    app->add_option("--model", model, "isentropic_euler | full_euler");
    app->add_option("--gamma", gamma);
    app->add_option("--kappa", kappa);
    app->add_option("--scenario", scenario,
                    "two_shock_isentropic | shock_plus_rarefaction | pure_rarefaction | sod | custom");
    app->add_option("--uL", uL, "conserved left state (custom scenario)")->delimiter(',');
    app->add_option("--uR", uR, "conserved right state (custom scenario)")->delimiter(',');
    app->add_option("--eps", eps, "perturbation amplitude");
    app->add_option("--profile", profile, "sine | bump | noise");
    app->add_option("--seed", seed, "perturbation seed");
    app->add_option("--N", N, "cells");
    app->add_option("--x-min", x_min);
    app->add_option("--x-max", x_max);
    app->add_option("--cfl", cfl);
    app->add_option("--scheme", scheme, "rusanov | godunov_exact");
    app->add_option("--t-end", t_end);
    app->add_option("--t0", t0);
    app->add_option("--R", R);
    app->add_option("--n-mollify", n_mollify);
    app->add_option("--samples", samples, "weight selection samples");
    app->add_option("--selection-seed", selection_seed);
    app->add_option("--snapshots", snapshots, "exported snapshots");
    if (with_output_dir) app->add_option("-o,--output-dir", output_dir, "artifact directory");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    auto set = [](auto& dst, const auto& src) {
      if (src) dst = *src;
    };
    set(c.model, model);
    set(c.gamma, gamma);
    set(c.kappa, kappa);
    set(c.scenario, scenario);
    set(c.uL, uL);
    set(c.uR, uR);
    set(c.eps, eps);
    if (profile) c.profile = parse_profile(*profile);
    set(c.seed, seed);
    set(c.grid.N, N);
    set(c.grid.x_min, x_min);
    set(c.grid.x_max, x_max);
    set(c.grid.cfl, cfl);
    if (scheme) c.scheme = parse_scheme(*scheme);
    set(c.t_end, t_end);
    set(c.t0, t0);
    set(c.R, R);
    set(c.n_mollify, n_mollify);
    set(c.selection_samples, samples);
    set(c.selection_seed, selection_seed);
    set(c.snapshots, snapshots);
    set(c.output_dir, output_dir);
    validate_config(c);
    return c;
  }
};

std::string fmt(double x) { return format_double(x); }

int cmd_run(const Overrides& o, const std::string& root) {
  const RunConfig cfg = o.resolve();
  const RunOutcome out = run_pipeline(cfg);
  const std::string dir = resolve_output_dir(cfg, root);
  write_artifacts(out, dir);
  std::printf("verdict %s\n", to_string(out.verdict));
  if (out.error) std::printf("error %s: %s\n", to_string(*out.error), out.message.c_str());
  else if (!out.message.empty()) std::printf("note %s\n", out.message.c_str());
  if (out.report) {
    const auto& r = *out.report;
    std::printf("sup_E %s  E0 %s  max_excess %s\n", fmt(r.sup_E).c_str(), fmt(r.E0).c_str(),
                fmt(r.max_excess).c_str());
    std::printf("mu1 %s  mu2 %s  shift_control %s\n", fmt(r.mu1).c_str(), fmt(r.mu2).c_str(),
                fmt(r.shift_control).c_str());
  }
  if (out.ordering) std::printf("ordering min_gap %s\n", fmt(out.ordering->min_gap).c_str());
  std::printf("artifacts %s\n", dir.c_str());
  return exit_code(out);
}

int cmd_certify(const Overrides& o, const std::string& root) {
  const RunConfig cfg = o.resolve();
  const CertificationOutcome out = certify_scenario(cfg);
  const std::string dir = cfg.output_dir.empty()
                              ? (std::filesystem::path(root) / (cfg.scenario + "_certify")).string()
                              : cfg.output_dir;
  write_certification(out, dir);
  for (const auto& c : out.checks) {
    std::printf("%-28s %s  %s\n", c.name.c_str(), c.pass ? "ok  " : "FAIL", c.detail.c_str());
  }
  if (out.error) std::printf("error %s: %s\n", to_string(*out.error), out.message.c_str());
  std::printf("certified %s\nartifacts %s\n", out.pass() ? "yes" : "no", dir.c_str());
  return exit_code(out);
}

int cmd_sweep(const Overrides& o, const std::vector<double>& eps, const std::vector<int>& Ns,
              int workers, const std::string& root, const std::string& dir_flag) {
  const RunConfig base = o.resolve();
  const std::string dir =
      dir_flag.empty() ? (std::filesystem::path(root) / ("sweep_" + base.scenario)).string() : dir_flag;
  const auto rows = run_sweep(base, eps, Ns, workers, dir);
  int worst = 0;
  for (const auto& r : rows) {
    std::printf("eps %-6s N %-5d %-24s mu1 %-12s sup_E %-12s %.1fs%s%s\n", fmt(r.eps).c_str(), r.N,
                to_string(r.verdict), fmt(r.mu1).c_str(), fmt(r.sup_E).c_str(), r.seconds,
                r.error.empty() ? "" : "  ", r.error.c_str());
    worst = std::max(worst, r.exit_code);
  }
  std::printf("summary %s/summary.csv\n", dir.c_str());
  return worst;
}

int cmd_validate(const std::string& dir) {
  const ValidationResult v = validate_artifacts(dir);
  for (const auto& p : v.problems) std::printf("problem: %s\n", p.c_str());
  std::printf("%zu files checked, %zu problems\n", v.files_checked, v.problems.size());
  return v.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative-entropy stability laboratory for Riemann solutions with extremal shocks"};
  app.require_subcommand(1);
  std::string root = default_output_root();
  app.add_option("--output-root", root, "default artifact root (env SHIFTLAB_OUTPUT_ROOT)");

  Overrides run_o, cert_o, sweep_o;
  auto* run = app.add_subcommand("run", "simulate, build the shifts and check contraction");
  run_o.attach(run);
  auto* cert = app.add_subcommand("certify", "check the structural hypotheses for a scenario");
  cert_o.attach(cert);

  auto* sweep = app.add_subcommand("sweep", "Cartesian product over eps and N");
  sweep_o.attach(sweep, false);
  std::vector<double> eps{0.0, 0.01, 0.02, 0.05};
  std::vector<int> Ns{500, 1000, 2000};
  int workers = 0;
  std::string sweep_dir;
  sweep->add_option("--eps-list", eps, "comma separated")->delimiter(',');
  sweep->add_option("--N-list", Ns, "comma separated")->delimiter(',');
  sweep->add_option("-j,--workers", workers, "concurrent runs (0: all cores)")->check(CLI::NonNegativeNumber);
  sweep->add_option("-o,--output-dir", sweep_dir, "sweep directory");

  auto* validate = app.add_subcommand("validate", "re-check the artifact schema of a run or sweep");
  std::string validate_dir;
  validate->add_option("dir", validate_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (*run) return cmd_run(run_o, root);
    if (*cert) return cmd_certify(cert_o, root);
    if (*sweep) return cmd_sweep(sweep_o, eps, Ns, workers, root, sweep_dir);
    if (*validate) return cmd_validate(validate_dir);
  } catch (const Error& e) {
    std::fprintf(stderr, "%s error: %s\n", to_string(e.category()), e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 2;
}
