#include "shiftlab/artifacts.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/tokenizer.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace shiftlab {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::string state_text(const State& u) {
  std::vector<std::string> parts;
  for (Eigen::Index i = 0; i < u.size(); ++i) parts.push_back(fmt(u(i)));
  return join(parts, ", ");
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw ConfigError("output: cannot write '" + path.string() + "'");
    out_ << join(header) << "\n";
  }
  void row(const std::vector<double>& values) {
    std::vector<std::string> parts;
    parts.reserve(values.size());
    for (double v : values) parts.push_back(fmt(v));
    out_ << join(parts) << "\n";
  }
  void raw(const std::vector<std::string>& fields) { out_ << join(fields) << "\n"; }

 private:
  std::ofstream out_;
};

void write_ini(const pt::ptree& tree, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output: cannot write '" + path.string() + "'");
  pt::write_ini(out, tree);
}

void put_identity(pt::ptree& t, const RegionIdentity& r) {
  const std::string s = "identity_" + r.region + ".";
  t.put(s + "lhs", fmt(r.report.lhs));
  t.put(s + "rhs", fmt(r.report.rhs));
  t.put(s + "margin", fmt(r.report.margin));
  t.put(s + "interior", fmt(r.report.interior));
  t.put(s + "dx", fmt(r.report.dx));
  t.put(s + "dt_max", fmt(r.report.dt_max));
  t.put(s + "touches", r.report.touches);
}

void put_dissipation(pt::ptree& t, const std::string& sec, const DissipationSummary& d, double c) {
  t.put(sec + ".steps", d.steps);
  t.put(sec + ".nonpositive", d.nonpositive);
  t.put(sec + ".within_tol", d.within_tol);
  t.put(sec + ".fraction_nonpositive", fmt(d.fraction_nonpositive));
  t.put(sec + ".max_lhs", fmt(d.max_lhs));
  t.put(sec + ".c1", fmt(c));
}

void write_shift(const fs::path& path, const ShiftPath& p) {
  CsvWriter w(path, {"t", "h", "hdot", "regime"});
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const bool last = k + 1 == p.times.size();
    const std::string regime =
        last ? "nan" : (p.regimes[k] == ShiftRegime::runaway ? "runaway" : "characteristic");
    w.raw({fmt(p.times[k]), fmt(p.positions[k]), last ? "nan" : fmt(p.velocities[k]), regime});
  }
}

void write_dissipation(const fs::path& path, const DissipationSeries& s,
                       const std::vector<double>& hdot) {
  CsvWriter w(path, {"t", "hdot", "lhs", "rhs"});
  for (std::size_t k = 0; k < s.times.size(); ++k) w.row({s.times[k], hdot[k], s.lhs[k], s.rhs[k]});
}

// ---- validation helpers ----------------------------------------------------

bool numeric(const std::string& s) {
  if (s == "nan" || s == "inf" || s == "-inf") return true;
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

std::vector<std::string> split_csv(const std::string& line) {
  boost::tokenizer<boost::escaped_list_separator<char>> tok(line);
  return {tok.begin(), tok.end()};
}

void check_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::map<std::string, std::set<std::string>>& words, ValidationResult& res) {
  ++res.files_checked;
  const std::string name = path.filename().string();
  std::ifstream in(path);
  if (!in) {
    res.problems.push_back(name + ": missing");
    return;
  }
  std::string line;
  if (!std::getline(in, line)) {
    res.problems.push_back(name + ": empty file");
    return;
  }
  const auto got = split_csv(line);
  if (got != header) {
    res.problems.push_back(name + ": header '" + line + "' does not match '" + join(header) + "'");
    return;
  }
  std::size_t row = 1;
  double prev = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++row;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      res.problems.push_back(name + ": row " + std::to_string(row) + " has " +
                             std::to_string(f.size()) + " fields, expected " +
                             std::to_string(header.size()));
      return;
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto w = words.find(header[i]);
      const bool ok = w != words.end() ? w->second.count(f[i]) > 0 : numeric(f[i]);
      if (!ok) {
        res.problems.push_back(name + ": row " + std::to_string(row) + " column '" + header[i] +
                               "' has invalid value '" + f[i] + "'");
        return;
      }
    }
    const double first = std::stod(f[0]);
    if (first < prev) {
      res.problems.push_back(name + ": column '" + header[0] + "' decreases at row " +
                             std::to_string(row));
      return;
    }
    prev = first;
  }
  if (row == 1) res.problems.push_back(name + ": no data rows");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, item.find_last_not_of(' ') - b + 1));
  }
  return out;
}

void validate_run(const fs::path& dir, ValidationResult& res) {
  const std::string tag = dir.filename().string() + "/";
  pt::ptree manifest;
  try {
    pt::read_ini((dir / "manifest.ini").string(), manifest);
  } catch (const pt::ini_parser_error& e) {
    res.problems.push_back(tag + "manifest.ini: " + e.message());
    return;
  }
  ++res.files_checked;
  auto need = [&](const std::string& key) -> std::string {
    const auto v = manifest.get_optional<std::string>(key);
    if (!v) res.problems.push_back(tag + "manifest.ini: missing key '" + key + "'");
    return v.value_or("");
  };
  if (need("run.schema") != kArtifactSchema) {
    res.problems.push_back(tag + "manifest.ini: unknown schema");
    return;
  }
  const std::string verdict = need("run.verdict");
  static const std::set<std::string> verdicts{"PASS", "FAIL", "OUTSIDE_VERIFIED_THEORY", "ERROR"};
  if (!verdicts.count(verdict)) res.problems.push_back(tag + "manifest.ini: bad verdict '" + verdict + "'");
  need("run.exit_code");
  need("seeds.perturbation");
  need("seeds.selection");
  try {
    load_config((dir / "config.ini").string());
    ++res.files_checked;
  } catch (const Error& e) {
    res.problems.push_back(tag + "config.ini: " + e.what());
  }
  if (verdict == "ERROR") return;
  const auto comps = split_list(need("riemann.components"));
  const auto files = split_list(manifest.get("files.csv", ""));
  const std::set<std::string> listed(files.begin(), files.end());
  auto require_listed = [&](const std::string& f) {
    if (!listed.count(f)) res.problems.push_back(tag + "manifest.ini: '" + f + "' not listed");
  };
  require_listed("exact_profile.csv");
  if (verdict == "PASS" || verdict == "FAIL") {
    require_listed("series.csv");
    if (manifest.get("riemann.shock_1", "false") == "true") {
      require_listed("shift_h1.csv");
      require_listed("dissipation_h1.csv");
    }
    if (manifest.get("riemann.shock_n", "false") == "true") {
      require_listed("shift_hn.csv");
      require_listed("dissipation_hn.csv");
    }
    pt::ptree report;
    try {
      pt::read_ini((dir / "report.ini").string(), report);
      ++res.files_checked;
      for (const char* k : {"contraction.mu1", "contraction.mu2", "contraction.sup_E",
                            "contraction.pass", "contraction.shift_control"}) {
        if (!report.get_optional<std::string>(k)) {
          res.problems.push_back(tag + "report.ini: missing key '" + std::string(k) + "'");
        }
      }
    } catch (const pt::ini_parser_error& e) {
      res.problems.push_back(tag + "report.ini: " + e.message());
    }
  }
  const std::set<std::string> regimes{"characteristic", "runaway", "nan"};
  for (const auto& f : files) {
    std::vector<std::string> header;
    std::map<std::string, std::set<std::string>> words;
    if (f == "series.csv") {
      header = {"t", "E", "L2", "h1", "hn", "shift_integrand"};
    } else if (f == "shift_h1.csv" || f == "shift_hn.csv") {
      header = {"t", "h", "hdot", "regime"};
      words["regime"] = regimes;
    } else if (f == "dissipation_h1.csv" || f == "dissipation_hn.csv") {
      header = {"t", "hdot", "lhs", "rhs"};
    } else if (f == "exact_profile.csv") {
      header = {"x"};
      for (const auto& c : comps) header.push_back(c);
    } else if (f.rfind("snapshot_", 0) == 0) {
      header = {"x"};
      for (const auto& c : comps) header.push_back(c);
      for (const auto& c : comps) header.push_back("psi_" + c);
    } else {
      res.problems.push_back(tag + f + ": not part of the schema");
      continue;
    }
    check_csv(dir / f, header, words, res);
    if (!res.problems.empty() && res.problems.back().rfind(f, 0) == 0) {
      res.problems.back() = tag + res.problems.back();
    }
  }
}

}  // namespace

std::string resolve_output_dir(const RunConfig& cfg, const std::string& root) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return (fs::path(root) /
          (cfg.scenario + "_eps" + format_double(cfg.eps) + "_N" + std::to_string(cfg.grid.N)))
      .string();
}

std::vector<std::string> write_artifacts(const RunOutcome& out, const std::string& dir_s) {
  const fs::path dir(dir_s);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output: cannot create '" + dir_s + "': " + ec.message());
  {
    std::ofstream cfg(dir / "config.ini");
    cfg << serialize_config(out.config);
  }
  std::vector<std::string> files;
  pt::ptree man;
  man.put("run.schema", kArtifactSchema);
  man.put("run.verdict", to_string(out.verdict));
  man.put("run.exit_code", exit_code(out));
  man.put("run.error_category", out.error ? to_string(*out.error) : "none");
  man.put("run.message", out.message);
  man.put("run.scenario", out.config.scenario);
  man.put("run.model", out.config.model);
  man.put("seeds.perturbation", out.config.seed);
  man.put("seeds.selection", out.config.selection_seed);
  for (const auto& [k, v] : out.timing) man.put("timing." + k, fmt(v));

  pt::ptree rep;
  if (out.setup) {
    const ScenarioSetup& s = *out.setup;
    const SystemModel& m = *s.scenario.model;
    const auto comps = m.component_names();
    man.put("riemann.components", join(comps));
    man.put("riemann.regime", to_string(s.classification.regime));
    man.put("riemann.classification", s.classification.reason);
    man.put("riemann.shock_1", s.has_shock1() ? "true" : "false");
    man.put("riemann.shock_n", s.has_shockn() ? "true" : "false");
    for (std::size_t i = 0; i < s.sol.states.size(); ++i) {
      man.put("riemann.v" + std::to_string(i + 1), state_text(s.sol.states[i]));
    }
    for (std::size_t i = 0; i < s.sol.waves.size(); ++i) {
      const Wave& w = s.sol.waves[i];
      const std::string p = "riemann.wave" + std::to_string(i + 1) + "_";
      man.put(p + "kind", to_string(w.kind));
      man.put(p + "sigma", fmt(w.sigma));
      man.put(p + "speed_lo", fmt(w.speed_lo));
      man.put(p + "speed_hi", fmt(w.speed_hi));
    }
    if (s.classification.regime != TheoryRegime::outside_verified_theory) {
      const int n = m.n();
      man.put("riemann.fan_cut_left", fmt(m.lambda(s.sol.states[1], std::min(2, n))));
      man.put("riemann.fan_cut_right",
              fmt(m.lambda(s.sol.states[static_cast<std::size_t>(n - 1)], std::max(1, n - 1))));
      man.put("wedge.r", fmt(s.r.r));
      man.put("seeds.r_pairs", s.r.seed);
    }
    auto put_family = [&](const std::string& sec, const std::optional<FamilyCertificate>& c,
                          double theta) {
      if (!c) return;
      man.put(sec + ".theta", fmt(theta));
      man.put(sec + ".a", fmt(c->a));
      man.put(sec + ".a_star", fmt(c->a_star));
      man.put(sec + ".C_lemma", fmt(c->C_lemma));
      man.put(sec + ".c1", fmt(c->c1));
      man.put(sec + ".L_star", fmt(c->L_star));
      man.put(sec + ".gamma0", fmt(c->gamma0));
      man.put(sec + ".c4", fmt(c->c4));
      man.put(sec + ".C_star", fmt(c->C_star));
      man.put(sec + ".containment_samples", c->containment_samples);
      man.put(sec + ".containment_violations", c->containment_violations);
    };
    if (s.selection) {
      put_family("selection_1", s.selection->family1, s.theta1);
      put_family("selection_n", s.selection->familyn, s.thetan);
    }
    // exact profile at t_end on the cell centres
    const Grid1D& g = out.config.grid;
    CsvWriter w(dir / "exact_profile.csv", [&] {
      std::vector<std::string> h{"x"};
      for (const auto& c : comps) h.push_back(c);
      return h;
    }());
    for (int j = 0; j < g.N; ++j) {
      const double x = g.center(j);
      const State u = evaluate(s.sol, x, out.config.t_end);
      std::vector<double> row{x};
      for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(u(i));
      w.row(row);
    }
    files.push_back("exact_profile.csv");
  }
  if (out.calibration) {
    const Calibration& c = *out.calibration;
    man.put("calibration.N", c.N);
    man.put("calibration.inner_offset_1", c.inner_offset_1);
    man.put("calibration.inner_offset_n", c.inner_offset_n);
    man.put("calibration.outer_offset_1", c.outer_offset_1);
    man.put("calibration.outer_offset_n", c.outer_offset_n);
    man.put("calibration.C_num", fmt(c.C_num));
    man.put("calibration.shift_floor", fmt(c.shift_floor));
    man.put("calibration.C_diss", fmt(c.C_diss));
    man.put("calibration.settle", fmt(c.settle));
  }
  if (out.traj) {
    const Trajectory& tr = *out.traj;
    const auto comps = tr.model->component_names();
    man.put("grid.N", tr.grid.N);
    man.put("grid.x_min", fmt(tr.grid.x_min));
    man.put("grid.x_max", fmt(tr.grid.x_max));
    man.put("grid.dx", fmt(tr.grid.dx()));
    man.put("grid.cfl", fmt(tr.grid.cfl));
    man.put("grid.scheme", to_string(tr.options.scheme));
    man.put("grid.steps", tr.steps());
    man.put("grid.t_end", fmt(tr.times.back()));
    const std::size_t K = tr.times.size();
    const int S = std::max(2, out.config.snapshots);
    std::vector<std::string> snap_times;
    std::set<std::size_t> picked;
    for (int i = 0; i < S; ++i) {
      picked.insert(static_cast<std::size_t>(std::llround(double(i) * double(K - 1) / double(S - 1))));
    }
    int idx = 0;
    for (std::size_t k : picked) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%02d.csv", idx++);
      std::vector<std::string> h{"x"};
      for (const auto& c : comps) h.push_back(c);
      for (const auto& c : comps) h.push_back("psi_" + c);
      CsvWriter w(dir / name, h);
      for (int j = 0; j < tr.grid.N; ++j) {
        const double x = tr.grid.center(j);
        const State& u = tr.snapshots[k][static_cast<std::size_t>(j)];
        const State v = out.psi ? out.psi->value(x, k) : u;
        std::vector<double> row{x};
        for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(u(i));
        for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
        w.row(row);
      }
      files.push_back(name);
      snap_times.push_back(fmt(tr.times[k]));
    }
    man.put("snapshots.times", join(snap_times, ", "));
  }
  if (out.h1) {
    write_shift(dir / "shift_h1.csv", *out.h1);
    files.push_back("shift_h1.csv");
  }
  if (out.hn) {
    write_shift(dir / "shift_hn.csv", *out.hn);
    files.push_back("shift_hn.csv");
  }
  if (out.dissipation1 && out.h1) {
    write_dissipation(dir / "dissipation_h1.csv", *out.dissipation1, out.h1->velocities);
    files.push_back("dissipation_h1.csv");
  }
  if (out.dissipationn && out.hn) {
    write_dissipation(dir / "dissipation_hn.csv", *out.dissipationn, out.hn->velocities);
    files.push_back("dissipation_hn.csv");
  }
  if (out.report) {
    const ContractionReport& r = *out.report;
    CsvWriter w(dir / "series.csv", {"t", "E", "L2", "h1", "hn", "shift_integrand"});
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      w.row({r.times[k], r.E[k], r.L2[k], r.h1[k], r.hn[k],
             k < r.shift_integrand.size() ? r.shift_integrand[k] : kNaN});
    }
    files.push_back("series.csv");
    rep.put("contraction.pass", r.pass ? "true" : "false");
    rep.put("contraction.R", fmt(r.R));
    rep.put("contraction.r", fmt(r.r));
    rep.put("contraction.t0", fmt(r.t0));
    rep.put("contraction.dx", fmt(r.dx));
    rep.put("contraction.weight_left", fmt(r.weights.left));
    rep.put("contraction.weight_middle", fmt(r.weights.middle));
    rep.put("contraction.weight_right", fmt(r.weights.right));
    rep.put("contraction.E0", fmt(r.E0));
    rep.put("contraction.sup_E", fmt(r.sup_E));
    rep.put("contraction.max_excess", fmt(r.max_excess));
    rep.put("contraction.C_num", fmt(r.C_num));
    rep.put("contraction.c_star", fmt(r.c_star));
    rep.put("contraction.initial_mass", fmt(r.initial_mass));
    rep.put("contraction.final_left", fmt(r.final_regions.left));
    rep.put("contraction.final_middle", fmt(r.final_regions.middle));
    rep.put("contraction.final_right", fmt(r.final_regions.right));
    rep.put("contraction.shift_control", fmt(r.shift_control));
    rep.put("contraction.shift_ratio", fmt(r.shift_ratio));
    rep.put("contraction.mu1", fmt(r.mu1));
    rep.put("contraction.mu2", fmt(r.mu2));
    rep.put("contraction.lipschitz_condition", r.lipschitz_condition ? "true" : "false");
  }
  if (out.ordering) {
    rep.put("ordering.min_gap", fmt(out.ordering->min_gap));
    rep.put("ordering.pass", out.ordering->pass ? "true" : "false");
  }
  if (out.dissipation_summary1) {
    put_dissipation(rep, "dissipation_1", *out.dissipation_summary1, out.dissipation1->c);
  }
  if (out.dissipation_summaryn) {
    put_dissipation(rep, "dissipation_n", *out.dissipation_summaryn, out.dissipationn->c);
  }
  for (const auto& r : out.identity) put_identity(rep, r);
  if (!rep.empty()) write_ini(rep, dir / "report.ini");
  man.put("files.csv", join(files, ", "));
  write_ini(man, dir / "manifest.ini");
  return files;
}

void write_certification(const CertificationOutcome& out, const std::string& dir_s) {
  const fs::path dir(dir_s);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.ini");
    cfg << serialize_config(out.config);
  }
  pt::ptree t;
  t.put("certify.pass", out.pass() ? "true" : "false");
  t.put("certify.exit_code", exit_code(out));
  t.put("certify.error_category", out.error ? to_string(*out.error) : "none");
  t.put("certify.message", out.message);
  for (const auto& c : out.checks) {
    t.put("check_" + c.name + ".pass", c.pass ? "true" : "false");
    t.put("check_" + c.name + ".detail", c.detail);
  }
  write_ini(t, dir / "hypotheses.ini");
}

ValidationResult validate_artifacts(const std::string& dir_s) {
  ValidationResult res;
  const fs::path dir(dir_s);
  if (!fs::is_directory(dir)) {
    res.problems.push_back(dir_s + ": not a directory");
    return res;
  }
  if (fs::exists(dir / "manifest.ini")) {
    validate_run(dir, res);
    return res;
  }
  if (!fs::exists(dir / "summary.csv")) {
    res.problems.push_back(dir_s + ": neither manifest.ini nor summary.csv found");
    return res;
  }
  try {
    pt::ptree man;
    pt::read_ini((dir / "sweep.ini").string(), man);
    ++res.files_checked;
    if (man.get("sweep.schema", "") != kSweepSchema) res.problems.push_back("sweep.ini: unknown schema");
  } catch (const pt::ini_parser_error& e) {
    res.problems.push_back("sweep.ini: " + e.message());
  }
  const std::vector<std::string> header{"eps", "N", "dir", "verdict", "exit_code", "mu1", "mu2",
                                        "sup_E", "shift_ratio", "min_gap", "C_num", "error"};
  std::ifstream in(dir / "summary.csv");
  std::string line;
  ++res.files_checked;
  if (!std::getline(in, line) || split_csv(line) != header) {
    res.problems.push_back("summary.csv: header does not match '" + join(header) + "'");
    return res;
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      res.problems.push_back("summary.csv: row " + std::to_string(row) + " has the wrong field count");
      continue;
    }
    for (std::size_t i : {0u, 1u, 4u, 5u, 6u, 7u, 8u, 9u, 10u}) {
      if (!numeric(f[i])) {
        res.problems.push_back("summary.csv: row " + std::to_string(row) + " column '" +
                               header[i] + "' is not numeric");
      }
    }
    if (fs::is_directory(dir / f[2])) {
      validate_run(dir / f[2], res);
    } else {
      res.problems.push_back("summary.csv: run directory '" + f[2] + "' missing");
    }
  }
  return res;
}

void write_sweep_summary(const std::vector<SweepRow>& rows, const std::string& path) {
  CsvWriter w(path, {"eps", "N", "dir", "verdict", "exit_code", "mu1", "mu2", "sup_E",
                     "shift_ratio", "min_gap", "C_num", "error"});
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    w.raw({fmt(r.eps), std::to_string(r.N), fs::path(r.dir).filename().string(),
           to_string(r.verdict), std::to_string(r.exit_code), fmt(r.mu1), fmt(r.mu2), fmt(r.sup_E),
           fmt(r.shift_ratio), fmt(r.min_gap), fmt(r.C_num), "\"" + err + "\""});
  }
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const std::vector<double>& eps,
                                const std::vector<int>& Ns, int workers, const std::string& dir) {
  if (eps.empty() || Ns.empty()) throw ConfigError("sweep: eps and N lists must be nonempty");
  fs::create_directories(dir);
  std::vector<RunConfig> cfgs;
  for (int N : Ns) {
    for (double e : eps) {
      RunConfig c = base;
      c.eps = e;
      c.grid.N = N;
      c.output_dir.clear();
      validate_config(c);
      c.output_dir = resolve_output_dir(c, dir);
      cfgs.push_back(c);
    }
  }
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned nthreads = workers > 0 ? static_cast<unsigned>(workers) : hw;

  auto parallel = [&](std::size_t count, auto&& job) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < std::min<std::size_t>(nthreads, count); ++i) {
      pool.emplace_back([&] {
        for (std::size_t j; (j = next++) < count;) job(j);
      });
    }
    for (auto& t : pool) t.join();
  };

  std::optional<ScenarioSetup> setup;
  std::string setup_error;
  std::optional<ErrorCategory> setup_category;
  try {
    setup = prepare_scenario(base);
  } catch (const Error& e) {
    setup_error = e.what();
    setup_category = e.category();
  }
  // one calibration per grid, shared by every eps on it
  std::map<int, std::optional<Calibration>> cal;
  std::map<int, std::string> cal_error;
  std::mutex mu;
  if (setup && setup->classification.regime != TheoryRegime::outside_verified_theory) {
    parallel(Ns.size(), [&](std::size_t i) {
      RunConfig c = base;
      c.grid.N = Ns[i];
      try {
        Calibration k = calibrate(*setup, c);
        std::lock_guard<std::mutex> lock(mu);
        cal[Ns[i]] = k;
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(mu);
        cal_error[Ns[i]] = std::string(to_string(e.category())) + ": " + e.what();
      }
    });
  }

  std::vector<SweepRow> rows(cfgs.size());
  parallel(cfgs.size(), [&](std::size_t i) {
    const RunConfig& c = cfgs[i];
    const auto start = std::chrono::steady_clock::now();
    RunOutcome out;
    out.config = c;
    if (!setup) {
      out.verdict = Verdict::error;
      out.error = setup_category;
      out.message = setup_error;
    } else if (setup->classification.regime == TheoryRegime::outside_verified_theory) {
      out = execute(*setup, Calibration{}, c);
    } else if (!cal.count(c.grid.N) || !cal.at(c.grid.N)) {
      out.verdict = Verdict::error;
      out.error = ErrorCategory::trace;
      out.message = "calibration failed: " + cal_error[c.grid.N];
    } else {
      try {
        out = execute(*setup, *cal.at(c.grid.N), c);
      } catch (const Error& e) {
        out = RunOutcome{};
        out.config = c;
        out.setup = setup;
        out.verdict = Verdict::error;
        out.error = e.category();
        out.message = e.what();
      }
    }
    SweepRow& r = rows[i];
    r.eps = c.eps;
    r.N = c.grid.N;
    r.dir = c.output_dir;
    try {
      write_artifacts(out, c.output_dir);
    } catch (const Error& e) {
      out.verdict = Verdict::error;
      out.error = e.category();
      out.message = e.what();
    }
    r.verdict = out.verdict;
    r.exit_code = exit_code(out);
    r.error = out.error ? std::string(to_string(*out.error)) + ": " + out.message : out.message;
    r.min_gap = out.ordering ? out.ordering->min_gap : kNaN;
    r.C_num = out.calibration ? out.calibration->C_num : kNaN;
    if (out.report) {
      r.mu1 = out.report->mu1;
      r.mu2 = out.report->mu2;
      r.sup_E = out.report->sup_E;
      r.shift_ratio = out.report->shift_ratio;
    } else {
      r.mu1 = r.mu2 = r.sup_E = r.shift_ratio = kNaN;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  write_sweep_summary(rows, (fs::path(dir) / "summary.csv").string());
  pt::ptree man;
  man.put("sweep.schema", kSweepSchema);
  man.put("sweep.scenario", base.scenario);
  std::string eps_list, N_list;
  for (double e : eps) eps_list += (eps_list.empty() ? "" : ", ") + fmt(e);
  for (int n : Ns) N_list += (N_list.empty() ? "" : ", ") + std::to_string(n);
  man.put("sweep.eps", eps_list);
  man.put("sweep.N", N_list);
  man.put("sweep.runs", rows.size());
  write_ini(man, fs::path(dir) / "sweep.ini");
  return rows;
}

}  // namespace shiftlab
