#include "shiftlab/config.hpp"

#include "shiftlab/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace shiftlab {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"name", "gamma", "kappa"}},
      {"scenario", {"name", "uL", "uR"}},
      {"perturbation", {"eps", "profile", "seed"}},
      {"grid", {"N", "x_min", "x_max", "cfl"}},
      {"solver", {"scheme", "t_end"}},
      {"contraction", {"t0", "R"}},
      {"shifts", {"n_mollify", "samples", "seed"}},
      {"output", {"dir", "snapshots"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

double to_double(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    bad(field, "expected a number, got '" + raw + "'");
  }
  if (!std::isfinite(x)) bad(field, "must be finite");
  return x;
}

template <class Int>
Int to_int(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  Int x = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    bad(field, "expected an integer, got '" + raw + "'");
  }
  return x;
}

std::vector<double> to_list(const std::string& field, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(field, item));
  if (out.empty()) bad(field, "expected a comma-separated list of numbers");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

std::string default_output_root() {
  const char* env = std::getenv("SHIFTLAB_OUTPUT_ROOT");
  return env && *env ? std::string(env) : std::string("shiftlab_runs");
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) bad(section, "key outside any section");
      bad(section, "unknown section");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) bad(section + "." + key, "unknown key");
    }
  }
  RunConfig c;
  auto get = [&](const std::string& field) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(field, '.'))) return *v;
    return std::nullopt;
  };
  auto word = [&](const std::string& field, std::string& dst) {
    if (auto v = get(field)) dst = trim(*v);
  };
  auto num = [&](const std::string& field, double& dst) {
    if (auto v = get(field)) dst = to_double(field, *v);
  };
  word("model.name", c.model);
  num("model.gamma", c.gamma);
  num("model.kappa", c.kappa);
  word("scenario.name", c.scenario);
  if (auto v = get("scenario.uL")) c.uL = to_list("scenario.uL", *v);
  if (auto v = get("scenario.uR")) c.uR = to_list("scenario.uR", *v);
  num("perturbation.eps", c.eps);
  if (auto v = get("perturbation.profile")) {
    try {
      c.profile = parse_profile(trim(*v));
    } catch (const ConfigError& e) {
      bad("perturbation.profile", e.what());
    }
  }
  if (auto v = get("perturbation.seed")) c.seed = to_int<std::uint64_t>("perturbation.seed", *v);
  if (auto v = get("grid.N")) c.grid.N = to_int<int>("grid.N", *v);
  num("grid.x_min", c.grid.x_min);
  num("grid.x_max", c.grid.x_max);
  num("grid.cfl", c.grid.cfl);
  if (auto v = get("solver.scheme")) {
    try {
      c.scheme = parse_scheme(trim(*v));
    } catch (const ConfigError& e) {
      bad("solver.scheme", e.what());
    }
  }
  num("solver.t_end", c.t_end);
  num("contraction.t0", c.t0);
  num("contraction.R", c.R);
  if (auto v = get("shifts.n_mollify")) c.n_mollify = to_int<int>("shifts.n_mollify", *v);
  if (auto v = get("shifts.samples")) c.selection_samples = to_int<int>("shifts.samples", *v);
  if (auto v = get("shifts.seed")) c.selection_seed = to_int<std::uint64_t>("shifts.seed", *v);
  word("output.dir", c.output_dir);
  if (auto v = get("output.snapshots")) c.snapshots = to_int<int>("output.snapshots", *v);
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  o << "[model]\nname = " << c.model << "\ngamma = " << format_double(c.gamma)
    << "\nkappa = " << format_double(c.kappa) << "\n\n";
  o << "[scenario]\nname = " << c.scenario << "\n";
  if (!c.uL.empty()) o << "uL = " << join(c.uL) << "\n";
  if (!c.uR.empty()) o << "uR = " << join(c.uR) << "\n";
  o << "\n[perturbation]\neps = " << format_double(c.eps) << "\nprofile = " << to_string(c.profile)
    << "\nseed = " << c.seed << "\n\n";
  o << "[grid]\nN = " << c.grid.N << "\nx_min = " << format_double(c.grid.x_min)
    << "\nx_max = " << format_double(c.grid.x_max) << "\ncfl = " << format_double(c.grid.cfl)
    << "\n\n";
  o << "[solver]\nscheme = " << to_string(c.scheme) << "\nt_end = " << format_double(c.t_end)
    << "\n\n";
  o << "[contraction]\nt0 = " << format_double(c.t0) << "\nR = " << format_double(c.R) << "\n\n";
  o << "[shifts]\nn_mollify = " << c.n_mollify << "\nsamples = " << c.selection_samples
    << "\nseed = " << c.selection_seed << "\n\n";
  o << "[output]\n";
  if (!c.output_dir.empty()) o << "dir = " << c.output_dir << "\n";
  o << "snapshots = " << c.snapshots << "\n";
  return o.str();
}

void validate_config(const RunConfig& c) {
  if (c.model != "isentropic_euler" && c.model != "full_euler") {
    bad("model.name", "expected isentropic_euler or full_euler, got '" + c.model + "'");
  }
  if (!(c.gamma >= 1.0)) bad("model.gamma", "must be >= 1");
  if (c.model == "full_euler" && !(c.gamma > 1.0)) bad("model.gamma", "must be > 1 for full_euler");
  if (!(c.kappa > 0.0)) bad("model.kappa", "must be > 0");
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), c.scenario) == names.end()) {
    bad("scenario.name", "unknown scenario '" + c.scenario + "'");
  }
  const std::size_t n = c.model == "full_euler" ? 3 : 2;
  if (c.scenario == "custom") {
    if (c.uL.size() != n) bad("scenario.uL", "expected " + std::to_string(n) + " components");
    if (c.uR.size() != n) bad("scenario.uR", "expected " + std::to_string(n) + " components");
  } else if (!c.uL.empty() || !c.uR.empty()) {
    bad(c.uL.empty() ? "scenario.uR" : "scenario.uL", "only allowed with scenario custom");
  }
  if (c.scenario == "sod" && c.model != "full_euler") bad("scenario.name", "sod needs model full_euler");
  if ((c.scenario == "two_shock_isentropic" || c.scenario == "shock_plus_rarefaction" ||
       c.scenario == "pure_rarefaction") &&
      c.model != "isentropic_euler") {
    bad("scenario.name", c.scenario + " needs model isentropic_euler");
  }
  if (!(c.eps >= 0.0)) bad("perturbation.eps", "must be >= 0");
  if (c.grid.N < 16) bad("grid.N", "must be >= 16");
  if (!(c.grid.x_min < 0.0 && c.grid.x_max > 0.0)) bad("grid.x_min", "need x_min < 0 < x_max");
  if (!(c.grid.cfl > 0.0 && c.grid.cfl <= 0.9)) bad("grid.cfl", "must lie in (0, 0.9]");
  if (!(c.t_end > 0.0)) bad("solver.t_end", "must be > 0");
  if (!(c.t0 > 0.0 && c.t0 <= c.t_end)) bad("contraction.t0", "must lie in (0, t_end]");
  if (!(c.R > c.t0)) bad("contraction.R", "must exceed t0");
  if (!(c.R < std::min(-c.grid.x_min, c.grid.x_max))) bad("contraction.R", "must lie inside the grid");
  if (c.n_mollify < 1 || c.n_mollify > 64) bad("shifts.n_mollify", "must lie in [1, 64]");
  if (c.selection_samples < 100) bad("shifts.samples", "must be >= 100");
  if (c.snapshots < 2) bad("output.snapshots", "must be >= 2");
}

}  // namespace shiftlab
