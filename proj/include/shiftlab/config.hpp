#ifndef SHIFTLAB_CONFIG_HPP
#define SHIFTLAB_CONFIG_HPP

#include "shiftlab/fvm.hpp"
#include "shiftlab/models.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shiftlab {

/// Everything a single run needs. Stored on disk as INI-style text:
///
///   [model]        name, gamma, kappa
///   [scenario]     name, uL, uR          (uL/uR: conserved components, comma separated;
///                                          only read for scenario "custom")
///   [perturbation] eps, profile, seed
///   [grid]         N, x_min, x_max, cfl
///   [solver]       scheme, t_end
///   [contraction]  t0, R
///   [shifts]       n_mollify, samples, seed
///   [output]       dir, snapshots
struct RunConfig {
  std::string model = "isentropic_euler";
  double gamma = 2.0;
  double kappa = 1.0;

  std::string scenario = "two_shock_isentropic";
  std::vector<double> uL;
  std::vector<double> uR;

  double eps = 0.0;
  ProfileKind profile = ProfileKind::bump;
  std::uint64_t seed = 7;

  Grid1D grid;
  Scheme scheme = Scheme::rusanov;
  double t_end = 0.2;

  double t0 = 0.2;
  double R = 0.6;

  int n_mollify = 4;
  int selection_samples = 10000;
  std::uint64_t selection_seed = 20240611;

  /// empty: "<output root>/<scenario>_eps<eps>_N<N>"
  std::string output_dir;
  /// number of exported snapshots, evenly spaced in time (>= 2)
  int snapshots = 5;

  bool operator==(const RunConfig&) const = default;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"two_shock_isentropic", "shock_plus_rarefaction",
                                              "pure_rarefaction", "sod", "custom"};
  return names;
}

/// ConfigError names the offending "section.key".
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

/// Range checks against the module preconditions; ConfigError names the field.
void validate_config(const RunConfig& cfg);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

/// Output root: $SHIFTLAB_OUTPUT_ROOT if set and nonempty, else "shiftlab_runs".
std::string default_output_root();

}  // namespace shiftlab

#endif
