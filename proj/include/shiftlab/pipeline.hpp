#ifndef SHIFTLAB_PIPELINE_HPP
#define SHIFTLAB_PIPELINE_HPP

#include "shiftlab/config.hpp"
#include "shiftlab/contraction.hpp"
#include "shiftlab/errors.hpp"
#include "shiftlab/riemann.hpp"
#include "shiftlab/shifts.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace shiftlab {

struct Scenario {
  std::string name;
  ModelPtr model;
  State uL;
  State uR;
};

/// Model and Riemann data for the configured scenario.
Scenario resolve_scenario(const RunConfig& cfg);

/// Everything that depends on the scenario but not on eps or the grid.
struct ScenarioSetup {
  Scenario scenario;
  RiemannSolution sol;
  WaveClassification classification;
  StateBox box;
  /// containment radii handed to the weight selection (0 for an absent family)
  double theta1 = 0.0;
  double thetan = 0.0;
  std::optional<WeightSelection> selection;
  RBound r;
  double setup_seconds = 0.0;

  bool has_shock1() const { return sol.waves.front().kind == WaveKind::shock; }
  bool has_shockn() const { return sol.waves.back().kind == WaveKind::shock; }
};

/// Solves, classifies and, inside the verified theory, selects the weights and
/// the wedge speed r. Outside the theory only the first two are filled in.
ScenarioSetup prepare_scenario(const RunConfig& cfg);

/// Quantities fitted on the unperturbed run of a scenario at one grid and then
/// frozen for every eps.
struct Calibration {
  int N = 0;
  /// cells skipped at the shock on the side facing the middle state
  int inner_offset_1 = 1;
  int inner_offset_n = 1;
  /// cells skipped on the outer side; used by the region balance check
  int outer_offset_1 = 1;
  int outer_offset_n = 1;
  /// E(t) - E(0) <= C_num dx
  double C_num = 0.0;
  /// shift-control integral of the unperturbed run, with margin
  double shift_floor = 0.0;
  /// positive part of the shock dissipation rate <= C_diss dx
  double C_diss = 0.0;
  double settle = 0.0;
};

inline constexpr double kCalibrationMargin = 1.2;
inline constexpr double kInnerTraceTolerance = 1e-2;
inline constexpr double kOuterTraceTolerance = 1e-6;

Calibration calibrate(const ScenarioSetup& setup, const RunConfig& cfg);

enum class Verdict { pass, fail, outside_theory, error };

const char* to_string(Verdict v);

struct RegionIdentity {
  std::string region;
  IdentityReport report;
};

struct RunOutcome {
  RunConfig config;
  Verdict verdict = Verdict::error;
  std::optional<ErrorCategory> error;
  std::string message;

  std::optional<ScenarioSetup> setup;
  std::optional<Calibration> calibration;
  std::optional<Trajectory> traj;
  std::optional<ShiftPath> h1;
  std::optional<ShiftPath> hn;
  std::optional<OrderingReport> ordering;
  std::optional<PsiSolution> psi;
  std::optional<ContractionReport> report;
  std::optional<DissipationSeries> dissipation1;
  std::optional<DissipationSeries> dissipationn;
  std::optional<DissipationSummary> dissipation_summary1;
  std::optional<DissipationSummary> dissipation_summaryn;
  std::vector<RegionIdentity> identity;
  /// wall-clock seconds per stage
  std::map<std::string, double> timing;
};

/// Stable CLI contract: 0 pass, 1 verdict fail or outside theory, 2 configuration,
/// 3 numerical error.
int exit_code(const RunOutcome& out);
int exit_code(ErrorCategory c);

/// Runs the perturbed problem with a given setup and calibration. Module errors
/// propagate.
RunOutcome execute(const ScenarioSetup& setup, const Calibration& cal, const RunConfig& cfg);

/// prepare -> calibrate -> execute; every module error is captured into the outcome.
RunOutcome run_pipeline(const RunConfig& cfg);

struct CertificationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CertificationOutcome {
  RunConfig config;
  std::vector<CertificationCheck> checks;
  std::optional<ErrorCategory> error;
  std::string message;

  bool pass() const;
};

/// Structural hypotheses for the scenario: entropy compatibility and convexity
/// on the state box, Liu monotonicity and strengthening along the extremal shock
/// curves, sampled (H2)/(H3), Lax and entropy conditions at the shocks, and the
/// sign condition on every rarefaction fan. Module errors are captured.
CertificationOutcome certify_scenario(const RunConfig& cfg);

int exit_code(const CertificationOutcome& out);

}  // namespace shiftlab

#endif
