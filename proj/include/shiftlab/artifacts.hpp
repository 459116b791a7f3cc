#ifndef SHIFTLAB_ARTIFACTS_HPP
#define SHIFTLAB_ARTIFACTS_HPP

#include "shiftlab/pipeline.hpp"

#include <string>
#include <vector>

namespace shiftlab {

inline constexpr const char* kArtifactSchema = "shiftlab-artifact-1";
inline constexpr const char* kSweepSchema = "shiftlab-sweep-1";

/// "<root>/<scenario>_eps<eps>_N<N>" unless the config names a directory.
std::string resolve_output_dir(const RunConfig& cfg, const std::string& root);

/// Writes config.ini, manifest.ini, report.ini and the CSV series into `dir`
/// (created if needed). Returns the CSV file names written.
std::vector<std::string> write_artifacts(const RunOutcome& out, const std::string& dir);

/// hypotheses.ini: one section per check plus the overall result.
void write_certification(const CertificationOutcome& out, const std::string& dir);

struct ValidationResult {
  std::size_t files_checked = 0;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

/// Schema check of one run directory, or of a sweep directory (summary.csv plus
/// every run directory it lists).
ValidationResult validate_artifacts(const std::string& dir);

struct SweepRow {
  double eps = 0.0;
  int N = 0;
  std::string dir;
  Verdict verdict = Verdict::error;
  int exit_code = 3;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sup_E = 0.0;
  double shift_ratio = 0.0;
  /// min over t of hn - h1; NaN without two shocks
  double min_gap = 0.0;
  double C_num = 0.0;
  std::string error;
  double seconds = 0.0;
};

/// Cartesian product eps x N with one artifact directory per run under `dir`
/// and `dir`/summary.csv. Calibration is done once per N and shared by all eps.
/// Runs execute on up to `workers` threads (0: hardware concurrency); a failing
/// run is recorded and the sweep continues.
std::vector<SweepRow> run_sweep(const RunConfig& base, const std::vector<double>& eps,
                                const std::vector<int>& N, int workers, const std::string& dir);

void write_sweep_summary(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace shiftlab

#endif
