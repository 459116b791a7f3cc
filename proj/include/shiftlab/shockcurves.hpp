#ifndef SHIFTLAB_SHOCKCURVES_HPP
#define SHIFTLAB_SHOCKCURVES_HPP

#include "shiftlab/errors.hpp"
#include "shiftlab/models.hpp"

#include <string>
#include <vector>

namespace shiftlab {

struct CurveSample {
  double s = 0.0;
  /// Family 1: the right state reached from the base. Family n: the left state
  /// that the base (a right state) is reached from.
  State state;
  double sigma = 0.0;
};

struct ShockCurve {
  int family = 1;
  State base;
  double ds = 0.0;
  std::vector<CurveSample> samples;
  /// Set when continuation stopped at the admissibility boundary before s_max.
  bool truncated = false;
  std::string truncation_reason;
};

inline constexpr double kDefaultCurveDs = 1e-3;
inline constexpr double kDefaultCurveSmax = 5.0;

/// Arc-length continuation of the Rankine-Hugoniot locus of `family` (1 or n)
/// through `base`, on the Liu branch (sigma decreasing for family 1, increasing
/// for family n). If s_max < ds the curve holds only its origin.
ShockCurve trace_hugoniot(const SystemModel& model, const State& base, int family,
                          double s_max = kDefaultCurveSmax, double ds = kDefaultCurveDs);

/// Continuation of the Hugoniot branch leaving `base` along +/- the eigenvector of
/// family k (any k). No Liu branch selection; used for sampled certification.
ShockCurve trace_hugoniot_branch(const SystemModel& model, const State& base, int k,
                                 int direction, double s_max, double ds);

/// Least-squares speed of the jump uL -> uR; NotADiscontinuityError if the
/// Rankine-Hugoniot residual exceeds 1e-8 * (|f(uL)| + |f(uR)|).
double shock_speed(const SystemModel& model, const State& uL, const State& uR);

class NotADiscontinuityError : public PreconditionError {
 public:
  NotADiscontinuityError(const std::string& what, double residual)
      : PreconditionError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

double rh_residual(const SystemModel& model, const State& uL, const State& uR, double sigma);

/// sigma*(eta(uR) - eta(uL)) - (q(uR) - q(uL)); nonnegative for entropic jumps.
double entropic_margin(const SystemModel& model, const State& uL, const State& uR, double sigma);

/// Entropy inequality across the jump with slack 1e-12. Throws PreconditionError
/// when (uL, uR, sigma) is not a Rankine-Hugoniot triple.
bool check_entropic(const SystemModel& model, const State& uL, const State& uR, double sigma);

/// Compressive, not overcompressive, in `family` (1-based).
bool check_lax_strong(const SystemModel& model, const State& uL, const State& uR, double sigma,
                      int family);

struct HypothesisReport {
  int family = 1;
  bool insufficient_samples = false;
  bool liu_ok = false;
  bool strengthening_ok = false;
  bool h2_checked = false;
  bool h2_ok = true;
  bool h3_checked = false;
  bool h3_sampled_ok = true;
  /// min over interior samples of -dsigma/ds (family 1) or dsigma/ds (family n)
  double liu_margin = 0.0;
  /// min over interior samples of d/ds eta(base | S(s))
  double strengthening_margin = 0.0;
  /// min over sampled entropic pairs of sigma - lambda_1(uR) (family 1)
  double h2_margin = 0.0;
  /// max distance from a sampled pair's far state to the Liu curve, over pairs
  /// that satisfy the speed condition of (H3)
  double h3_max_distance = 0.0;
  std::size_t h3_pairs = 0;
  std::vector<State> counterexamples;

  bool ok() const {
    return !insufficient_samples && liu_ok && strengthening_ok && h2_ok && h3_sampled_ok;
  }
};

/// Liu monotonicity and strengthening along a traced curve, by central differences.
HypothesisReport check_H1(const SystemModel& model, const ShockCurve& curve);

/// Sampled certificate for (H2)/(H3) (or their starred versions for family n):
/// random entropic Rankine-Hugoniot pairs from every Hugoniot branch through
/// states drawn from `box`. Results are merged into `report`.
void check_H2_H3_sampled(const SystemModel& model, const StateBox& box, int family, int count,
                         unsigned seed, HypothesisReport& report);

/// Distance from w to the polyline through the curve samples.
double distance_to_curve(const ShockCurve& curve, const State& w);

}  // namespace shiftlab

#endif
