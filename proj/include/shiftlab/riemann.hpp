#ifndef SHIFTLAB_RIEMANN_HPP
#define SHIFTLAB_RIEMANN_HPP

#include "shiftlab/models.hpp"

#include <functional>
#include <string>
#include <vector>

namespace shiftlab {

enum class WaveKind { zero, shock, rarefaction, contact };

const char* to_string(WaveKind k);

struct Wave {
  WaveKind kind = WaveKind::zero;
  int family = 1;
  State left;
  State right;
  /// Shock or contact speed; lambda_family(left) for zero-strength waves.
  double sigma = 0.0;
  /// Speed interval covered by the wave; a single point unless rarefaction.
  double speed_lo = 0.0;
  double speed_hi = 0.0;
  /// Rarefactions only: V(xi) and dV/dxi for xi in [speed_lo, speed_hi].
  std::function<State(double)> fan;
  std::function<State(double)> fan_prime;
};

struct RiemannSolution {
  ModelPtr model;
  /// v_1 .. v_{n+1}
  StateList states;
  /// One per family, in order.
  std::vector<Wave> waves;

  bool has_rarefaction() const;
  bool has_contact() const;
  std::vector<int> shock_families() const;
};

/// Exact solution of the Riemann problem for the built-in models.
/// VacuumError when the data would open a vacuum; SolverError if the star-state
/// iteration fails.
RiemannSolution solve_riemann(ModelPtr model, const State& uL, const State& uR);

/// Self-similar evaluation at (x, t), t > 0. A point sitting exactly on a
/// discontinuity gets the left state.
State evaluate(const RiemannSolution& sol, double x, double t);

/// dv/dx at (x, t): zero off the fans, V'(x/t)/t inside them.
State evaluate_dx(const RiemannSolution& sol, double x, double t);

/// Largest discrepancy found when rebuilding every wave from its left state:
/// chain links, Rankine-Hugoniot residuals, fan end points, and the final state vs uR.
double chain_residual(const RiemannSolution& sol, const State& uR);

enum class TheoryRegime { with_rarefactions, no_rarefactions, outside_verified_theory };

const char* to_string(TheoryRegime r);

struct WaveClassification {
  std::vector<WaveKind> kinds;
  TheoryRegime regime = TheoryRegime::outside_verified_theory;
  bool trivial = false;
  std::string reason;
};

WaveClassification classify_waves(const RiemannSolution& sol);

struct SignConditionReport {
  double min_value = 0.0;
  std::size_t evaluations = 0;
  State worst_u;
  double worst_xi = 0.0;
  bool pass = false;
};

/// Evaluates (d_x v)^T Hess(eta)(v) f(u|v) at fan points (xi * t, t) for all
/// sample states u and times t. Passes iff the minimum is >= -1e-10.
SignConditionReport check_sign_condition(const SystemModel& model, const Wave& wave,
                                         const StateList& u_samples,
                                         const std::vector<double>& t_samples,
                                         int xi_points = 11);

}  // namespace shiftlab

#endif
