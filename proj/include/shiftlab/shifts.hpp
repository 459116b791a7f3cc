#ifndef SHIFTLAB_SHIFTS_HPP
#define SHIFTLAB_SHIFTS_HPP

#include "shiftlab/fvm.hpp"
#include "shiftlab/models.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace shiftlab {

/// A shock as (left state, right state, speed) in the original orientation.
struct ShockTriple {
  State uL;
  State uR;
  double sigma = 0.0;
};

/// Constants certified for one extremal family. For family n every quantity
/// refers to the mirrored problem (flux -f, x -> -x), where the n-shock becomes
/// a 1-shock from uR to uL.
struct FamilyCertificate {
  int family = 1;
  ShockTriple shock;
  double a = 0.0;
  /// First weight found to fail the sampled checks (or the containment cap).
  double a_star = 0.0;
  double theta = 0.0;
  double C_lemma = 0.0;
  double c1 = 0.0;
  double L_star = 0.0;
  double gamma0 = 0.0;
  double c4 = 0.0;
  double C_star = 0.0;
  /// sup |lambda_1| and sup |a q(u;uR) - q(u;uL)| over the box (mirrored for n)
  double sup_lambda = 0.0;
  double sup_flux_term = 0.0;
  /// arc length of the shock on its Liu curve, and the lower bound 0.9 of it
  double strength = 0.0;
  double rho_strength = 0.0;
  std::size_t dissipation_pairs = 0;
  std::size_t containment_samples = 0;
  std::size_t containment_violations = 0;
};

struct WeightSelection {
  StateBox box;
  double B = 0.0;
  unsigned seed = 0;
  std::optional<FamilyCertificate> family1;
  std::optional<FamilyCertificate> familyn;

  double a1() const { return family1 ? family1->a : 1.0; }
  double an() const { return familyn ? familyn->a : 1.0; }
};

struct SelectionOptions {
  int samples = 10000;
  unsigned seed = 20240611;
  /// Multiplicative safety applied to every fitted constant.
  double safety = 0.2;
  int bisection_steps = 30;
};

/// inf over sampled u with |u - uL| >= theta of eta(u|uL) / eta(u|uR), turned into
/// the constant C with a < theta^2 / C  =>  R_a inside B_theta(uL). The returned C
/// carries the safety margin.
double fit_containment_constant(const SystemModel& model, const State& uL, const State& uR,
                                double theta, const StateBox& box, const SelectionOptions& opt);

struct ContainmentReport {
  std::size_t samples = 0;
  std::size_t inside = 0;
  std::size_t violations = 0;
  double max_distance = 0.0;
};

/// Samples u (half from the box, half from the ball of radius 2 theta about uL)
/// and counts those in {eta(u|uL) <= a eta(u|uR)} farther than theta from uL.
ContainmentReport check_containment(const SystemModel& model, const State& uL, const State& uR,
                                    double a, double theta, const StateBox& box, int samples,
                                    unsigned seed);

struct DissipationFit {
  /// largest c with LHS <= -c |sigma - sigma_u(s)|^2 and boundary form <= -c on
  /// every sampled pair (no safety margin applied)
  double c = 0.0;
  std::size_t pairs = 0;
  State worst_u;
  bool pass = false;
};

/// Sampled form of the 1-shock dissipation lemma for weight a: pairs (u, S_u(s))
/// with u in {eta(u|uL) <= a eta(u|uR)} drawn from a polar grid about uL.
DissipationFit fit_dissipation(const SystemModel& model, const ShockTriple& shock, double a,
                               const StateBox& box);

struct ShiftConstants {
  double L_star = 0.0;
  double gamma0 = 0.0;
  double c4 = 0.0;
  double C_star = 0.0;
  double sup_lambda = 0.0;
  double sup_flux_term = 0.0;
  std::size_t far_samples = 0;
};

/// L*, gamma0 = c1 / (2 L*), c4 and C* for the 1-shock (uL, uR) with weight a and
/// dissipation constant c1, from samples of the box. DomainError if no sample
/// lies at distance >= gamma0 from R_a.
ShiftConstants compute_gamma0_c4_Cstar(const SystemModel& model, const State& uL, const State& uR,
                                       double a, double c1, const StateBox& box,
                                       const SelectionOptions& opt = {});

/// Bisection for the 1-shock weight with containment radius theta.
FamilyCertificate certify_family1(const SystemModel& model, const ShockTriple& shock, double theta,
                                  const StateBox& box, const SelectionOptions& opt = {});

/// Weights for the extremal shocks present. Family n goes through the mirrored
/// problem. SelectionError when no positive weight passes.
WeightSelection select_weights(ModelPtr model, const std::optional<ShockTriple>& shock1,
                               const std::optional<ShockTriple>& shockn, const StateBox& box,
                               double theta1, double thetan, const SelectionOptions& opt = {});

/// V_1(u) = lambda_1(u), minus C* when a eta(u|vbar2) < eta(u|vbar1).
double velocity_V1(const SystemModel& model, const State& u, const State& vbar1,
                   const State& vbar2, const WeightSelection& sel);
/// V_n(u) = lambda_n(u), plus C* when a_n eta(u|vbarn) < eta(u|vbarn1).
double velocity_Vn(const SystemModel& model, const State& u, const State& vbarn,
                   const State& vbarn1, const WeightSelection& sel);

/// V(u) = speed(u) + jump * [indicator(u) > 0].
struct VelocityField {
  std::function<double(const State&)> speed;
  std::function<double(const State&)> indicator;
  double jump = 0.0;

  double operator()(const State& u) const;
};

VelocityField constant_field(double c);
VelocityField field_V1(ModelPtr model, const WeightSelection& sel);
VelocityField field_Vn(ModelPtr model, const WeightSelection& sel);

enum class ShiftRegime { characteristic, runaway };

enum class IndicatorReconstruction {
  /// indicator constant on each cell
  cellwise,
  /// indicator argument interpolated linearly between cell centres
  subcell
};

struct ShiftPath {
  std::vector<double> times;
  std::vector<double> positions;
  /// per stored interval: (h(t_{k+1}) - h(t_k)) / (t_{k+1} - t_k)
  std::vector<double> velocities;
  std::vector<ShiftRegime> regimes;
  int n_mollify = 4;
  double window = 0.0;
  /// sup |V| over the cells visited by the windows
  double sup_field = 0.0;

  double lipschitz() const;
};

struct FilippovOptions {
  int n_mollify = 4;
  IndicatorReconstruction reconstruction = IndicatorReconstruction::subcell;
};

/// Path of dh/dt = (1/w) int_h^{h+w} V(u(y, t)) dy, w = n_mollify dx. On each
/// stored interval the field is frozen at the start snapshot and the resulting
/// piecewise-linear autonomous ODE is solved exactly. IntegrationError if the
/// window leaves the domain.
ShiftPath integrate_filippov(const Trajectory& traj, const VelocityField& field, double x0,
                             const FilippovOptions& opt = {});

struct OrderingReport {
  double min_gap = 0.0;
  std::size_t worst_index = 0;
  bool pass = false;
};

OrderingReport check_ordering(const ShiftPath& h1, const ShiftPath& hn);

struct DissipationSeries {
  std::vector<double> times;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> margin;
  double c = 0.0;
  double sigma = 0.0;
};

/// a (q(u+;vR) - hdot eta(u+|vR)) - q(u-;vL) + hdot eta(u-|vL) per interval,
/// with traces at the start of each interval. rhs = -c |sigma - hdot|^2.
DissipationSeries dissipation_rate(const SystemModel& model, const TraceSeries& traces,
                                   const State& vbarL, const State& vbarR, double a,
                                   const std::vector<double>& hdot, double sigma, double c);

struct DissipationSummary {
  std::size_t steps = 0;
  std::size_t nonpositive = 0;
  std::size_t within_tol = 0;
  double fraction_nonpositive = 0.0;
  double max_lhs = 0.0;
};

DissipationSummary summarize_dissipation(const DissipationSeries& s, double t_settle, double tol);

}  // namespace shiftlab

#endif
