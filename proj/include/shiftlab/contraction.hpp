#ifndef SHIFTLAB_CONTRACTION_HPP
#define SHIFTLAB_CONTRACTION_HPP

#include "shiftlab/fvm.hpp"
#include "shiftlab/riemann.hpp"
#include "shiftlab/shifts.hpp"

#include <optional>
#include <vector>

namespace shiftlab {

/// The Riemann pattern with its extremal shocks moved onto the shift paths.
struct PsiSolution {
  RiemannSolution base;
  std::vector<double> times;
  std::optional<ShiftPath> h1;
  std::optional<ShiftPath> hn;
  TheoryRegime regime = TheoryRegime::no_rarefactions;
  /// lambda_2(v_2) and lambda_{n-1}(v_n): edges of the frozen middle pattern
  double fan_cut_left = 0.0;
  double fan_cut_right = 0.0;

  /// Psi(x, t_k).
  State value(double x, std::size_t k) const;
  /// d/dx Psi(x, t_k): nonzero only inside rarefaction fans of the middle part.
  State value_dx(double x, std::size_t k) const;
  double h1_at(std::size_t k) const;
  double hn_at(std::size_t k) const;
};

/// ConstructionError when a shift path crosses its fan cut (with rarefactions)
/// or the paths cross each other (without).
PsiSolution build_psi(const RiemannSolution& sol, const std::vector<double>& times,
                      const std::optional<ShiftPath>& h1, const std::optional<ShiftPath>& hn,
                      TheoryRegime regime);

struct RegionWeights {
  double left = 1.0;
  double middle = 1.0;
  double right = 1.0;
};

/// (1, a1, a1 / an), with a missing family's weight taken as 1.
RegionWeights pseudo_distance_weights(const WeightSelection& sel);

struct RegionIntegrals {
  double left = 0.0;
  double middle = 0.0;
  double right = 0.0;
  double total(const RegionWeights& w) const {
    return w.left * left + w.middle * middle + w.right * right;
  }
};

/// Integrals of eta(u|Psi) over [lo, h1], [h1, hn], [hn, hi] at snapshot k, cells
/// split exactly at the region bounds. InternalError if lo <= h1 <= hn <= hi fails.
RegionIntegrals relative_entropy_regions(const SystemModel& model, const Trajectory& traj,
                                         const PsiSolution& psi, double lo, double hi,
                                         std::size_t k);

double weighted_E(const SystemModel& model, const Trajectory& traj, const PsiSolution& psi,
                  const WeightSelection& sel, double R, std::size_t k);

/// int_lo^hi |u(x, t_k) - Psi(x, t_k)|^2 dx.
double l2_distance(const Trajectory& traj, const PsiSolution& psi, double lo, double hi,
                   std::size_t k);

/// int_lo^hi |u0 - vbar(x, 0)|^2 dx over the initial snapshot.
double initial_l2_mass(const Trajectory& traj, const RiemannSolution& sol, double lo, double hi);

struct RBound {
  double r = 0.0;
  unsigned seed = 0;
  std::size_t pairs = 0;
};

/// 1.1 x max over sampled pairs of |q(a;b)| / eta(a|b).
RBound compute_r(const SystemModel& model, const StateBox& box, int pairs = 10000,
                 unsigned seed = 7);

/// (lambda_2(v2) - lambda_1(v1)) / (2 L), L = sup |grad lambda_1| over the box;
/// the mirrored quantity for family n.
double epsilon0(const SystemModel& model, const RiemannSolution& sol, const StateBox& box,
                int family);

/// A boundary curve of a dissipation region, sampled at the trajectory times,
/// with per-interval velocities and the trace offset on the region side.
struct RegionBoundary {
  std::vector<double> positions;
  std::vector<double> velocities;
  int offset = 1;
};

RegionBoundary line_boundary(const std::vector<double>& times, double x0, double speed);
RegionBoundary path_boundary(const ShiftPath& p, int offset);

struct IdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double interior = 0.0;
  double dx = 0.0;
  double dt_max = 0.0;
  std::size_t touches = 0;
};

/// Discrete time-integrated entropy balance on the region between g1 and g2
/// against the piece Psi restricted to it, up to snapshot k_end. PreconditionError
/// if g1 > g2 somewhere or the region stays collapsed for a stretch of steps.
IdentityReport dissipation_identity_check(const SystemModel& model, const Trajectory& traj,
                                          const RegionBoundary& g1, const RegionBoundary& g2,
                                          const PsiSolution& psi, std::size_t k_end);

struct ContractionReport {
  std::vector<double> times;
  std::vector<double> E;
  std::vector<double> L2;
  std::vector<double> h1;
  std::vector<double> hn;
  /// sum over shocks of |sigma_i - hdot_i|^2 per interval
  std::vector<double> shift_integrand;
  RegionWeights weights;
  double R = 0.0;
  double r = 0.0;
  double t0 = 0.0;
  double dx = 0.0;
  double initial_mass = 0.0;
  double E0 = 0.0;
  RegionIntegrals final_regions;
  double shift_control = 0.0;
  double C_num = 0.0;
  double c_star = 0.0;
  /// max(E(0), sup_k E(t_k) - C_num dx) / (c* w_min M0): the L2 bound with the
  /// numerical allowance removed; 0 when the numerator is roundoff
  double mu1 = 0.0;
  /// (shift_control - shift_floor)+ / M0
  double mu2 = 0.0;
  /// shift_control / M0 without any floor (infinite when M0 vanishes)
  double shift_ratio = 0.0;
  double sup_E = 0.0;
  double max_excess = 0.0;
  /// R > max Lip[h_i] t0 as literally stated; informational only
  bool lipschitz_condition = false;
  bool pass = false;
};

struct StabilityOptions {
  double R = 0.6;
  double t0 = 0.2;
  double r = 0.0;
  /// allowance C_num dx on E; negative means "not calibrated" (no allowance)
  double C_num = -1.0;
  /// numerical floor of the shift-control integral, subtracted before mu2
  double shift_floor = 0.0;
};

/// ConfigError when the wedge does not fit in the grid or does not contain the
/// shifts up to t0.
ContractionReport stability_report(const SystemModel& model, const Trajectory& traj,
                                   const PsiSolution& psi, const WeightSelection& sel,
                                   const StabilityOptions& opt);

}  // namespace shiftlab

#endif
