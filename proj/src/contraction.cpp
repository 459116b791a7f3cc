#include "shiftlab/contraction.hpp"

#include "shiftlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace shiftlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double just_right(double x) { return std::nextafter(x, kInf); }
double just_left(double x) { return std::nextafter(x, -kInf); }

// Sum of fn(u_j, x_mid) * length over the pieces of [a, b] cut by cell
// boundaries, at snapshot k.
template <class F>
double integrate_cells(const Trajectory& traj, double a, double b, std::size_t k, F&& fn) {
  if (!(b > a)) return 0.0;
  const Grid1D& g = traj.grid;
  const long j0 = std::max(0L, g.cell_of(a)), j1 = std::min<long>(g.N - 1, g.cell_of(b));
  double s = 0.0;
  for (long j = j0; j <= j1; ++j) {
    const double xl = std::max(a, g.x_min + j * g.dx());
    const double xr = std::min(b, g.x_min + (j + 1) * g.dx());
    if (!(xr > xl)) continue;
    s += fn(traj.snapshots[k][static_cast<std::size_t>(j)], 0.5 * (xl + xr)) * (xr - xl);
  }
  return s;
}

double sup_grad_lambda(const SystemModel& model, const StateBox& box, int family) {
  StateList pts = box.grid(model, model.n() == 2 ? 17 : 7);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) pts.push_back(box.sample(model, rng));
  double L = 0.0;
  for (const auto& u : pts) {
    State gr(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      const double h = 1e-6 * std::max(std::abs(u(j)), 1.0);
      State up = u, um = u;
      up(j) += h;
      um(j) -= h;
      gr(j) = (model.lambda(up, family) - model.lambda(um, family)) / (2.0 * h);
    }
    L = std::max(L, gr.norm());
  }
  return L;
}

}  // namespace

double PsiSolution::h1_at(std::size_t k) const { return h1 ? h1->positions[k] : -kInf; }
double PsiSolution::hn_at(std::size_t k) const { return hn ? hn->positions[k] : kInf; }

State PsiSolution::value(double x, std::size_t k) const {
  const double t = times[k];
  if (h1 && x < h1_at(k)) return base.states.front();
  if (hn && x > hn_at(k)) return base.states.back();
  if (!(t > 0.0)) return x <= 0.0 ? base.states.front() : base.states.back();
  const double xi = x / t;
  const std::size_t n = base.waves.size();
  if (h1 && xi <= base.waves.front().sigma) return base.states[1];
  if (hn && xi >= base.waves.back().sigma) return base.states[n - 1];
  return evaluate(base, x, t);
}

State PsiSolution::value_dx(double x, std::size_t k) const {
  const double t = times[k];
  const State zero = State::Zero(base.states.front().size());
  if (!(t > 0.0)) return zero;
  if ((h1 && x < h1_at(k)) || (hn && x > hn_at(k))) return zero;
  const double xi = x / t;
  if (h1 && xi <= base.waves.front().sigma) return zero;
  if (hn && xi >= base.waves.back().sigma) return zero;
  return evaluate_dx(base, x, t);
}

PsiSolution build_psi(const RiemannSolution& sol, const std::vector<double>& times,
                      const std::optional<ShiftPath>& h1, const std::optional<ShiftPath>& hn,
                      TheoryRegime regime) {
  if (regime == TheoryRegime::outside_verified_theory) {
    throw PreconditionError("build_psi: the solution is outside the verified theory");
  }
  const SystemModel& m = *sol.model;
  const int n = m.n();
  const bool shock1 = sol.waves.front().kind == WaveKind::shock;
  const bool shockn = sol.waves.back().kind == WaveKind::shock;
  if (shock1 != h1.has_value() || shockn != hn.has_value()) {
    throw PreconditionError("build_psi: shift paths must match the extremal shocks of the solution");
  }
  for (const auto* p : {&h1, &hn}) {
    if (*p && (*p)->times != times) {
      throw PreconditionError("build_psi: shift path sampled at different times");
    }
  }
  PsiSolution psi;
  psi.base = sol;
  psi.times = times;
  psi.h1 = h1;
  psi.hn = hn;
  psi.regime = regime;
  psi.fan_cut_left = m.lambda(sol.states[1], std::min(2, n));
  psi.fan_cut_right = m.lambda(sol.states[static_cast<std::size_t>(n - 1)], std::max(1, n - 1));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (regime == TheoryRegime::with_rarefactions && t > 0.0) {
      if (h1 && !(psi.h1_at(k) < psi.fan_cut_left * t)) {
        throw ConstructionError("h1 reached the fan cut lambda_2(v_2) t at t = " + std::to_string(t));
      }
      if (hn && !(psi.hn_at(k) > psi.fan_cut_right * t)) {
        throw ConstructionError("hn reached the fan cut lambda_{n-1}(v_n) t at t = " +
                                std::to_string(t));
      }
    }
    if (h1 && hn && psi.h1_at(k) > psi.hn_at(k) + 1e-12) {
      throw ConstructionError("shift paths cross at t = " + std::to_string(t));
    }
  }
  return psi;
}

RegionWeights pseudo_distance_weights(const WeightSelection& sel) {
  return RegionWeights{1.0, sel.a1(), sel.a1() / sel.an()};
}

RegionIntegrals relative_entropy_regions(const SystemModel& model, const Trajectory& traj,
                                         const PsiSolution& psi, double lo, double hi,
                                         std::size_t k) {
  const double a = psi.h1 ? psi.h1_at(k) : lo;
  const double b = psi.hn ? psi.hn_at(k) : hi;
  if (!(lo <= a && a <= b + 1e-12 && b <= hi)) {
    throw InternalError("pseudo-distance regions out of order at t = " +
                        std::to_string(traj.times[k]));
  }
  // clamp roundoff from nearly equal states; the exact value is nonnegative
  auto eta = [&](const State& u, double x) {
    return std::max(0.0, relative_entropy(model, u, psi.value(x, k)));
  };
  RegionIntegrals r;
  r.left = integrate_cells(traj, lo, a, k, eta);
  r.middle = integrate_cells(traj, a, std::max(a, b), k, eta);
  r.right = integrate_cells(traj, std::max(a, b), hi, k, eta);
  return r;
}

double weighted_E(const SystemModel& model, const Trajectory& traj, const PsiSolution& psi,
                  const WeightSelection& sel, double R, std::size_t k) {
  return relative_entropy_regions(model, traj, psi, -R, R, k).total(pseudo_distance_weights(sel));
}

double l2_distance(const Trajectory& traj, const PsiSolution& psi, double lo, double hi,
                   std::size_t k) {
  return integrate_cells(traj, lo, hi, k, [&](const State& u, double x) {
    return (u - psi.value(x, k)).squaredNorm();
  });
}

double initial_l2_mass(const Trajectory& traj, const RiemannSolution& sol, double lo, double hi) {
  auto f = [&](const State& u, double x) {
    return (u - (x <= 0.0 ? sol.states.front() : sol.states.back())).squaredNorm();
  };
  return integrate_cells(traj, lo, std::min(hi, std::max(lo, 0.0)), 0, f) +
         integrate_cells(traj, std::max(lo, std::min(hi, 0.0)), hi, 0, f);
}

RBound compute_r(const SystemModel& model, const StateBox& box, int pairs, unsigned seed) {
  require_admissible_box(model, box);
  if (box.degenerate()) throw DomainError("compute_r: degenerate box, every pair is equal");
  std::mt19937_64 rng(seed);
  RBound out;
  out.seed = seed;
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const State a = box.sample(model, rng), b = box.sample(model, rng);
    const double e = relative_entropy(model, a, b);
    if (!(e > 1e-14)) continue;
    worst = std::max(worst, std::abs(relative_entropy_flux(model, a, b)) / e);
    ++out.pairs;
  }
  if (out.pairs == 0) throw DomainError("compute_r: no distinct pairs sampled");
  out.r = 1.1 * worst;
  return out;
}

double epsilon0(const SystemModel& model, const RiemannSolution& sol, const StateBox& box,
                int family) {
  const int n = model.n();
  if (family == 1) {
    return (model.lambda(sol.states[1], 2) - model.lambda(sol.states[0], 1)) /
           (2.0 * sup_grad_lambda(model, box, 1));
  }
  if (family != n) throw PreconditionError("epsilon0: family must be 1 or n");
  const auto N = static_cast<std::size_t>(n);
  return (model.lambda(sol.states[N], n) - model.lambda(sol.states[N - 1], n - 1)) /
         (2.0 * sup_grad_lambda(model, box, n));
}

RegionBoundary line_boundary(const std::vector<double>& times, double x0, double speed) {
  RegionBoundary b;
  for (double t : times) b.positions.push_back(x0 + speed * t);
  b.velocities.assign(times.empty() ? 0 : times.size() - 1, speed);
  return b;
}

RegionBoundary path_boundary(const ShiftPath& p, int offset) {
  return RegionBoundary{p.positions, p.velocities, offset};
}

IdentityReport dissipation_identity_check(const SystemModel& model, const Trajectory& traj,
                                          const RegionBoundary& g1, const RegionBoundary& g2,
                                          const PsiSolution& psi, std::size_t k_end) {
  const std::size_t K = traj.times.size();
  if (g1.positions.size() != K || g2.positions.size() != K || g1.velocities.size() + 1 != K ||
      g2.velocities.size() + 1 != K || k_end >= K) {
    throw PreconditionError("dissipation_identity_check: boundaries not sampled at the trajectory times");
  }
  IdentityReport rep;
  rep.dx = traj.grid.dx();
  std::size_t run = 0, longest = 0;
  for (std::size_t k = 0; k <= k_end; ++k) {
    const double gap = g2.positions[k] - g1.positions[k];
    if (gap < -1e-12) {
      throw PreconditionError("dissipation_identity_check: g1 > g2 at t = " +
                              std::to_string(traj.times[k]));
    }
    if (k > 0 && gap <= 1e-12) {
      ++rep.touches;
      longest = std::max(longest, ++run);
    } else {
      run = 0;
    }
  }
  if (longest > std::max<std::size_t>(2, k_end / 100)) {
    throw PreconditionError("dissipation_identity_check: region collapsed over an interval");
  }
  const TraceSeries t1 = trace_at(traj, g1.positions, TraceOffsets{1, g1.offset});
  const TraceSeries t2 = trace_at(traj, g2.positions, TraceOffsets{g2.offset, 1});
  for (std::size_t k = 0; k < k_end; ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    rep.dt_max = std::max(rep.dt_max, dt);
    const State& u1 = t1.right_states[k];
    const State& u2 = t2.left_states[k];
    const State v1 = psi.value(just_right(g1.positions[k]), k);
    const State v2 = psi.value(just_left(g2.positions[k]), k);
    rep.lhs += dt * (relative_entropy_flux(model, u1, v1) - relative_entropy_flux(model, u2, v2) +
                     g2.velocities[k] * relative_entropy(model, u2, v2) -
                     g1.velocities[k] * relative_entropy(model, u1, v1));
    rep.interior += dt * integrate_cells(traj, g1.positions[k], g2.positions[k], k,
                                         [&](const State& u, double x) {
                                           const State vx = psi.value_dx(x, k);
                                           if (vx.isZero()) return 0.0;
                                           const State v = psi.value(x, k);
                                           return (model.entropy_hessian(v) * vx)
                                               .dot(relative_flux(model, u, v));
                                         });
  }
  auto eta_at = [&](std::size_t k) {
    return integrate_cells(traj, g1.positions[k], g2.positions[k], k, [&](const State& u, double x) {
      return std::max(0.0, relative_entropy(model, u, psi.value(x, k)));
    });
  };
  rep.rhs = eta_at(k_end) - eta_at(0) + rep.interior;
  rep.margin = rep.lhs - rep.rhs;
  return rep;
}

ContractionReport stability_report(const SystemModel& model, const Trajectory& traj,
                                   const PsiSolution& psi, const WeightSelection& sel,
                                   const StabilityOptions& opt) {
  const Grid1D& g = traj.grid;
  if (!(opt.R > 0.0) || !(opt.t0 > 0.0) || !(opt.t0 < opt.R)) {
    throw ConfigError("stability_report: need R > 0 and t0 in (0, R)");
  }
  if (!(opt.r > 0.0)) throw ConfigError("stability_report: wedge speed r must be positive");
  if (opt.t0 > traj.times.back() + 1e-12) {
    throw ConfigError("stability_report: t0 beyond the simulated time");
  }
  const double W = opt.R + opt.r * opt.t0;
  if (-W < g.x_min + 4.0 * g.dx() || W > g.x_max - 4.0 * g.dx()) {
    throw ConfigError("stability_report: wedge [-R - r t0, R + r t0] does not fit in the grid");
  }
  ContractionReport rep;
  rep.R = opt.R;
  rep.r = opt.r;
  rep.t0 = opt.t0;
  rep.dx = g.dx();
  rep.weights = pseudo_distance_weights(sel);
  std::size_t k_end = 0;
  while (k_end + 1 < traj.times.size() && traj.times[k_end + 1] <= opt.t0 + 1e-12) ++k_end;
  double lip = 0.0;
  if (psi.h1) lip = std::max(lip, psi.h1->lipschitz());
  if (psi.hn) lip = std::max(lip, psi.hn->lipschitz());
  rep.lipschitz_condition = opt.R > lip * opt.t0;

  const double allowance = opt.C_num >= 0.0 ? opt.C_num * g.dx() : 0.0;
  rep.C_num = std::max(opt.C_num, 0.0);
  for (std::size_t k = 0; k <= k_end; ++k) {
    const double t = traj.times[k];
    const double lo = -opt.R - opt.r * (opt.t0 - t), hi = opt.R + opt.r * (opt.t0 - t);
    const double a = psi.h1 ? psi.h1_at(k) : lo, b = psi.hn ? psi.hn_at(k) : hi;
    if ((psi.h1 && !(lo < a)) || (psi.hn && !(b < hi))) {
      throw ConfigError("stability_report: shifts leave the wedge at t = " + std::to_string(t) +
                        " (R too small for the shift speeds)");
    }
    const RegionIntegrals reg = relative_entropy_regions(model, traj, psi, lo, hi, k);
    rep.times.push_back(t);
    rep.E.push_back(reg.total(rep.weights));
    rep.L2.push_back(l2_distance(traj, psi, lo, hi, k));
    rep.h1.push_back(psi.h1 ? a : std::numeric_limits<double>::quiet_NaN());
    rep.hn.push_back(psi.hn ? b : std::numeric_limits<double>::quiet_NaN());
    if (k < k_end) {
      double s = 0.0;
      if (psi.h1) s += std::pow(psi.base.waves.front().sigma - psi.h1->velocities[k], 2);
      if (psi.hn) s += std::pow(psi.base.waves.back().sigma - psi.hn->velocities[k], 2);
      rep.shift_integrand.push_back(s);
      rep.shift_control += s * (traj.times[k + 1] - t);
    }
  }
  rep.final_regions = relative_entropy_regions(model, traj, psi, -opt.R, opt.R, k_end);
  rep.initial_mass = initial_l2_mass(traj, psi.base, -W, W);
  rep.E0 = rep.E.front();
  rep.c_star = quadratic_bounds(model, sel.box).c_star;
  const double w_min = std::min({rep.weights.left, rep.weights.middle, rep.weights.right});
  double bound = rep.E0;
  rep.max_excess = -kInf;
  for (double e : rep.E) {
    rep.sup_E = std::max(rep.sup_E, e);
    rep.max_excess = std::max(rep.max_excess, e - rep.E0 - allowance);
    bound = std::max(bound, e - allowance);
  }
  // initial mass below this is cell-average roundoff of the exact data
  constexpr double kMassFloor = 1e-20;
  auto ratio = [&](double num) {
    if (num <= 1e-14) return 0.0;
    return rep.initial_mass > kMassFloor ? num / rep.initial_mass : kInf;
  };
  rep.mu1 = ratio(bound / (rep.c_star * w_min));
  rep.mu2 = ratio(rep.shift_control - opt.shift_floor);
  rep.shift_ratio = rep.initial_mass > kMassFloor ? rep.shift_control / rep.initial_mass : kInf;
  rep.pass = rep.max_excess <= 0.0;
  return rep;
}

}  // namespace shiftlab
