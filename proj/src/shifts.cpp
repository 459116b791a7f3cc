#include "shiftlab/shifts.hpp"

#include "shiftlab/errors.hpp"
#include "shiftlab/shockcurves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace shiftlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Unit directions in state space: uniform angles in 2D, a Fibonacci sphere in 3D.
// Both sets are symmetric under m -> -m, so mirrored problems see mirrored grids.
StateList directions(int n, int count) {
  StateList out;
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      out.push_back(make_state({std::cos(a), std::sin(a)}));
    }
    return out;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / count;
    const double r = std::sqrt(1.0 - z * z);
    // component 1 (momentum) carries z so that the set is closed under m -> -m
    out.push_back(make_state({r * std::cos(golden * k), z, r * std::sin(golden * k)}));
  }
  return out;
}

int direction_count(int n, bool dense) {
  if (n == 2) return dense ? 720 : 24;
  return dense ? 2000 : 96;
}

// eta(u|uL) - a eta(u|uR); convex in u, negative at uL.
double region_function(const SystemModel& m, const State& u, const State& uL, const State& uR,
                       double a) {
  return relative_entropy(m, u, uL) - a * relative_entropy(m, u, uR);
}

// Radius along `dir` from uL where the region {psi <= 0} ends (or the state
// space does). Returns the largest radius found inside.
double boundary_radius(const SystemModel& m, const State& uL, const State& uR, double a,
                       const State& dir, double r_cap) {
  auto inside = [&](double r) {
    const State u = uL + r * dir;
    return m.is_admissible(u) && region_function(m, u, uL, uR, a) <= 0.0;
  };
  double lo = 0.0, hi = std::min(1e-3, r_cap);
  while (inside(hi)) {
    lo = hi;
    if (hi >= r_cap) return r_cap;
    hi = std::min(2.0 * hi, r_cap);
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

State random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  State d(n);
  for (int i = 0; i < n; ++i) d(i) = g(rng);
  return d / d.norm();
}

double box_B(const SystemModel& m, const StateBox& box) {
  double B = 0.0;
  for (const auto& u : box.grid(m, 2)) B = std::max(B, u.norm());
  return B;
}

double shock_strength(const SystemModel& m, const ShockTriple& s) {
  const double span = (s.uR - s.uL).norm();
  const double s_max = 3.0 * span;
  const ShockCurve c = trace_hugoniot(m, s.uL, 1, s_max, std::min(1e-3, s_max / 20.0));
  double best = kInf, at = 0.0;
  for (const auto& p : c.samples) {
    const double d = (p.state - s.uR).norm();
    if (d < best) best = d, at = p.s;
  }
  if (best > 1e-2 * span) {
    throw SelectionError("shock state is not on the Liu curve of its left state (distance " +
                         std::to_string(best) + ")");
  }
  return at;
}

}  // namespace

double fit_containment_constant(const SystemModel& model, const State& uL, const State& uR,
                                double theta, const StateBox& box, const SelectionOptions& opt) {
  if (!(theta > 0.0)) throw PreconditionError("fit_containment_constant: theta must be positive");
  double alpha = kInf;
  std::size_t used = 0;
  auto visit = [&](const State& u) {
    if ((u - uL).norm() < theta || !model.is_admissible(u)) return;
    const double den = relative_entropy(model, u, uR);
    if (!(den > 0.0)) return;
    alpha = std::min(alpha, relative_entropy(model, u, uL) / den);
    ++used;
  };
  for (const auto& d : directions(model.n(), direction_count(model.n(), true))) {
    for (double f : {1.0, 1.1, 1.25, 1.5, 2.0, 3.0}) visit(uL + f * theta * d);
  }
  std::mt19937_64 rng(opt.seed);
  for (int i = 0; i < opt.samples; ++i) visit(box.sample(model, rng));
  if (used == 0) throw DomainError("fit_containment_constant: no admissible sample beyond theta");
  return (1.0 + opt.safety) * theta * theta / alpha;
}

ContainmentReport check_containment(const SystemModel& model, const State& uL, const State& uR,
                                    double a, double theta, const StateBox& box, int samples,
                                    unsigned seed) {
  ContainmentReport r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = model.n();
  for (int i = 0; i < samples; ++i) {
    State u = i % 2 == 0 ? box.sample(model, rng)
                         : State(uL + 2.0 * theta * std::pow(U(rng), 1.0 / n) * random_unit(n, rng));
    if (!model.is_admissible(u)) continue;
    ++r.samples;
    if (region_function(model, u, uL, uR, a) > 0.0) continue;
    ++r.inside;
    const double d = (u - uL).norm();
    r.max_distance = std::max(r.max_distance, d);
    if (d > theta) ++r.violations;
  }
  return r;
}

DissipationFit fit_dissipation(const SystemModel& model, const ShockTriple& shock, double a,
                               const StateBox& box) {
  const State& uL = shock.uL;
  const State& uR = shock.uR;
  const double span = (uR - uL).norm();
  DissipationFit fit;
  fit.c = kInf;
  StateList bases{uL};
  for (const auto& d : directions(model.n(), direction_count(model.n(), false))) {
    const double rb = boundary_radius(model, uL, uR, a, d, span);
    for (double f : {0.25, 0.5, 0.75, 1.0}) bases.push_back(uL + f * rb * d);
  }
  const double s_max = 2.0 * span, ds = s_max / 200.0;
  auto lower = [&](double c, const State& u) {
    if (c < fit.c) fit.c = c, fit.worst_u = u;
  };
  std::size_t traced = 0;
  for (const auto& u : bases) {
    if (!model.is_admissible(u)) continue;
    const double lam = model.lambda(u, 1);
    lower(-(a * (relative_entropy_flux(model, u, uR) - lam * relative_entropy(model, u, uR)) -
            relative_entropy_flux(model, u, uL) + lam * relative_entropy(model, u, uL)),
          u);
    ShockCurve curve;
    try {
      curve = trace_hugoniot(model, u, 1, s_max, ds);
    } catch (const ContinuationError&) {
      continue;
    }
    ++traced;
    const double qL = relative_entropy_flux(model, u, uL), eL = relative_entropy(model, u, uL);
    for (const auto& p : curve.samples) {
      if (!box.contains_primitive(model.to_primitive(p.state))) continue;
      const double lhs = a * (relative_entropy_flux(model, p.state, uR) -
                              p.sigma * relative_entropy(model, p.state, uR)) -
                         qL + p.sigma * eL;
      const double den = (shock.sigma - p.sigma) * (shock.sigma - p.sigma);
      ++fit.pairs;
      if (den > 1e-12) {
        lower(-lhs / den, u);
      } else if (lhs > 1e-12) {
        lower(-kInf, u);
      }
    }
  }
  if (traced == 0) fit.c = -kInf;
  fit.pass = fit.c > 0.0 && std::isfinite(fit.c);
  return fit;
}

ShiftConstants compute_gamma0_c4_Cstar(const SystemModel& model, const State& uL, const State& uR,
                                       double a, double c1, const StateBox& box,
                                       const SelectionOptions& opt) {
  require_admissible_box(model, box);
  if (!(c1 > 0.0)) throw PreconditionError("compute_gamma0_c4_Cstar: c1 must be positive");
  std::mt19937_64 rng(opt.seed + 1);
  StateList pts = box.grid(model, model.n() == 2 ? 33 : 11);
  for (int i = 0; i < opt.samples; ++i) pts.push_back(box.sample(model, rng));
  if (pts.empty()) throw DomainError("compute_gamma0_c4_Cstar: empty sample set");

  auto phi = [&](const State& u) {
    const double lam = model.lambda(u, 1);
    return a * (relative_entropy_flux(model, u, uR) - lam * relative_entropy(model, u, uR)) -
           relative_entropy_flux(model, u, uL) + lam * relative_entropy(model, u, uL);
  };
  ShiftConstants out;
  double L = 0.0;
  for (const auto& u : pts) {
    State g(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      const double h = 1e-6 * std::max(std::abs(u(j)), 1.0);
      State up = u, um = u;
      up(j) += h;
      um(j) -= h;
      g(j) = (phi(up) - phi(um)) / (2.0 * h);
    }
    L = std::max(L, g.norm());
    out.sup_lambda = std::max(out.sup_lambda, std::abs(model.lambda(u, 1)));
    out.sup_flux_term = std::max(out.sup_flux_term, std::abs(a * relative_entropy_flux(model, u, uR) -
                                                             relative_entropy_flux(model, u, uL)));
  }
  out.L_star = (1.0 + opt.safety) * L;
  out.gamma0 = c1 / (2.0 * out.L_star);

  // Boundary of the convex region R_a with outward normals.
  const double span = (uR - uL).norm();
  StateList boundary, normals;
  for (const auto& d : directions(model.n(), direction_count(model.n(), true))) {
    const double rb = boundary_radius(model, uL, uR, a, d, span);
    const State b = uL + rb * d;
    boundary.push_back(b);
    State n = model.entropy_gradient(b) - model.entropy_gradient(uL) -
              a * (model.entropy_gradient(b) - model.entropy_gradient(uR));
    normals.push_back(n / n.norm());
  }
  // For a convex region the infimum over {dist >= gamma0} of the convex function
  // psi sits on the parallel surface at distance exactly gamma0.
  double inf_gap = kInf;
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const State u = boundary[i] + out.gamma0 * normals[i];
    if (!model.is_admissible(u)) continue;
    ++out.far_samples;
    inf_gap = std::min(inf_gap, region_function(model, u, uL, uR, a));
  }
  if (out.far_samples == 0 || !(inf_gap > 0.0)) {
    throw DomainError("compute_gamma0_c4_Cstar: no admissible state at distance gamma0 from R_a");
  }
  out.c4 = inf_gap / (out.gamma0 * out.gamma0) / (1.0 + opt.safety);
  out.C_star = (out.sup_flux_term + 1.0) / (out.c4 * out.gamma0 * out.gamma0) + 2.0 * out.sup_lambda;
  return out;
}

FamilyCertificate certify_family1(const SystemModel& model, const ShockTriple& shock, double theta,
                                  const StateBox& box, const SelectionOptions& opt) {
  FamilyCertificate cert;
  cert.shock = shock;
  cert.theta = theta;
  cert.C_lemma = fit_containment_constant(model, shock.uL, shock.uR, theta, box, opt);
  const double cap = 0.999 * theta * theta / cert.C_lemma;
  auto ok = [&](double a) { return fit_dissipation(model, shock, a, box).pass; };
  double lo = cap, hi = cap;
  if (ok(cap)) {
    cert.a_star = cap;
  } else {
    int halvings = 0;
    do {
      hi = lo;
      lo *= 0.5;
      if (++halvings > 60) {
        throw SelectionError("no positive weight passes the sampled dissipation inequality");
      }
    } while (!ok(lo));
    for (int i = 0; i < opt.bisection_steps; ++i) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
    cert.a_star = hi;
  }
  cert.a = lo;
  const DissipationFit fit = fit_dissipation(model, shock, cert.a, box);
  cert.dissipation_pairs = fit.pairs;
  cert.c1 = fit.c / (1.0 + opt.safety);
  const ShiftConstants k = compute_gamma0_c4_Cstar(model, shock.uL, shock.uR, cert.a, cert.c1, box, opt);
  cert.L_star = k.L_star;
  cert.gamma0 = k.gamma0;
  cert.c4 = k.c4;
  cert.C_star = k.C_star;
  cert.sup_lambda = k.sup_lambda;
  cert.sup_flux_term = k.sup_flux_term;
  cert.strength = shock_strength(model, shock);
  cert.rho_strength = 0.9 * cert.strength;
  const ContainmentReport cr =
      check_containment(model, shock.uL, shock.uR, cert.a, theta, box, opt.samples, opt.seed + 2);
  cert.containment_samples = cr.samples;
  cert.containment_violations = cr.violations;
  if (cr.violations > 0) {
    throw SelectionError("selected weight violates containment at " +
                         std::to_string(cr.violations) + " samples");
  }
  return cert;
}

WeightSelection select_weights(ModelPtr model, const std::optional<ShockTriple>& shock1,
                               const std::optional<ShockTriple>& shockn, const StateBox& box,
                               double theta1, double thetan, const SelectionOptions& opt) {
  require_admissible_box(*model, box);
  WeightSelection sel;
  sel.box = box;
  sel.B = box_B(*model, box);
  sel.seed = opt.seed;
  if (shock1) {
    if (!check_entropic(*model, shock1->uL, shock1->uR, shock1->sigma)) {
      throw PreconditionError("select_weights: 1-shock is not entropic");
    }
    sel.family1 = certify_family1(*model, *shock1, theta1, box, opt);
    sel.family1->family = 1;
  }
  if (shockn) {
    if (!check_entropic(*model, shockn->uL, shockn->uR, shockn->sigma)) {
      throw PreconditionError("select_weights: n-shock is not entropic");
    }
    const ReflectedModel mirror(model);
    const ShockTriple m{shockn->uR, shockn->uL, -shockn->sigma};
    FamilyCertificate c = certify_family1(mirror, m, thetan, box, opt);
    c.family = model->n();
    c.shock = *shockn;
    sel.familyn = c;
  }
  return sel;
}

double VelocityField::operator()(const State& u) const {
  return speed(u) + (indicator(u) > 0.0 ? jump : 0.0);
}

VelocityField constant_field(double c) {
  return VelocityField{[c](const State&) { return c; }, [](const State&) { return -1.0; }, 0.0};
}

VelocityField field_V1(ModelPtr model, const WeightSelection& sel) {
  if (!sel.family1) throw PreconditionError("field_V1: no 1-shock in the weight selection");
  const FamilyCertificate c = *sel.family1;
  return VelocityField{
      [model](const State& u) { return model->lambda(u, 1); },
      [model, c](const State& u) {
        return relative_entropy(*model, u, c.shock.uL) - c.a * relative_entropy(*model, u, c.shock.uR);
      },
      -c.C_star};
}

VelocityField field_Vn(ModelPtr model, const WeightSelection& sel) {
  if (!sel.familyn) throw PreconditionError("field_Vn: no n-shock in the weight selection");
  const FamilyCertificate c = *sel.familyn;
  const int n = model->n();
  return VelocityField{
      [model, n](const State& u) { return model->lambda(u, n); },
      [model, c](const State& u) {
        return relative_entropy(*model, u, c.shock.uR) - c.a * relative_entropy(*model, u, c.shock.uL);
      },
      c.C_star};
}

double velocity_V1(const SystemModel& model, const State& u, const State& vbar1,
                   const State& vbar2, const WeightSelection& sel) {
  if (!sel.family1) throw PreconditionError("velocity_V1: no 1-shock in the weight selection");
  model.require_admissible(u, "velocity_V1");
  const bool on = sel.family1->a * relative_entropy(model, u, vbar2) < relative_entropy(model, u, vbar1);
  return model.lambda(u, 1) - (on ? sel.family1->C_star : 0.0);
}

double velocity_Vn(const SystemModel& model, const State& u, const State& vbarn,
                   const State& vbarn1, const WeightSelection& sel) {
  if (!sel.familyn) throw PreconditionError("velocity_Vn: no n-shock in the weight selection");
  model.require_admissible(u, "velocity_Vn");
  const bool on = sel.familyn->a * relative_entropy(model, u, vbarn) < relative_entropy(model, u, vbarn1);
  return model.lambda(u, model.n()) + (on ? sel.familyn->C_star : 0.0);
}

double ShiftPath::lipschitz() const {
  double L = 0.0;
  for (double v : velocities) L = std::max(L, std::abs(v));
  return L;
}

namespace {

// Velocity field of one frozen snapshot: V~(y) = speed of the cell containing y,
// plus the jump where the (possibly interpolated) indicator is positive.
class FrozenField {
 public:
  FrozenField(const Grid1D& g, const StateList& cells, const VelocityField& f,
              IndicatorReconstruction rec)
      : g_(g), cells_(cells), f_(f), rec_(rec),
        lam_(cells.size(), std::numeric_limits<double>::quiet_NaN()),
        psi_(cells.size(), std::numeric_limits<double>::quiet_NaN()) {}

  double value(double y) const {
    const long j = cell(y);
    return lam(j) + (on(y) ? f_.jump : 0.0);
  }

  bool on(double y) const {
    if (rec_ == IndicatorReconstruction::cellwise) return psi(cell(y)) > 0.0;
    const double s = (y - g_.x_min) / g_.dx() - 0.5;
    const long jl = static_cast<long>(std::floor(s));
    const double t = s - jl;
    return (1.0 - t) * psi(jl) + t * psi(jl + 1) > 0.0;
  }

  // Smallest breakpoint of V~ strictly beyond y in direction dir (+1 / -1).
  double next_break(double y, int dir) const {
    const double dx = g_.dx(), eps = 1e-12 * dx;
    const double yy = y + dir * eps;
    const double s = (yy - g_.x_min) / dx;
    double best = dir > 0 ? g_.x_min + (std::floor(s) + 1.0) * dx : g_.x_min + std::ceil(s - 1.0) * dx;
    if (rec_ == IndicatorReconstruction::subcell) {
      const double c = s - 0.5;
      const long jl = static_cast<long>(std::floor(c));
      const double cen = dir > 0 ? g_.center(static_cast<int>(jl + 1)) : g_.center(static_cast<int>(jl));
      best = dir > 0 ? std::min(best, cen) : std::max(best, cen);
      const double pa = psi(jl), pb = psi(jl + 1);
      if ((pa > 0.0) != (pb > 0.0)) {
        const double xs = g_.center(static_cast<int>(jl)) + dx * pa / (pa - pb);
        if (dir > 0 && xs > yy) best = std::min(best, xs);
        if (dir < 0 && xs < yy) best = std::max(best, xs);
      }
    }
    return best;
  }

  struct Window {
    double v;
    double on_length;
    bool constant;
  };

  Window window(double g, double w) const {
    double y = g, I = 0.0, on_len = 0.0, vmin = kInf, vmax = -kInf;
    while (y < g + w) {
      const double nb = std::min(next_break(y, 1), g + w);
      const double mid = 0.5 * (y + nb);
      const double v = value(mid);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
      sup_ = std::max(sup_, std::abs(v));
      I += v * (nb - y);
      if (on(mid)) on_len += nb - y;
      y = nb;
    }
    if (vmin == vmax) return {vmin, on_len, true};
    return {I / w, on_len, false};
  }

  double sup() const { return sup_; }

 private:
  long cell(double y) const {
    return std::clamp(static_cast<long>(std::floor((y - g_.x_min) / g_.dx())), 0L,
                      static_cast<long>(g_.N) - 1);
  }
  double lam(long j) const {
    j = std::clamp(j, 0L, static_cast<long>(g_.N) - 1);
    auto& v = lam_[static_cast<std::size_t>(j)];
    if (std::isnan(v)) v = f_.speed(cells_[static_cast<std::size_t>(j)]);
    return v;
  }
  double psi(long j) const {
    j = std::clamp(j, 0L, static_cast<long>(g_.N) - 1);
    auto& v = psi_[static_cast<std::size_t>(j)];
    if (std::isnan(v)) v = f_.indicator(cells_[static_cast<std::size_t>(j)]);
    return v;
  }

  const Grid1D& g_;
  const StateList& cells_;
  const VelocityField& f_;
  IndicatorReconstruction rec_;
  mutable std::vector<double> lam_, psi_;
  mutable double sup_ = 0.0;
};

}  // namespace

ShiftPath integrate_filippov(const Trajectory& traj, const VelocityField& field, double x0,
                             const FilippovOptions& opt) {
  if (opt.n_mollify < 1) throw PreconditionError("integrate_filippov: n_mollify must be >= 1");
  const Grid1D& g = traj.grid;
  const double w = opt.n_mollify * g.dx();
  const double lo = g.x_min + 2.0 * g.dx(), hi = g.x_max - 2.0 * g.dx() - w;
  if (!(x0 >= lo && x0 <= hi)) throw PreconditionError("integrate_filippov: x0 outside the domain");
  ShiftPath p;
  p.n_mollify = opt.n_mollify;
  p.window = w;
  p.times = traj.times;
  p.positions.push_back(x0);
  double x = x0;
  for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    const FrozenField F(g, traj.snapshots[k], field, opt.reconstruction);
    const FrozenField::Window start = F.window(x, w);
    p.regimes.push_back(start.on_length > 0.0 ? ShiftRegime::runaway : ShiftRegime::characteristic);
    double rem = dt;
    const double x_begin = x;
    for (int iter = 0; rem > 0.0; ++iter) {
      if (iter > 100000) throw IntegrationError("integrate_filippov: no progress within a step");
      const FrozenField::Window here = F.window(x, w);
      const double v0 = here.v;
      if (v0 == 0.0) break;
      const int dir = v0 > 0.0 ? 1 : -1;
      const double xb = dir > 0 ? std::min(F.next_break(x, 1), F.next_break(x + w, 1) - w)
                                : std::max(F.next_break(x, -1), F.next_break(x + w, -1) - w);
      const FrozenField::Window there = F.window(xb, w);
      const double vb = there.v;
      if (vb == v0) {
        // locally constant field: jump straight to the end when nothing changes on the way
        const double target = x + v0 * rem;
        const double a = std::min(x, target), b = std::max(x, target) + w;
        bool flat = here.constant;
        for (double y = a; flat && y < b;) {
          const double nb = std::min(F.next_break(y, 1), b);
          flat = F.value(0.5 * (y + nb)) == v0;
          y = nb;
        }
        if (flat) {
          x = target;
          break;
        }
        const double tau = (xb - x) / v0;
        if (tau >= rem) {
          x += v0 * rem;
          break;
        }
        x = xb;
        rem -= tau;
        continue;
      }
      const double s = (vb - v0) / (xb - x);
      if ((vb > 0.0) == (v0 > 0.0) && vb != 0.0) {
        const double tau = std::log(vb / v0) / s;
        if (tau < rem) {
          x = xb;
          rem -= tau;
          continue;
        }
      }
      // the end of the step (or the fixed point) lies inside this linear piece
      x += v0 / s * std::expm1(s * rem);
      break;
    }
    if (!(x >= lo && x <= hi) || !std::isfinite(x)) {
      throw IntegrationError("integrate_filippov: path left the domain at t = " +
                             std::to_string(traj.times[k + 1]));
    }
    p.positions.push_back(x);
    p.velocities.push_back((x - x_begin) / dt);
    p.sup_field = std::max(p.sup_field, F.sup());
  }
  return p;
}

OrderingReport check_ordering(const ShiftPath& h1, const ShiftPath& hn) {
  if (h1.times != hn.times) throw PreconditionError("check_ordering: paths sampled differently");
  OrderingReport r;
  r.min_gap = kInf;
  for (std::size_t k = 0; k < h1.positions.size(); ++k) {
    const double gap = hn.positions[k] - h1.positions[k];
    if (gap < r.min_gap) r.min_gap = gap, r.worst_index = k;
  }
  r.pass = r.min_gap >= -1e-12;
  return r;
}

DissipationSeries dissipation_rate(const SystemModel& model, const TraceSeries& traces,
                                   const State& vbarL, const State& vbarR, double a,
                                   const std::vector<double>& hdot, double sigma, double c) {
  if (traces.times.size() != hdot.size() + 1) {
    throw PreconditionError("dissipation_rate: velocities must be one per stored interval");
  }
  DissipationSeries s;
  s.c = c;
  s.sigma = sigma;
  for (std::size_t k = 0; k < hdot.size(); ++k) {
    const State& up = traces.right_states[k];
    const State& um = traces.left_states[k];
    const double v = hdot[k];
    const double lhs = a * (relative_entropy_flux(model, up, vbarR) - v * relative_entropy(model, up, vbarR)) -
                       relative_entropy_flux(model, um, vbarL) + v * relative_entropy(model, um, vbarL);
    const double rhs = -c * (sigma - v) * (sigma - v);
    s.times.push_back(traces.times[k]);
    s.lhs.push_back(lhs);
    s.rhs.push_back(rhs);
    s.margin.push_back(lhs - rhs);
  }
  return s;
}

DissipationSummary summarize_dissipation(const DissipationSeries& s, double t_settle, double tol) {
  DissipationSummary r;
  r.max_lhs = -kInf;
  for (std::size_t k = 0; k < s.lhs.size(); ++k) {
    if (s.times[k] < t_settle) continue;
    ++r.steps;
    if (s.lhs[k] <= 0.0) ++r.nonpositive;
    if (s.lhs[k] <= tol) ++r.within_tol;
    r.max_lhs = std::max(r.max_lhs, s.lhs[k]);
  }
  r.fraction_nonpositive = r.steps ? static_cast<double>(r.nonpositive) / r.steps : 0.0;
  return r;
}

}  // namespace shiftlab
