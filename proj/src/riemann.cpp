#include "shiftlab/riemann.hpp"

#include "shiftlab/errors.hpp"
#include "shiftlab/shockcurves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shiftlab {

const char* to_string(WaveKind k) {
  switch (k) {
    case WaveKind::zero: return "zero";
    case WaveKind::shock: return "shock";
    case WaveKind::rarefaction: return "rarefaction";
    case WaveKind::contact: return "contact";
  }
  return "zero";
}

const char* to_string(TheoryRegime r) {
  switch (r) {
    case TheoryRegime::with_rarefactions: return "with_rarefactions";
    case TheoryRegime::no_rarefactions: return "no_rarefactions";
    case TheoryRegime::outside_verified_theory: return "outside_verified_theory";
  }
  return "outside_verified_theory";
}

bool RiemannSolution::has_rarefaction() const {
  return std::any_of(waves.begin(), waves.end(),
                     [](const Wave& w) { return w.kind == WaveKind::rarefaction; });
}

bool RiemannSolution::has_contact() const {
  return std::any_of(waves.begin(), waves.end(),
                     [](const Wave& w) { return w.kind == WaveKind::contact; });
}

std::vector<int> RiemannSolution::shock_families() const {
  std::vector<int> out;
  for (const auto& w : waves) {
    if (w.kind == WaveKind::shock) out.push_back(w.family);
  }
  return out;
}

namespace {

struct ValueSlope {
  double value;
  double slope;
};

/// Root of an increasing function on (0, inf) with g(0+) < 0, by Newton steps
/// kept inside a bisection bracket.
template <class G>
double solve_increasing(G g, double guess, double value_scale, const char* what) {
  double a = 0.0, b = std::numeric_limits<double>::infinity();
  double x = guess > 0.0 && std::isfinite(guess) ? guess : 1.0;
  for (int it = 0; it < 400; ++it) {
    const ValueSlope gs = g(x);
    if (!std::isfinite(gs.value)) throw SolverError(std::string(what) + ": non-finite residual", gs.value);
    if (gs.value == 0.0) return x;
    if (gs.value < 0.0) a = x;
    else b = x;
    double next = x - gs.value / gs.slope;
    const bool bounded = std::isfinite(b);
    if (!(next > a) || (bounded && !(next < b)) || !std::isfinite(next)) {
      next = bounded ? 0.5 * (a + b) : 2.0 * x;
    }
    if (std::abs(next - x) <= 2e-16 * std::abs(x) ||
        (bounded && (b - a) <= 4e-16 * std::abs(b))) {
      x = next;
      break;
    }
    x = next;
  }
  const double res = g(x).value;
  if (!(std::abs(res) <= 1e-10 * value_scale)) {
    throw SolverError(std::string(what) + ": star-state iteration did not converge", res);
  }
  return x;
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-13 * std::max(std::abs(a), std::abs(b));
}

// ---- isentropic Euler -------------------------------------------------------------

struct IsoBranch {
  const IsentropicEuler& m;
  double rho_k, v_k, p_k, c_k;

  IsoBranch(const IsentropicEuler& model, double rho, double v)
      : m(model), rho_k(rho), v_k(v), p_k(model.pressure(rho)), c_k(model.sound_speed(rho)) {}

  ValueSlope operator()(double rho) const {
    const double g = m.gamma();
    if (rho > rho_k) {
      const double p = m.pressure(rho);
      const double A = (p - p_k) * (rho - rho_k) / (rho * rho_k);
      const double dA = (g * p / rho * (rho - rho_k) + (p - p_k)) / (rho * rho_k) -
                        (p - p_k) * (rho - rho_k) / (rho * rho * rho_k);
      const double F = std::sqrt(A);
      return {F, F > 0.0 ? dA / (2.0 * F) : c_k / rho_k};
    }
    const double c = m.sound_speed(rho);
    return {2.0 / (g - 1.0) * (c - c_k), c / rho};
  }
};

State iso_state(double rho, double v) { return make_state({rho, rho * v}); }

Wave iso_rarefaction(const IsentropicEuler& m, int family, const State& left, const State& right) {
  const double g = m.gamma(), gk = g * m.kappa();
  Wave w;
  w.kind = WaveKind::rarefaction;
  w.family = family;
  w.left = left;
  w.right = right;
  w.speed_lo = m.lambda(left, family);
  w.speed_hi = m.lambda(right, family);
  w.sigma = w.speed_lo;
  // family 1 fan: v - c = xi, riemann invariant v + 2c/(g-1) from the left state;
  // family 2 fan: v + c = xi, invariant v - 2c/(g-1) from the right state.
  const double s = family == 1 ? 1.0 : -1.0;
  const State anchor = family == 1 ? left : right;
  const double inv = anchor(1) / anchor(0) + s * 2.0 * m.sound_speed(anchor(0)) / (g - 1.0);
  auto state_at = [=](double xi) {
    const double c = s * (g - 1.0) * (inv - xi) / (g + 1.0);
    const double v = xi + s * c;
    const double rho = std::pow(c * c / gk, 1.0 / (g - 1.0));
    return iso_state(rho, v);
  };
  w.fan = state_at;
  w.fan_prime = [=](double xi) {
    const double c = s * (g - 1.0) * (inv - xi) / (g + 1.0);
    const double v = xi + s * c;
    const double rho = std::pow(c * c / gk, 1.0 / (g - 1.0));
    const double dc = -s * (g - 1.0) / (g + 1.0);
    const double dv = 2.0 / (g + 1.0);
    const double drho = rho * 2.0 / (g - 1.0) * dc / c;
    return make_state({drho, rho * dv + v * drho});
  };
  return w;
}

RiemannSolution solve_isentropic(ModelPtr mp, const IsentropicEuler& m, const State& uL,
                                 const State& uR) {
  const double g = m.gamma();
  if (!(g > 1.0)) throw PreconditionError("solve_riemann: isentropic solver needs gamma > 1");
  const double rL = uL(0), vL = uL(1) / rL, rR = uR(0), vR = uR(1) / rR;
  const double cL = m.sound_speed(rL), cR = m.sound_speed(rR);
  if (vR - vL >= 2.0 * (cL + cR) / (g - 1.0)) {
    throw VacuumError("solve_riemann: data generate vacuum (vR - vL >= 2(cL + cR)/(gamma - 1))");
  }
  const IsoBranch fL(m, rL, vL), fR(m, rR, vR);
  auto G = [&](double rho) {
    const ValueSlope a = fL(rho), b = fR(rho);
    return ValueSlope{a.value + b.value + vR - vL, a.slope + b.slope};
  };
  const double cstar = 0.5 * (cL + cR) + 0.25 * (g - 1.0) * (vL - vR);
  const double guess = std::pow(cstar * cstar / (g * m.kappa()), 1.0 / (g - 1.0));
  const double scale = std::abs(vL) + std::abs(vR) + cL + cR;
  double rho_star = nearly_equal(rL, rR) && vL == vR ? rL : solve_increasing(G, guess, scale, "isentropic");
  if (!(rho_star > kAdmissibilityMargin)) throw VacuumError("solve_riemann: star density at vacuum margin");
  const double v_star = 0.5 * (vL + vR) + 0.5 * (fR(rho_star).value - fL(rho_star).value);

  RiemannSolution sol;
  sol.model = mp;
  const State mid = iso_state(rho_star, v_star);
  sol.states = {uL, mid, uR};

  auto make_shock_or_zero = [&](int family, const State& left, const State& right) {
    Wave w;
    w.family = family;
    w.left = left;
    w.right = right;
    if ((left - right).norm() <= 1e-14 * std::max(1.0, left.norm())) {
      w.kind = WaveKind::zero;
      w.sigma = w.speed_lo = w.speed_hi = m.lambda(left, family);
    } else {
      w.kind = WaveKind::shock;
      w.sigma = w.speed_lo = w.speed_hi = (right(1) - left(1)) / (right(0) - left(0));
    }
    return w;
  };
  // 1-wave: compressive iff the star density exceeds the left density.
  if (rho_star > rL && !nearly_equal(rho_star, rL)) sol.waves.push_back(make_shock_or_zero(1, uL, mid));
  else if (rho_star < rL && !nearly_equal(rho_star, rL)) sol.waves.push_back(iso_rarefaction(m, 1, uL, mid));
  else sol.waves.push_back(make_shock_or_zero(1, uL, mid));
  if (rho_star > rR && !nearly_equal(rho_star, rR)) sol.waves.push_back(make_shock_or_zero(2, mid, uR));
  else if (rho_star < rR && !nearly_equal(rho_star, rR)) sol.waves.push_back(iso_rarefaction(m, 2, mid, uR));
  else sol.waves.push_back(make_shock_or_zero(2, mid, uR));
  return sol;
}

// ---- full Euler ---------------------------------------------------------------------

struct EulerBranch {
  double g, rho_k, p_k, c_k, A, B;

  EulerBranch(double gamma, double rho, double p)
      : g(gamma), rho_k(rho), p_k(p), c_k(std::sqrt(gamma * p / rho)),
        A(2.0 / ((gamma + 1.0) * rho)), B((gamma - 1.0) / (gamma + 1.0) * p) {}

  ValueSlope operator()(double p) const {
    if (p > p_k) {
      const double q = std::sqrt(A / (p + B));
      return {(p - p_k) * q, q * (1.0 - 0.5 * (p - p_k) / (p + B))};
    }
    const double z = (g - 1.0) / (2.0 * g);
    const double r = std::pow(p / p_k, z);
    return {2.0 * c_k / (g - 1.0) * (r - 1.0), r / (rho_k * c_k) * p_k / p};
  }

  double star_density(double p) const {
    if (p > p_k) {
      const double k = (g - 1.0) / (g + 1.0);
      return rho_k * (p / p_k + k) / (k * p / p_k + 1.0);
    }
    return rho_k * std::pow(p / p_k, 1.0 / g);
  }

  double shock_speed_offset(double p) const {
    return c_k * std::sqrt((g + 1.0) / (2.0 * g) * p / p_k + (g - 1.0) / (2.0 * g));
  }
};

Wave euler_rarefaction(const FullEuler& m, int family, const State& left, const State& right) {
  const double g = m.gamma();
  Wave w;
  w.kind = WaveKind::rarefaction;
  w.family = family;
  w.left = left;
  w.right = right;
  w.speed_lo = m.lambda(left, family);
  w.speed_hi = m.lambda(right, family);
  w.sigma = w.speed_lo;
  const State anchor = m.to_primitive(family == 1 ? left : right);
  const double rK = anchor(0), vK = anchor(1), pK = anchor(2), cK = std::sqrt(g * pK / rK);
  const double s = family == 1 ? 1.0 : -1.0;  // left fan vs right fan
  auto base_of = [=](double xi) {
    return 2.0 / (g + 1.0) + s * (g - 1.0) / ((g + 1.0) * cK) * (vK - xi);
  };
  auto prim_at = [=](double xi) {
    const double Bv = base_of(xi);
    const double rho = rK * std::pow(Bv, 2.0 / (g - 1.0));
    const double v = 2.0 / (g + 1.0) * (s * cK + 0.5 * (g - 1.0) * vK + xi);
    const double p = pK * std::pow(Bv, 2.0 * g / (g - 1.0));
    return make_state({rho, v, p});
  };
  w.fan = [=](double xi) {
    const State pr = prim_at(xi);
    return make_state({pr(0), pr(0) * pr(1), pr(2) / (g - 1.0) + 0.5 * pr(0) * pr(1) * pr(1)});
  };
  w.fan_prime = [=](double xi) {
    const double Bv = base_of(xi);
    const double dB = -s * (g - 1.0) / ((g + 1.0) * cK);
    const State pr = prim_at(xi);
    const double rho = pr(0), v = pr(1);
    const double drho = rK * 2.0 / (g - 1.0) * std::pow(Bv, 2.0 / (g - 1.0) - 1.0) * dB;
    const double dp = pK * 2.0 * g / (g - 1.0) * std::pow(Bv, 2.0 * g / (g - 1.0) - 1.0) * dB;
    const double dv = 2.0 / (g + 1.0);
    return make_state(
        {drho, rho * dv + v * drho, dp / (g - 1.0) + 0.5 * v * v * drho + rho * v * dv});
  };
  return w;
}

RiemannSolution solve_full_euler(ModelPtr mp, const FullEuler& m, const State& uL,
                                 const State& uR) {
  const double g = m.gamma();
  const State wL = m.to_primitive(uL), wR = m.to_primitive(uR);
  const EulerBranch fL(g, wL(0), wL(2)), fR(g, wR(0), wR(2));
  const double dv = wR(1) - wL(1);
  if (dv >= 2.0 * (fL.c_k + fR.c_k) / (g - 1.0)) {
    throw VacuumError("solve_riemann: data generate vacuum (vR - vL >= 2(cL + cR)/(gamma - 1))");
  }
  auto G = [&](double p) {
    const ValueSlope a = fL(p), b = fR(p);
    return ValueSlope{a.value + b.value + dv, a.slope + b.slope};
  };
  const double z = (g - 1.0) / (2.0 * g);
  const double guess = std::pow((fL.c_k + fR.c_k - 0.5 * (g - 1.0) * dv) /
                                    (fL.c_k / std::pow(wL(2), z) + fR.c_k / std::pow(wR(2), z)),
                                1.0 / z);
  const double scale = std::abs(wL(1)) + std::abs(wR(1)) + fL.c_k + fR.c_k;
  const bool same = nearly_equal(wL(2), wR(2)) && wL(1) == wR(1);
  const double p_star = same ? wL(2) : solve_increasing(G, guess, scale, "full_euler");
  const double v_star = 0.5 * (wL(1) + wR(1)) + 0.5 * (fR(p_star).value - fL(p_star).value);
  const double rho_sL = fL.star_density(p_star), rho_sR = fR.star_density(p_star);
  if (!(rho_sL > kAdmissibilityMargin && rho_sR > kAdmissibilityMargin && p_star > kAdmissibilityMargin)) {
    throw VacuumError("solve_riemann: star state at vacuum margin");
  }
  const State sL = m.from_primitive(make_state({rho_sL, v_star, p_star}));
  const State sR = m.from_primitive(make_state({rho_sR, v_star, p_star}));

  RiemannSolution sol;
  sol.model = mp;
  sol.states = {uL, sL, sR, uR};

  auto zero_wave = [&](int family, const State& left, const State& right) {
    Wave w;
    w.kind = WaveKind::zero;
    w.family = family;
    w.left = left;
    w.right = right;
    w.sigma = w.speed_lo = w.speed_hi = m.lambda(left, family);
    return w;
  };
  auto shock_wave = [&](int family, const State& left, const State& right, double sigma) {
    Wave w;
    w.kind = WaveKind::shock;
    w.family = family;
    w.left = left;
    w.right = right;
    w.sigma = w.speed_lo = w.speed_hi = sigma;
    return w;
  };
  if (nearly_equal(p_star, wL(2))) sol.waves.push_back(zero_wave(1, uL, sL));
  else if (p_star > wL(2)) sol.waves.push_back(shock_wave(1, uL, sL, wL(1) - fL.shock_speed_offset(p_star)));
  else sol.waves.push_back(euler_rarefaction(m, 1, uL, sL));

  if (nearly_equal(rho_sL, rho_sR)) {
    sol.waves.push_back(zero_wave(2, sL, sR));
  } else {
    Wave c;
    c.kind = WaveKind::contact;
    c.family = 2;
    c.left = sL;
    c.right = sR;
    c.sigma = c.speed_lo = c.speed_hi = v_star;
    sol.waves.push_back(c);
  }

  if (nearly_equal(p_star, wR(2))) sol.waves.push_back(zero_wave(3, sR, uR));
  else if (p_star > wR(2)) sol.waves.push_back(shock_wave(3, sR, uR, wR(1) + fR.shock_speed_offset(p_star)));
  else sol.waves.push_back(euler_rarefaction(m, 3, sR, uR));
  return sol;
}

}  // namespace

RiemannSolution solve_riemann(ModelPtr model, const State& uL, const State& uR) {
  if (!model) throw PreconditionError("solve_riemann: null model");
  model->require_admissible(uL, "solve_riemann (left)");
  model->require_admissible(uR, "solve_riemann (right)");
  if (auto* iso = dynamic_cast<const IsentropicEuler*>(model.get())) {
    return solve_isentropic(model, *iso, uL, uR);
  }
  if (auto* fe = dynamic_cast<const FullEuler*>(model.get())) {
    return solve_full_euler(model, *fe, uL, uR);
  }
  throw PreconditionError("solve_riemann: no exact solver for model " + model->name());
}

State evaluate(const RiemannSolution& sol, double x, double t) {
  if (!(t > 0.0)) throw PreconditionError("evaluate: t must be > 0");
  const double xi = x / t;
  for (std::size_t k = 0; k < sol.waves.size(); ++k) {
    const Wave& w = sol.waves[k];
    if (w.kind == WaveKind::zero) continue;
    if (w.kind == WaveKind::rarefaction) {
      if (xi < w.speed_lo) return sol.states[k];
      if (xi <= w.speed_hi) return w.fan(xi);
      continue;
    }
    if (xi <= w.sigma) return sol.states[k];
  }
  return sol.states.back();
}

State evaluate_dx(const RiemannSolution& sol, double x, double t) {
  if (!(t > 0.0)) throw PreconditionError("evaluate_dx: t must be > 0");
  const double xi = x / t;
  for (const Wave& w : sol.waves) {
    if (w.kind == WaveKind::rarefaction && xi >= w.speed_lo && xi <= w.speed_hi) {
      return w.fan_prime(xi) / t;
    }
  }
  return State::Zero(sol.states.front().size());
}

double chain_residual(const RiemannSolution& sol, const State& uR) {
  const SystemModel& m = *sol.model;
  double worst = 0.0;
  State cur = sol.states.front();
  for (std::size_t k = 0; k < sol.waves.size(); ++k) {
    const Wave& w = sol.waves[k];
    worst = std::max(worst, (w.left - cur).norm());
    switch (w.kind) {
      case WaveKind::zero:
        worst = std::max(worst, (w.right - w.left).norm());
        cur = w.left;
        break;
      case WaveKind::shock:
      case WaveKind::contact: {
        const double scale = std::max(1.0, m.flux(w.left).norm() + m.flux(w.right).norm());
        worst = std::max(worst, rh_residual(m, w.left, w.right, w.sigma) / scale);
        cur = w.right;
        break;
      }
      case WaveKind::rarefaction:
        // Rebuild the fan from its left edge and walk to its right edge.
        worst = std::max(worst, (w.fan(w.speed_lo) - cur).norm());
        cur = w.fan(w.speed_hi);
        break;
    }
    worst = std::max(worst, (cur - sol.states[k + 1]).norm());
  }
  return std::max(worst, (cur - uR).norm());
}

WaveClassification classify_waves(const RiemannSolution& sol) {
  WaveClassification c;
  const int n = static_cast<int>(sol.waves.size());
  bool any = false;
  for (const Wave& w : sol.waves) {
    c.kinds.push_back(w.kind);
    if (w.kind != WaveKind::zero) any = true;
  }
  if (!any) {
    c.trivial = true;
    c.regime = TheoryRegime::no_rarefactions;
    c.reason = "constant data";
    return c;
  }
  for (const Wave& w : sol.waves) {
    if (w.kind == WaveKind::contact) {
      c.reason = "nonzero contact discontinuity in family " + std::to_string(w.family);
      return c;
    }
    if (w.kind == WaveKind::shock && w.family != 1 && w.family != n) {
      c.reason = "shock in intermediate family " + std::to_string(w.family);
      return c;
    }
  }
  if (!sol.has_rarefaction()) {
    c.regime = TheoryRegime::no_rarefactions;
    c.reason = "extremal shocks only";
    return c;
  }
  for (const Wave& w : sol.waves) {
    if (w.kind == WaveKind::shock && !check_lax_strong(*sol.model, w.left, w.right, w.sigma, w.family)) {
      c.reason = "shock in family " + std::to_string(w.family) + " fails the strong Lax condition";
      return c;
    }
  }
  c.regime = TheoryRegime::with_rarefactions;
  c.reason = "extremal shocks satisfying the strong Lax condition, rarefactions elsewhere";
  return c;
}

SignConditionReport check_sign_condition(const SystemModel& model, const Wave& wave,
                                         const StateList& u_samples,
                                         const std::vector<double>& t_samples, int xi_points) {
  if (wave.kind != WaveKind::rarefaction || !wave.fan || !wave.fan_prime) {
    throw PreconditionError("check_sign_condition: wave is not a rarefaction");
  }
  SignConditionReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  const int k = std::max(xi_points, 2);
  for (double t : t_samples) {
    if (!(t > 0.0)) throw PreconditionError("check_sign_condition: t must be > 0");
    for (int i = 0; i < k; ++i) {
      const double xi = wave.speed_lo + (wave.speed_hi - wave.speed_lo) * i / (k - 1);
      const State v = wave.fan(xi);
      const State dvdx = wave.fan_prime(xi) / t;
      const State left = model.entropy_hessian(v).transpose() * dvdx;
      for (const State& u : u_samples) {
        const double val = left.dot(relative_flux(model, u, v));
        ++rep.evaluations;
        if (!(val >= rep.min_value)) {
          rep.min_value = val;
          rep.worst_u = u;
          rep.worst_xi = xi;
        }
      }
    }
  }
  rep.pass = rep.evaluations > 0 && rep.min_value >= -1e-10;
  return rep;
}

}  // namespace shiftlab
