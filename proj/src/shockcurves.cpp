#include "shiftlab/shockcurves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace shiftlab {

namespace {

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxVars + 1, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxVars + 1, kMaxVars + 1>;

constexpr int kMaxNewton = 50;

struct Corrector {
  const SystemModel& model;
  const State& base;
  State f_base;
  double tol;

  Corrector(const SystemModel& m, const State& b)
      : model(m), base(b), f_base(m.flux(b)), tol(1e-13 * std::max(1.0, f_base.norm())) {}

  Vec residual(const State& w, double sigma, const State& anchor, double ds) const {
    const auto n = w.size();
    Vec F(n + 1);
    F.head(n) = model.flux(w) - f_base - sigma * (w - base);
    F(n) = (w - anchor).squaredNorm() - ds * ds;
    return F;
  }

  /// Newton on (w, sigma) with |w - anchor| = ds. Returns false on failure.
  bool solve(State& w, double& sigma, const State& anchor, double ds) const {
    const auto n = w.size();
    if (!model.is_admissible(w)) return false;
    Vec F = residual(w, sigma, anchor, ds);
    for (int it = 0; it < kMaxNewton; ++it) {
      const double rh = F.head(n).norm();
      const double arc = std::abs(F(n)) / (ds * ds);
      if (rh <= tol && arc <= 1e-12) return true;
      Mat J(n + 1, n + 1);
      J.topLeftCorner(n, n) = model.flux_jacobian(w) - sigma * Matrix::Identity(n, n);
      J.topRightCorner(n, 1) = -(w - base);
      J.bottomLeftCorner(1, n) = 2.0 * (w - anchor).transpose();
      J(n, n) = 0.0;
      const Vec delta = J.fullPivLu().solve(-F);
      if (!delta.allFinite()) return false;
      double step = 1.0;
      bool accepted = false;
      for (int half = 0; half < 30; ++half, step *= 0.5) {
        State wt = w + step * delta.head(n);
        const double st = sigma + step * delta(n);
        if (!model.is_admissible(wt)) continue;
        Vec Ft = residual(wt, st, anchor, ds);
        if (Ft.norm() < F.norm() || half == 29 || Ft.norm() <= tol) {
          w = wt;
          sigma = st;
          F = Ft;
          accepted = true;
          break;
        }
      }
      if (!accepted) return false;
    }
    return F.head(n).norm() <= tol && std::abs(F(n)) / (ds * ds) <= 1e-12;
  }
};

State eigen_direction(const SystemModel& model, const State& base, int k) {
  State r = model.eigenvectors(base).col(k - 1);
  return r / r.norm();
}

/// First nontrivial point of the branch leaving `base` in direction dir * r_k.
bool first_step(const Corrector& c, int k, int dir, double ds, State& w, double& sigma) {
  const State r = eigen_direction(c.model, c.base, k);
  w = c.base + dir * ds * r;
  sigma = c.model.lambda(c.base, k);
  return c.solve(w, sigma, c.base, ds);
}

ShockCurve continue_branch(const Corrector& c, int family_label, State w, double sigma,
                           double s_max, double ds) {
  ShockCurve curve;
  curve.family = family_label;
  curve.base = c.base;
  curve.ds = ds;
  curve.samples.push_back({0.0, c.base, c.model.lambda(c.base, family_label)});
  curve.samples.push_back({ds, w, sigma});
  const auto steps = static_cast<long>(std::floor(s_max / ds + 1e-9));
  for (long i = 2; i <= steps; ++i) {
    const CurveSample& a = curve.samples[curve.samples.size() - 2];
    const CurveSample& b = curve.samples.back();
    const State tangent = (b.state - a.state).normalized();
    State wn = b.state + ds * tangent;
    double sn = b.sigma + (b.sigma - a.sigma);
    if (!c.model.is_admissible(wn)) {
      curve.truncated = true;
      curve.truncation_reason = "predictor left the admissible set at s = " + std::to_string(b.s);
      break;
    }
    if (!c.solve(wn, sn, b.state, ds)) {
      // A corrector that fails next to the vacuum boundary is a truncation, not an error.
      if (!c.model.is_admissible(b.state + 2.0 * ds * tangent)) {
        curve.truncated = true;
        curve.truncation_reason = "corrector stalled at the admissibility boundary";
        break;
      }
      throw ContinuationError("trace_hugoniot: Newton did not converge in " +
                                  std::to_string(kMaxNewton) + " iterations",
                              b.s);
    }
    curve.samples.push_back({static_cast<double>(i) * ds, wn, sn});
  }
  return curve;
}

void check_trace_args(const SystemModel& model, const State& base, double ds) {
  model.require_admissible(base, "trace_hugoniot");
  if (!(ds > 0.0) || !std::isfinite(ds)) throw PreconditionError("trace_hugoniot: ds must be > 0");
}

}  // namespace

ShockCurve trace_hugoniot(const SystemModel& model, const State& base, int family, double s_max,
                          double ds) {
  check_trace_args(model, base, ds);
  if (family != 1 && family != model.n()) {
    throw PreconditionError("trace_hugoniot: family must be 1 or n");
  }
  if (s_max < ds) {
    ShockCurve c;
    c.family = family;
    c.base = base;
    c.ds = ds;
    c.samples.push_back({0.0, base, model.lambda(base, family)});
    return c;
  }
  if (ds > s_max / 10.0 + 1e-15) {
    throw PreconditionError("trace_hugoniot: ds must not exceed s_max / 10");
  }
  const Corrector c(model, base);
  const double lam = model.lambda(base, family);
  State wp, wm;
  double sp = 0.0, sm = 0.0;
  const bool okp = first_step(c, family, +1, ds, wp, sp);
  const bool okm = first_step(c, family, -1, ds, wm, sm);
  // Liu branch: sigma moves away from lambda downward for family 1, upward for family n.
  auto good = [&](double s) { return family == 1 ? s < lam : s > lam; };
  const bool use_p = okp && good(sp) && (!okm || !good(sm) || (family == 1 ? sp <= sm : sp >= sm));
  const bool use_m = !use_p && okm && good(sm);
  if (!use_p && !use_m) {
    throw ContinuationError("trace_hugoniot: no branch with monotone speed at the base", 0.0);
  }
  return use_p ? continue_branch(c, family, wp, sp, s_max, ds)
               : continue_branch(c, family, wm, sm, s_max, ds);
}

ShockCurve trace_hugoniot_branch(const SystemModel& model, const State& base, int k, int direction,
                                 double s_max, double ds) {
  check_trace_args(model, base, ds);
  if (k < 1 || k > model.n()) throw PreconditionError("trace_hugoniot_branch: bad family");
  const Corrector c(model, base);
  State w;
  double sigma = 0.0;
  if (!first_step(c, k, direction >= 0 ? 1 : -1, ds, w, sigma)) {
    throw ContinuationError("trace_hugoniot_branch: first step failed", 0.0);
  }
  return continue_branch(c, k, w, sigma, s_max, ds);
}

double rh_residual(const SystemModel& model, const State& uL, const State& uR, double sigma) {
  return (model.flux(uR) - model.flux(uL) - sigma * (uR - uL)).norm();
}

double shock_speed(const SystemModel& model, const State& uL, const State& uR) {
  model.require_admissible(uL, "shock_speed");
  model.require_admissible(uR, "shock_speed");
  const State du = uR - uL;
  if (du.squaredNorm() == 0.0) throw PreconditionError("shock_speed: uL == uR");
  const State df = model.flux(uR) - model.flux(uL);
  const double sigma = df.dot(du) / du.squaredNorm();
  const double res = (df - sigma * du).norm();
  const double tol = 1e-8 * (model.flux(uR).norm() + model.flux(uL).norm());
  if (!(res <= tol)) {
    throw NotADiscontinuityError("shock_speed: no speed satisfies Rankine-Hugoniot for " +
                                     to_string(uL) + " -> " + to_string(uR) +
                                     " (residual " + std::to_string(res) + ")",
                                 res);
  }
  return sigma;
}

double entropic_margin(const SystemModel& model, const State& uL, const State& uR, double sigma) {
  return sigma * (model.entropy(uR) - model.entropy(uL)) -
         (model.entropy_flux(uR) - model.entropy_flux(uL));
}

bool check_entropic(const SystemModel& model, const State& uL, const State& uR, double sigma) {
  const double res = rh_residual(model, uL, uR, sigma);
  const double tol = 1e-8 * (model.flux(uR).norm() + model.flux(uL).norm()) + 1e-12;
  if (!(res <= tol)) {
    throw PreconditionError("check_entropic: Rankine-Hugoniot residual " + std::to_string(res) +
                            " too large");
  }
  return entropic_margin(model, uL, uR, sigma) >= -1e-12;
}

bool check_lax_strong(const SystemModel& model, const State& uL, const State& uR, double sigma,
                      int family) {
  const double res = rh_residual(model, uL, uR, sigma);
  const double tol = 1e-8 * (model.flux(uR).norm() + model.flux(uL).norm()) + 1e-12;
  if (!(res <= tol)) {
    throw PreconditionError("check_lax_strong: Rankine-Hugoniot residual too large");
  }
  const int n = model.n();
  if (family < 1 || family > n) throw PreconditionError("check_lax_strong: bad family");
  const State lL = model.char_speeds(uL), lR = model.char_speeds(uR);
  const int i = family - 1;
  if (!(lR(i) <= sigma && sigma <= lL(i))) return false;
  if (i > 0 && !(lL(i - 1) < lR(i) && lR(i - 1) < lR(i))) return false;
  if (i < n - 1 && !(lL(i) < lL(i + 1) && lL(i) < lR(i + 1))) return false;
  return true;
}

HypothesisReport check_H1(const SystemModel& model, const ShockCurve& curve) {
  HypothesisReport rep;
  rep.family = curve.family;
  const auto& s = curve.samples;
  if (s.size() < 3) {
    rep.insufficient_samples = true;
    return rep;
  }
  const double sign = curve.family == 1 ? -1.0 : 1.0;
  rep.liu_margin = std::numeric_limits<double>::infinity();
  rep.strengthening_margin = std::numeric_limits<double>::infinity();
  rep.liu_ok = rep.strengthening_ok = true;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double h = s[k + 1].s - s[k - 1].s;
    const double dsig = sign * (s[k + 1].sigma - s[k - 1].sigma) / h;
    const double deta = (relative_entropy(model, curve.base, s[k + 1].state) -
                         relative_entropy(model, curve.base, s[k - 1].state)) /
                        h;
    if (dsig < rep.liu_margin) rep.liu_margin = dsig;
    if (deta < rep.strengthening_margin) rep.strengthening_margin = deta;
    if (!(dsig > 0.0) && rep.liu_ok) {
      rep.liu_ok = false;
      rep.counterexamples.push_back(s[k].state);
    }
    if (!(deta > 0.0) && rep.strengthening_ok) {
      rep.strengthening_ok = false;
      rep.counterexamples.push_back(s[k].state);
    }
  }
  return rep;
}

double distance_to_curve(const ShockCurve& curve, const State& w) {
  double best = std::numeric_limits<double>::infinity();
  const auto& s = curve.samples;
  if (s.size() == 1) return (w - s[0].state).norm();
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const State a = s[k].state, d = s[k + 1].state - a;
    const double t = std::clamp((w - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (w - a - t * d).norm());
  }
  return best;
}

void check_H2_H3_sampled(const SystemModel& model, const StateBox& box, int family, int count,
                         unsigned seed, HypothesisReport& report) {
  // Family n is family 1 of the reflected system with left/right exchanged.
  const ModelPtr alias(&model, [](const SystemModel*) {});
  const ReflectedModel reflected(alias);
  const SystemModel& m = family == 1 ? model : static_cast<const SystemModel&>(reflected);
  if (family != 1 && family != model.n()) {
    throw PreconditionError("check_H2_H3_sampled: family must be 1 or n");
  }
  require_admissible_box(model, box);
  std::mt19937_64 rng(seed);
  report.h2_checked = report.h3_checked = true;
  report.h2_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    const State uL = box.sample(model, rng);
    ShockCurve liu;
    bool have_liu = false;
    for (int k = 1; k <= m.n(); ++k) {
      for (int dir : {-1, 1}) {
        ShockCurve br;
        try {
          br = trace_hugoniot_branch(m, uL, k, dir, 1.0, 0.02);
        } catch (const ContinuationError&) {
          continue;
        }
        for (std::size_t j = 5; j < br.samples.size(); j += 5) {
          const State& uR = br.samples[j].state;
          const double sigma = br.samples[j].sigma;
          if (entropic_margin(m, uL, uR, sigma) < -1e-12) continue;
          const double h2 = sigma - m.lambda(uR, 1);
          report.h2_margin = std::min(report.h2_margin, h2);
          if (!(h2 > 0.0) && report.h2_ok) {
            report.h2_ok = false;
            report.counterexamples.push_back(uR);
          }
          if (sigma <= m.lambda(uL, 1)) {
            if (!have_liu) {
              liu = trace_hugoniot(m, uL, 1, 1.5, 1e-3);
              have_liu = true;
            }
            const double d = distance_to_curve(liu, uR);
            ++report.h3_pairs;
            report.h3_max_distance = std::max(report.h3_max_distance, d);
            if (!(d <= 1e-6) && report.h3_sampled_ok) {
              report.h3_sampled_ok = false;
              report.counterexamples.push_back(uR);
            }
          }
        }
      }
    }
  }
}

}  // namespace shiftlab
