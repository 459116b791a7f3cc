#include "shiftlab/pipeline.hpp"

#include "shiftlab/shockcurves.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace shiftlab {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

State from_list(const std::vector<double>& v) {
  State u(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) u(static_cast<Eigen::Index>(i)) = v[i];
  return u;
}

// Left state at rest, 1-shock up to density rho_s, then a 2-rarefaction up to density 2.
std::pair<State, State> shock_plus_rarefaction_data(double gamma, double kappa) {
  const double rho_s = 1.5, rho_r = 2.0;
  auto p = [&](double rho) { return kappa * std::pow(rho, gamma); };
  auto c = [&](double rho) { return std::sqrt(gamma * kappa * std::pow(rho, gamma - 1.0)); };
  // v - w(rho) is constant across a 2-rarefaction
  auto w = [&](double rho) {
    return gamma > 1.0 ? 2.0 * c(rho) / (gamma - 1.0) : c(rho) * std::log(rho);
  };
  const double v_star = -std::sqrt((rho_s - 1.0) * (p(rho_s) - p(1.0)) / rho_s);
  const double v_r = v_star + w(rho_r) - w(rho_s);
  return {make_state({1.0, 0.0}), make_state({rho_r, rho_r * v_r})};
}

StabilityOptions stability_options(const ScenarioSetup& s, const RunConfig& cfg) {
  StabilityOptions o;
  o.R = cfg.R;
  o.t0 = cfg.t0;
  o.r = s.r.r;
  return o;
}

struct ShockPaths {
  std::optional<ShiftPath> h1;
  std::optional<ShiftPath> hn;
};

ShockPaths integrate_paths(const ScenarioSetup& s, const Trajectory& traj, const RunConfig& cfg) {
  FilippovOptions fo;
  fo.n_mollify = cfg.n_mollify;
  ShockPaths p;
  if (s.has_shock1()) p.h1 = integrate_filippov(traj, field_V1(s.scenario.model, *s.selection), 0.0, fo);
  if (s.has_shockn()) p.hn = integrate_filippov(traj, field_Vn(s.scenario.model, *s.selection), 0.0, fo);
  return p;
}

WeightSelection selection_or_unit(const ScenarioSetup& s) {
  if (s.selection) return *s.selection;
  WeightSelection sel;
  sel.box = s.box;
  return sel;
}

Trajectory simulate_eps(const ScenarioSetup& s, const RunConfig& cfg, double eps) {
  SimulationOptions so;
  so.scheme = cfg.scheme;
  Profile prof{cfg.profile, cfg.seed};
  return simulate(s.scenario.model,
                  perturb_riemann_data(*s.scenario.model, s.scenario.uL, s.scenario.uR, eps, prof),
                  cfg.grid, cfg.t_end, so);
}

struct ShockDissipation {
  std::optional<DissipationSeries> s1;
  std::optional<DissipationSeries> sn;
};

ShockDissipation shock_dissipation(const ScenarioSetup& s, const Trajectory& traj,
                                   const ShockPaths& p, const Calibration& cal) {
  const SystemModel& m = *s.scenario.model;
  const StateList& v = s.sol.states;
  const std::size_t n = v.size() - 1;
  ShockDissipation d;
  if (p.h1) {
    const auto& c = *s.selection->family1;
    const TraceSeries tr = trace_at(traj, p.h1->positions, TraceOffsets{1, cal.inner_offset_1});
    d.s1 = dissipation_rate(m, tr, v[0], v[1], c.a, p.h1->velocities, s.sol.waves.front().sigma, c.c1);
  }
  if (p.hn) {
    const auto& c = *s.selection->familyn;
    const TraceSeries tr = trace_at(traj, p.hn->positions, TraceOffsets{cal.inner_offset_n, 1});
    d.sn = dissipation_rate(m, tr, v[n - 1], v[n], 1.0 / c.a, p.hn->velocities,
                            s.sol.waves.back().sigma, c.c1);
  }
  return d;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::outside_theory: return "OUTSIDE_VERIFIED_THEORY";
    case Verdict::error: return "ERROR";
  }
  return "ERROR";
}

Scenario resolve_scenario(const RunConfig& cfg) {
  validate_config(cfg);
  Scenario s;
  s.name = cfg.scenario;
  s.model = make_model(cfg.model, cfg.gamma, cfg.kappa);
  if (cfg.scenario == "two_shock_isentropic") {
    const double v = std::sqrt(1.5);
    s.uL = make_state({1.0, v});
    s.uR = make_state({1.0, -v});
  } else if (cfg.scenario == "shock_plus_rarefaction") {
    std::tie(s.uL, s.uR) = shock_plus_rarefaction_data(cfg.gamma, cfg.kappa);
  } else if (cfg.scenario == "pure_rarefaction") {
    s.uL = make_state({1.0, -0.3});
    s.uR = make_state({1.0, 0.3});
  } else if (cfg.scenario == "sod") {
    s.uL = s.model->from_primitive(make_state({1.0, 0.0, 1.0}));
    s.uR = s.model->from_primitive(make_state({0.125, 0.0, 0.1}));
  } else {
    s.uL = from_list(cfg.uL);
    s.uR = from_list(cfg.uR);
  }
  if (auto why = s.model->admissibility_violation(s.uL)) throw ConfigError("scenario.uL: " + *why);
  if (auto why = s.model->admissibility_violation(s.uR)) throw ConfigError("scenario.uR: " + *why);
  return s;
}

ScenarioSetup prepare_scenario(const RunConfig& cfg) {
  Stopwatch clock;
  ScenarioSetup s;
  s.scenario = resolve_scenario(cfg);
  const ModelPtr& model = s.scenario.model;
  s.sol = solve_riemann(model, s.scenario.uL, s.scenario.uR);
  s.classification = classify_waves(s.sol);
  if (s.classification.regime == TheoryRegime::outside_verified_theory) {
    s.setup_seconds = clock.seconds();
    return s;
  }
  s.box = StateBox::hull(*model, s.sol.states, 0.25);
  const int n = model->n();
  const StateList& v = s.sol.states;
  const auto N = static_cast<std::size_t>(n);
  const bool rare = s.classification.regime == TheoryRegime::with_rarefactions;
  std::optional<ShockTriple> s1, sn;
  if (s.has_shock1()) {
    s1 = ShockTriple{v[0], v[1], s.sol.waves.front().sigma};
    s.theta1 = rare ? epsilon0(*model, s.sol, s.box, 1) : 0.25 * (v[0] - v[1]).norm();
  }
  if (s.has_shockn()) {
    sn = ShockTriple{v[N - 1], v[N], s.sol.waves.back().sigma};
    s.thetan = rare ? epsilon0(*model, s.sol, s.box, n) : 0.25 * (v[N] - v[N - 1]).norm();
  }
  if (s1 || sn) {
    SelectionOptions so;
    so.samples = cfg.selection_samples;
    so.seed = static_cast<unsigned>(cfg.selection_seed);
    s.selection = select_weights(model, s1, sn, s.box, s.theta1, s.thetan, so);
  }
  s.r = compute_r(*model, s.box);
  s.setup_seconds = clock.seconds();
  return s;
}

Calibration calibrate(const ScenarioSetup& s, const RunConfig& cfg) {
  if (s.classification.regime == TheoryRegime::outside_verified_theory) {
    throw PreconditionError("calibrate: scenario outside the verified theory");
  }
  Calibration cal;
  cal.N = cfg.grid.N;
  cal.settle = 0.25 * cfg.t_end;
  const Trajectory traj = simulate_eps(s, cfg, 0.0);
  const ShockPaths p = integrate_paths(s, traj, cfg);
  const StateList& v = s.sol.states;
  const std::size_t n = v.size() - 1;
  if (p.h1) {
    cal.inner_offset_1 = calibrate_trace_offset(traj, p.h1->positions, Side::right, v[1],
                                                kInnerTraceTolerance, cal.settle);
    cal.outer_offset_1 = calibrate_trace_offset(traj, p.h1->positions, Side::left, v[0],
                                                kOuterTraceTolerance, cal.settle);
  }
  if (p.hn) {
    cal.inner_offset_n = calibrate_trace_offset(traj, p.hn->positions, Side::left, v[n - 1],
                                                kInnerTraceTolerance, cal.settle);
    cal.outer_offset_n = calibrate_trace_offset(traj, p.hn->positions, Side::right, v[n],
                                                kOuterTraceTolerance, cal.settle);
  }
  const PsiSolution psi = build_psi(s.sol, traj.times, p.h1, p.hn, s.classification.regime);
  const ContractionReport rep =
      stability_report(*s.scenario.model, traj, psi, selection_or_unit(s), stability_options(s, cfg));
  double excess = 0.0;
  for (double e : rep.E) excess = std::max(excess, e - rep.E0);
  const double dx = cfg.grid.dx();
  cal.C_num = kCalibrationMargin * excess / dx;
  cal.shift_floor = kCalibrationMargin * rep.shift_control;
  const ShockDissipation d = shock_dissipation(s, traj, p, cal);
  double worst = 0.0;
  for (const auto* series : {&d.s1, &d.sn}) {
    if (*series) worst = std::max(worst, summarize_dissipation(**series, 0.1 * cfg.t_end, 0.0).max_lhs);
  }
  cal.C_diss = kCalibrationMargin * worst / dx;
  return cal;
}

int exit_code(ErrorCategory c) { return c == ErrorCategory::configuration ? 2 : 3; }

int exit_code(const RunOutcome& out) {
  switch (out.verdict) {
    case Verdict::pass: return 0;
    case Verdict::fail:
    case Verdict::outside_theory: return 1;
    case Verdict::error: return exit_code(out.error.value_or(ErrorCategory::internal));
  }
  return 3;
}

RunOutcome execute(const ScenarioSetup& s, const Calibration& cal, const RunConfig& cfg) {
  RunOutcome out;
  out.config = cfg;
  out.setup = s;
  out.timing["setup"] = s.setup_seconds;
  if (s.classification.regime == TheoryRegime::outside_verified_theory) {
    out.verdict = Verdict::outside_theory;
    out.message = s.classification.reason;
    return out;
  }
  out.calibration = cal;
  const SystemModel& m = *s.scenario.model;

  Stopwatch clock;
  out.traj = simulate_eps(s, cfg, cfg.eps);
  out.timing["simulate"] = clock.seconds();
  const Trajectory& traj = *out.traj;

  Stopwatch shifts_clock;
  ShockPaths p = integrate_paths(s, traj, cfg);
  out.timing["shifts"] = shifts_clock.seconds();
  out.h1 = p.h1;
  out.hn = p.hn;
  if (p.h1 && p.hn) out.ordering = check_ordering(*p.h1, *p.hn);

  Stopwatch report_clock;
  out.psi = build_psi(s.sol, traj.times, p.h1, p.hn, s.classification.regime);
  StabilityOptions so = stability_options(s, cfg);
  so.C_num = cal.C_num;
  so.shift_floor = cal.shift_floor;
  out.report = stability_report(m, traj, *out.psi, selection_or_unit(s), so);

  const ShockDissipation d = shock_dissipation(s, traj, p, cal);
  const double tol = cal.C_diss * cfg.grid.dx();
  out.dissipation1 = d.s1;
  out.dissipationn = d.sn;
  if (d.s1) out.dissipation_summary1 = summarize_dissipation(*d.s1, 0.1 * cfg.t_end, tol);
  if (d.sn) out.dissipation_summaryn = summarize_dissipation(*d.sn, 0.1 * cfg.t_end, tol);

  // balance on the wedge regions cut by the shifts
  std::size_t k_end = 0;
  while (k_end + 1 < traj.times.size() && traj.times[k_end + 1] <= cfg.t0 + 1e-12) ++k_end;
  const double W = cfg.R + so.r * cfg.t0;
  struct Cut {
    RegionBoundary as_right;  // used as the right end of the region to its left
    RegionBoundary as_left;
  };
  std::vector<Cut> cuts;
  const RegionBoundary lo = line_boundary(traj.times, -W, so.r);
  const RegionBoundary hi = line_boundary(traj.times, W, -so.r);
  cuts.push_back({lo, lo});
  if (p.h1) cuts.push_back({path_boundary(*p.h1, cal.outer_offset_1), path_boundary(*p.h1, cal.inner_offset_1)});
  if (p.hn) cuts.push_back({path_boundary(*p.hn, cal.inner_offset_n), path_boundary(*p.hn, cal.outer_offset_n)});
  cuts.push_back({hi, hi});
  static const std::vector<std::vector<std::string>> names{
      {"whole"}, {"left", "right"}, {"left", "middle", "right"}};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    out.identity.push_back(
        {names[cuts.size() - 2][i],
         dissipation_identity_check(m, traj, cuts[i].as_left, cuts[i + 1].as_right, *out.psi, k_end)});
  }
  out.timing["report"] = report_clock.seconds();

  const bool ordered = !out.ordering || out.ordering->pass;
  out.verdict = out.report->pass && ordered ? Verdict::pass : Verdict::fail;
  if (!ordered) out.message = "shift paths out of order";
  return out;
}

RunOutcome run_pipeline(const RunConfig& cfg) {
  RunOutcome out;
  out.config = cfg;
  try {
    Stopwatch clock;
    const ScenarioSetup setup = prepare_scenario(cfg);
    Calibration cal;
    double cal_seconds = 0.0;
    if (setup.classification.regime != TheoryRegime::outside_verified_theory) {
      Stopwatch cal_clock;
      cal = calibrate(setup, cfg);
      cal_seconds = cal_clock.seconds();
    }
    out = execute(setup, cal, cfg);
    out.timing["calibrate"] = cal_seconds;
    out.timing["total"] = clock.seconds();
  } catch (const Error& e) {
    out.verdict = Verdict::error;
    out.error = e.category();
    out.message = e.what();
  } catch (const std::exception& e) {
    out.verdict = Verdict::error;
    out.error = ErrorCategory::internal;
    out.message = e.what();
  }
  return out;
}

bool CertificationOutcome::pass() const {
  if (error || checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

int exit_code(const CertificationOutcome& out) {
  if (out.error) return exit_code(*out.error);
  return out.pass() ? 0 : 1;
}

CertificationOutcome certify_scenario(const RunConfig& cfg) {
  CertificationOutcome out;
  out.config = cfg;
  auto add = [&](std::string name, bool pass, const std::string& detail) {
    out.checks.push_back({std::move(name), pass, detail});
  };
  auto num = [](double x) {
    std::ostringstream o;
    o.precision(6);
    o << x;
    return o.str();
  };
  try {
    const Scenario sc = resolve_scenario(cfg);
    const SystemModel& m = *sc.model;

    // convexity and compatibility on a box around the data, before any solve
    const StateBox data_box = StateBox::hull(m, {sc.uL, sc.uR}, 0.25);
    std::mt19937_64 rng(cfg.selection_seed);
    StateList samples;
    for (int i = 0; i < 1000; ++i) samples.push_back(data_box.sample(m, rng));
    const CompatibilityReport comp = check_compatibility(m, samples);
    add("entropy_compatibility", comp.pass,
        "max residual " + num(comp.max_residual) + ", non-finite " + std::to_string(comp.non_finite));
    double min_eig = std::numeric_limits<double>::infinity();
    for (const auto& u : samples) {
      const double e = hessian_min_eigenvalue(m, u);
      min_eig = std::isfinite(e) ? std::min(min_eig, e) : -std::numeric_limits<double>::infinity();
    }
    add("entropy_hessian_positive", min_eig > 0.0, "min eigenvalue " + num(min_eig));
    if (!comp.pass || !(min_eig > 0.0)) return out;

    const RiemannSolution sol = solve_riemann(sc.model, sc.uL, sc.uR);
    const WaveClassification cls = classify_waves(sol);
    add("verified_theory", cls.regime != TheoryRegime::outside_verified_theory,
        std::string(to_string(cls.regime)) + (cls.reason.empty() ? "" : ": " + cls.reason));
    const StateBox box = StateBox::hull(m, sol.states, 0.25);
    const int n = m.n();
    const bool rare = sol.has_rarefaction();
    for (const Wave& w : sol.waves) {
      const std::string tag = "wave" + std::to_string(w.family);
      if (w.kind == WaveKind::shock) {
        const bool extremal = w.family == 1 || w.family == n;
        add(tag + "_entropic", check_entropic(m, w.left, w.right, w.sigma),
            "margin " + num(entropic_margin(m, w.left, w.right, w.sigma)));
        add(tag + "_lax", check_lax_strong(m, w.left, w.right, w.sigma, w.family),
            rare ? "rarefactions present" : "no rarefactions");
        if (!extremal) {
          add(tag + "_extremal", false, "shock in a middle family");
          continue;
        }
        const State& base = w.family == 1 ? w.left : w.right;
        const ShockCurve curve = trace_hugoniot(m, base, w.family, 3.0, kDefaultCurveDs);
        HypothesisReport h = check_H1(m, curve);
        check_H2_H3_sampled(m, box, w.family, 200, static_cast<unsigned>(cfg.selection_seed), h);
        add(tag + "_liu", h.liu_ok && !h.insufficient_samples, "margin " + num(h.liu_margin));
        add(tag + "_strengthening", h.strengthening_ok, "margin " + num(h.strengthening_margin));
        add(tag + "_H2", h.h2_ok, "margin " + num(h.h2_margin));
        add(tag + "_H3", h.h3_sampled_ok,
            std::to_string(h.h3_pairs) + " pairs, max distance " + num(h.h3_max_distance));
      } else if (w.kind == WaveKind::rarefaction) {
        StateList us;
        for (int i = 0; i < 200; ++i) us.push_back(box.sample(m, rng));
        const SignConditionReport sr = check_sign_condition(m, w, us, {0.05, 0.1, 0.2});
        add(tag + "_sign_condition", sr.pass, "min " + num(sr.min_value));
      }
    }
  } catch (const Error& e) {
    out.error = e.category();
    out.message = e.what();
  }
  return out;
}

}  // namespace shiftlab
