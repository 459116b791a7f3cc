#include "doctest.h"

#include "shiftlab/errors.hpp"
#include "shiftlab/riemann.hpp"
#include "shiftlab/shockcurves.hpp"

#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace shiftlab;

namespace {

ModelPtr iso2() { return std::make_shared<IsentropicEuler>(2.0, 1.0); }
ModelPtr euler14() { return std::make_shared<FullEuler>(1.4); }

// 1-shock from (1,0) to density 1.5 followed by a 2-rarefaction to density 2 (gamma = 2).
std::pair<State, State> shock_rarefaction_data() {
  const double rs = 1.5;
  const double vs = -std::sqrt((rs * rs - 1.0) * (rs - 1.0) / rs);
  const double vR = vs + 2.0 * (std::sqrt(4.0) - std::sqrt(2.0 * rs));
  return {make_state({1.0, 0.0}), make_state({2.0, 2.0 * vR})};
}

}  // namespace

TEST_CASE("Sod star state matches the bisection oracle") {
  auto m = euler14();
  const State uL = m->from_primitive(make_state({1.0, 0.0, 1.0}));
  const State uR = m->from_primitive(make_state({0.125, 0.0, 0.1}));
  const RiemannSolution sol = solve_riemann(m, uL, uR);
  const oracle::StarState o = oracle::bisect_star(1.4, 1.0, 0.0, 1.0, 0.125, 0.0, 0.1);
  const State star = m->to_primitive(sol.states[1]);
  CHECK(std::abs(star(2) - o.p_star) < 1e-8);
  CHECK(std::abs(star(1) - o.v_star) < 1e-8);
  CHECK(star(2) == doctest::Approx(0.30313).epsilon(1e-4));
  CHECK(star(1) == doctest::Approx(0.92745).epsilon(1e-4));
  CHECK(sol.waves[0].kind == WaveKind::rarefaction);
  CHECK(sol.waves[1].kind == WaveKind::contact);
  CHECK(sol.waves[2].kind == WaveKind::shock);
  CHECK(rh_residual(*m, sol.waves[2].left, sol.waves[2].right, sol.waves[2].sigma) <= 1e-10);
  CHECK(check_entropic(*m, sol.waves[2].left, sol.waves[2].right, sol.waves[2].sigma));
  CHECK(chain_residual(sol, uR) < 1e-8);

  // between contact and right shock: right star state
  const double xi = 0.5 * (sol.waves[1].sigma + sol.waves[2].sigma);
  CHECK((evaluate(sol, xi * 0.2, 0.2) - sol.states[2]).norm() == 0.0);
  CHECK(m->to_primitive(sol.states[2])(2) == doctest::Approx(o.p_star).epsilon(1e-10));
}

TEST_CASE("identical data give zero-strength waves") {
  for (auto m : {iso2(), euler14()}) {
    const State u = m->n() == 2 ? make_state({1.3, 0.4}) : make_state({1.3, 0.4, 2.0});
    const RiemannSolution sol = solve_riemann(m, u, u);
    for (const Wave& w : sol.waves) CHECK(w.kind == WaveKind::zero);
    for (const State& s : sol.states) CHECK((s - u).norm() < 1e-14);
    CHECK((evaluate(sol, 0.3, 1.0) - u).norm() < 1e-14);
    const WaveClassification c = classify_waves(sol);
    CHECK(c.trivial);
    CHECK(c.regime == TheoryRegime::no_rarefactions);
  }
}

TEST_CASE("composed two-shock data are solved blind") {
  auto m = iso2();
  const State uL = make_state({1.0, 0.0});
  const double s6 = std::sqrt(6.0);
  const State mid = make_state({2.0, -s6});
  // 2-shock from (2, -sqrt6) down to density 1: v drops by sqrt((pL - pR)(rhoL - rhoR)/(rhoL rhoR)).
  const double vR = -s6 / 2.0 - std::sqrt(3.0 * 1.0 / 2.0);
  const State uR = make_state({1.0, vR});
  const RiemannSolution sol = solve_riemann(m, uL, uR);
  REQUIRE(sol.waves.size() == 2);
  CHECK(sol.waves[0].kind == WaveKind::shock);
  CHECK(sol.waves[1].kind == WaveKind::shock);
  CHECK((sol.states[1] - mid).norm() < 1e-12);
  CHECK(sol.waves[0].sigma == doctest::Approx(-s6).epsilon(1e-12));
  CHECK(sol.waves[0].sigma < sol.waves[1].sigma);
  for (const Wave& w : sol.waves) {
    CHECK(rh_residual(*m, w.left, w.right, w.sigma) <= 1e-10);
    CHECK(check_entropic(*m, w.left, w.right, w.sigma));
  }
  CHECK(classify_waves(sol).regime == TheoryRegime::no_rarefactions);
}

TEST_CASE("shock plus rarefaction is in the rarefaction regime") {
  auto m = iso2();
  const auto [uL, uR] = shock_rarefaction_data();
  const RiemannSolution sol = solve_riemann(m, uL, uR);
  CHECK(sol.waves[0].kind == WaveKind::shock);
  CHECK(sol.waves[1].kind == WaveKind::rarefaction);
  CHECK(sol.states[1](0) == doctest::Approx(1.5).epsilon(1e-12));
  const WaveClassification c = classify_waves(sol);
  CHECK(c.regime == TheoryRegime::with_rarefactions);
}

TEST_CASE("Sod data are outside verified theory because of the contact") {
  auto m = euler14();
  const RiemannSolution sol = solve_riemann(m, m->from_primitive(make_state({1.0, 0.0, 1.0})),
                                            m->from_primitive(make_state({0.125, 0.0, 0.1})));
  const WaveClassification c = classify_waves(sol);
  CHECK(c.regime == TheoryRegime::outside_verified_theory);
  CHECK(c.reason.find("contact") != std::string::npos);
}

TEST_CASE("round trip, monotone speeds and fan invariants on random data") {
  std::mt19937_64 rng(2024);
  for (auto m : {iso2(), ModelPtr(std::make_shared<IsentropicEuler>(1.4, 1.0)), euler14()}) {
    const StateBox box = m->n() == 2 ? StateBox{make_state({0.2, -1.0}), make_state({3.0, 1.0})}
                                     : StateBox{make_state({0.2, -1.0, 0.2}),
                                                make_state({3.0, 1.0, 3.0})};
    int solved = 0;
    for (int i = 0; i < 100; ++i) {
      const State uL = box.sample(*m, rng), uR = box.sample(*m, rng);
      RiemannSolution sol;
      try {
        sol = solve_riemann(m, uL, uR);
      } catch (const VacuumError&) {
        continue;
      }
      ++solved;
      CHECK(chain_residual(sol, uR) < 1e-8);
      for (std::size_t k = 1; k < sol.waves.size(); ++k) {
        CHECK(sol.waves[k - 1].speed_hi <= sol.waves[k].speed_lo + 1e-12);
      }
      for (const Wave& w : sol.waves) {
        if (w.kind == WaveKind::shock) {
          const double scale = m->flux(w.left).norm() + m->flux(w.right).norm();
          CHECK(rh_residual(*m, w.left, w.right, w.sigma) <= 1e-10 * std::max(1.0, scale));
          CHECK(check_entropic(*m, w.left, w.right, w.sigma));
        }
        if (w.kind != WaveKind::rarefaction) continue;
        CHECK(w.speed_lo <= w.speed_hi);
        for (int j = 0; j <= 10; ++j) {
          const double xi = w.speed_lo + (w.speed_hi - w.speed_lo) * j / 10.0;
          const State v = w.fan(xi);
          CHECK(std::abs(m->lambda(v, w.family) - xi) < 1e-8);
          // FD check of the analytic fan derivative
          const double h = 1e-6;
          const State fd = (w.fan(xi + h) - w.fan(xi - h)) / (2 * h);
          CHECK((fd - w.fan_prime(xi)).norm() < 1e-6 * std::max(1.0, fd.norm()));
          if (m->n() == 2) {
            const auto* iso = dynamic_cast<const IsentropicEuler*>(m.get());
            const double g = iso->gamma();
            const double sgn = w.family == 1 ? 1.0 : -1.0;
            auto inv = [&](const State& u) {
              return u(1) / u(0) + sgn * 2.0 * iso->sound_speed(u(0)) / (g - 1.0);
            };
            CHECK(std::abs(inv(v) - inv(w.left)) < 1e-8);
          } else {
            const State wv = m->to_primitive(v), wl = m->to_primitive(w.left);
            CHECK(std::abs(wv(2) / std::pow(wv(0), 1.4) - wl(2) / std::pow(wl(0), 1.4)) < 1e-8);
          }
        }
      }
    }
    CHECK(solved > 50);
  }
}

TEST_CASE("solver shock branches coincide with traced Hugoniot samples") {
  auto m = iso2();
  const State uL = make_state({1.0, 0.0});
  const ShockCurve c = trace_hugoniot(*m, uL, 1, 2.0, 1e-3);
  for (std::size_t k = 10; k < c.samples.size(); k += 97) {
    const RiemannSolution sol = solve_riemann(m, uL, c.samples[k].state);
    REQUIRE(sol.waves[0].kind == WaveKind::shock);
    CHECK(sol.waves[1].kind == WaveKind::zero);
    CHECK((sol.states[1] - c.samples[k].state).norm() < 1e-8);
    CHECK(std::abs(sol.waves[0].sigma - c.samples[k].sigma) < 1e-8);
  }
  const State uR = make_state({1.0, 0.0});
  const ShockCurve cn = trace_hugoniot(*m, uR, 2, 2.0, 1e-3);
  for (std::size_t k = 10; k < cn.samples.size(); k += 97) {
    const RiemannSolution sol = solve_riemann(m, cn.samples[k].state, uR);
    REQUIRE(sol.waves[1].kind == WaveKind::shock);
    CHECK(std::abs(sol.waves[1].sigma - cn.samples[k].sigma) < 1e-8);
  }
}

TEST_CASE("evaluate: far field, self-similarity and continuity off the waves") {
  auto m = euler14();
  const RiemannSolution sol = solve_riemann(m, m->from_primitive(make_state({1.0, 0.0, 1.0})),
                                            m->from_primitive(make_state({0.125, 0.0, 0.1})));
  CHECK(evaluate(sol, -100.0, 1.0) == sol.states.front());
  CHECK(evaluate(sol, 100.0, 1.0) == sol.states.back());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = d(rng), t = 0.1 + std::abs(d(rng));
    CHECK(evaluate(sol, x, t) == evaluate(sol, 2 * x, 2 * t));
    const double xi = x / t;
    bool near_jump = false;
    for (const Wave& w : sol.waves) {
      if (w.kind == WaveKind::shock || w.kind == WaveKind::contact) {
        near_jump = near_jump || std::abs(xi - w.sigma) < 1e-6;
      }
    }
    if (near_jump) continue;
    const State a = evaluate(sol, (xi - 1e-9) * t, t), b = evaluate(sol, (xi + 1e-9) * t, t);
    CHECK((a - b).norm() < 1e-7);
  }
  // exactly on a shock: left state
  const Wave& s = sol.waves[2];
  CHECK(evaluate(sol, s.sigma, 1.0) == sol.states[2]);
  CHECK_THROWS_AS(evaluate(sol, 0.0, 0.0), PreconditionError);
}

TEST_CASE("vacuum data are rejected") {
  auto m = iso2();
  CHECK_THROWS_AS(solve_riemann(m, make_state({1.0, -5.0}), make_state({1.0, 5.0})), VacuumError);
  auto e = euler14();
  CHECK_THROWS_AS(solve_riemann(e, e->from_primitive(make_state({1.0, -10.0, 1.0})),
                                e->from_primitive(make_state({1.0, 10.0, 1.0}))),
                  VacuumError);
}

namespace {
struct NegatedHessian : IsentropicEuler {
  NegatedHessian() : IsentropicEuler(2.0, 1.0) {}
  Matrix do_entropy_hessian(const State& u) const override {
    return -IsentropicEuler::do_entropy_hessian(u);
  }
};
}  // namespace

TEST_CASE("sign condition on a 2-rarefaction fan") {
  auto m = iso2();
  const auto [uL, uR] = shock_rarefaction_data();
  const RiemannSolution sol = solve_riemann(m, uL, uR);
  const Wave& fan = sol.waves[1];
  REQUIRE(fan.kind == WaveKind::rarefaction);
  std::mt19937_64 rng(8);
  const StateBox box{make_state({0.2, -3.0}), make_state({4.0, 3.0})};
  StateList us;
  for (int i = 0; i < 1000; ++i) us.push_back(box.sample(*m, rng));
  const SignConditionReport rep = check_sign_condition(*m, fan, us, {0.05, 0.2, 1.0});
  CHECK(rep.pass);
  CHECK(rep.min_value >= -1e-10);

  const SignConditionReport on = check_sign_condition(*m, fan, {fan.fan(fan.speed_lo)}, {1.0}, 2);
  CHECK(std::abs(on.min_value) < 1e-12);

  NegatedHessian bad;
  CHECK_FALSE(check_sign_condition(bad, fan, us, {0.2}).pass);
  CHECK_THROWS_AS(check_sign_condition(*m, sol.waves[0], us, {1.0}), PreconditionError);
}
