#include "doctest.h"

#include "shiftlab/shockcurves.hpp"

#include <cmath>
#include <random>

using namespace shiftlab;

namespace {

const double kS6 = std::sqrt(6.0);

// Scalar Hugoniot relation for isentropic 1-shocks from (rhoL, vL): vR as a function of rhoR > rhoL.
double hugoniot_vR(double g, double k, double rhoL, double vL, double rhoR) {
  const double pL = k * std::pow(rhoL, g), pR = k * std::pow(rhoR, g);
  return vL - std::sqrt((pR - pL) * (rhoR - rhoL) / (rhoR * rhoL));
}

const CurveSample& nearest_density(const ShockCurve& c, double rho) {
  const CurveSample* best = &c.samples.front();
  for (const auto& s : c.samples) {
    if (std::abs(s.state(0) - rho) < std::abs(best->state(0) - rho)) best = &s;
  }
  return *best;
}

}  // namespace

TEST_CASE("family-1 curve from (1,0) matches the scalar Hugoniot relation") {
  IsentropicEuler m(2.0, 1.0);
  const State base = make_state({1.0, 0.0});
  const ShockCurve c = trace_hugoniot(m, base, 1, 3.0, 1e-3);
  REQUIRE(c.samples.size() == 3001);
  CHECK_FALSE(c.truncated);
  CHECK(c.samples[0].s == 0.0);
  CHECK(c.samples[0].state == base);
  CHECK(c.samples[0].sigma == doctest::Approx(-std::sqrt(2.0)));

  const CurveSample& s2 = nearest_density(c, 2.0);
  CHECK(s2.state(0) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(s2.state(1) == doctest::Approx(-kS6).epsilon(2e-3));
  CHECK(s2.sigma == doctest::Approx(-kS6).epsilon(2e-3));

  for (std::size_t k = 1; k < c.samples.size(); k += 37) {
    const State& w = c.samples[k].state;
    const double vR = hugoniot_vR(2.0, 1.0, 1.0, 0.0, w(0));
    CHECK(w(1) / w(0) == doctest::Approx(vR).epsilon(1e-9));
  }
}

TEST_CASE("curve samples satisfy Rankine-Hugoniot and arc-length spacing") {
  IsentropicEuler iso(2.0, 1.0);
  FullEuler fe(1.4);
  const ShockCurve a = trace_hugoniot(iso, make_state({1.0, 0.0}), 1, 3.0, 1e-3);
  const ShockCurve b = trace_hugoniot(fe, fe.from_primitive(make_state({0.125, 0.0, 0.1})), 3,
                                      2.0, 1e-3);
  const ShockCurve c = trace_hugoniot(fe, fe.from_primitive(make_state({1.0, 0.0, 1.0})), 1,
                                      2.0, 1e-3);
  for (const ShockCurve* cv : {&a, &b, &c}) {
    const SystemModel& m = cv->base.size() == 2 ? static_cast<const SystemModel&>(iso)
                                                : static_cast<const SystemModel&>(fe);
    for (std::size_t k = 1; k < cv->samples.size(); ++k) {
      const auto& s = cv->samples[k];
      CHECK(rh_residual(m, cv->base, s.state, s.sigma) < 1e-10);
      const double chord = (s.state - cv->samples[k - 1].state).norm();
      CHECK(std::abs(chord - cv->ds) <= 0.05 * cv->ds);
    }
  }
}

TEST_CASE("H1 holds along the gamma=2 family-1 curve and the Sod right-state family-n curve") {
  IsentropicEuler iso(2.0, 1.0);
  const ShockCurve c = trace_hugoniot(iso, make_state({1.0, 0.0}), 1, 3.0, 1e-3);
  const HypothesisReport r = check_H1(iso, c);
  CHECK(r.liu_ok);
  CHECK(r.strengthening_ok);
  CHECK(r.liu_margin > 0.0);
  CHECK(r.strengthening_margin > 0.0);

  FullEuler fe(1.4);
  const ShockCurve cn =
      trace_hugoniot(fe, fe.from_primitive(make_state({0.125, 0.0, 0.1})), 3, 3.0, 1e-3);
  const HypothesisReport rn = check_H1(fe, cn);
  CHECK(rn.liu_ok);
  CHECK(rn.strengthening_ok);
  for (std::size_t k = 1; k < cn.samples.size(); ++k) {
    CHECK(cn.samples[k].sigma > cn.samples[k - 1].sigma);
  }
}

TEST_CASE("sigma decreases below lambda_1(base) and every sample is entropic") {
  IsentropicEuler iso(2.0, 1.0);
  const State base = make_state({1.0, 0.0});
  const ShockCurve c = trace_hugoniot(iso, base, 1, 3.0, 1e-3);
  REQUIRE(check_H1(iso, c).ok() == true);
  const double lam = iso.lambda(base, 1);
  for (std::size_t k = 1; k < c.samples.size(); ++k) {
    CHECK(c.samples[k].sigma < lam);
    CHECK(c.samples[k].sigma < c.samples[k - 1].sigma);
    CHECK(check_entropic(iso, base, c.samples[k].state, c.samples[k].sigma));
  }
}

TEST_CASE("degenerate curve is flagged as insufficient") {
  IsentropicEuler iso(2.0, 1.0);
  const ShockCurve c = trace_hugoniot(iso, make_state({1.0, 0.0}), 1, 5e-4, 1e-3);
  CHECK(c.samples.size() == 1);
  const HypothesisReport r = check_H1(iso, c);
  CHECK(r.insufficient_samples);
  CHECK_FALSE(r.ok());
  CHECK_THROWS_AS(trace_hugoniot(iso, make_state({1.0, 0.0}), 1, 1.0, 0.5), PreconditionError);
  CHECK_THROWS_AS(trace_hugoniot(iso, make_state({1.0, 0.0}), 1, 1.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(trace_hugoniot(iso, make_state({1.0, 0.0}), 3, 1.0, 0.01), PreconditionError);
}

TEST_CASE("family-n curve from a right state by mirror symmetry") {
  IsentropicEuler iso(2.0, 1.0);
  const ShockCurve c = trace_hugoniot(iso, make_state({1.0, 0.0}), 2, 3.0, 1e-3);
  // The isentropic system is symmetric under (rho, m) -> (rho, -m), x -> -x, so the
  // 2-shock arriving at (1,0) starts at (2, +sqrt 6) with speed +sqrt 6.
  const CurveSample& s2 = nearest_density(c, 2.0);
  CHECK(s2.state(1) == doctest::Approx(kS6).epsilon(2e-3));
  CHECK(s2.sigma == doctest::Approx(kS6).epsilon(2e-3));
  const ShockCurve c1 = trace_hugoniot(iso, make_state({1.0, 0.0}), 1, 3.0, 1e-3);
  REQUIRE(c.samples.size() == c1.samples.size());
  for (std::size_t k = 0; k < c.samples.size(); ++k) {
    CHECK(c.samples[k].state(0) == doctest::Approx(c1.samples[k].state(0)).epsilon(1e-9));
    CHECK(c.samples[k].state(1) == doctest::Approx(-c1.samples[k].state(1)).epsilon(1e-9));
    CHECK(c.samples[k].sigma == doctest::Approx(-c1.samples[k].sigma).epsilon(1e-9));
  }
}

TEST_CASE("reflection duality: family n of -f reproduces family 1 of f") {
  for (int which = 0; which < 2; ++which) {
    ModelPtr m = which == 0 ? ModelPtr(std::make_shared<IsentropicEuler>(2.0, 1.0))
                            : ModelPtr(std::make_shared<FullEuler>(1.4));
    ReflectedModel refl(m);
    const State base = which == 0 ? make_state({1.0, 0.0})
                                  : m->from_primitive(make_state({1.0, 0.2, 1.0}));
    const ShockCurve direct = trace_hugoniot(*m, base, 1, 3.0, 1e-3);
    const ShockCurve mirrored = trace_hugoniot(refl, base, m->n(), 3.0, 1e-3);
    REQUIRE(direct.samples.size() == mirrored.samples.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < direct.samples.size(); ++k) {
      worst = std::max(worst, (direct.samples[k].state - mirrored.samples[k].state).norm());
      worst = std::max(worst, std::abs(direct.samples[k].sigma + mirrored.samples[k].sigma));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("shock_speed") {
  IsentropicEuler iso(2.0, 1.0);
  const State uL = make_state({1.0, 0.0}), uR = make_state({2.0, -kS6});
  CHECK(shock_speed(iso, uL, uR) == doctest::Approx((uR(1) - uL(1)) / (uR(0) - uL(0))));
  CHECK(shock_speed(iso, uL, uR) == doctest::Approx(-2.44949).epsilon(1e-5));
  CHECK_THROWS_AS(shock_speed(iso, uL, make_state({2.0, 0.0})), NotADiscontinuityError);
  const ShockCurve c = trace_hugoniot(iso, uL, 1, 2.0, 1e-3);
  for (std::size_t k = 1; k < c.samples.size(); k += 101) {
    CHECK(shock_speed(iso, uL, c.samples[k].state) ==
          doctest::Approx(c.samples[k].sigma).epsilon(1e-8));
  }
}

TEST_CASE("check_entropic on the reference shock and its reversal") {
  IsentropicEuler iso(2.0, 1.0);
  const State uL = make_state({1.0, 0.0}), uR = make_state({2.0, -kS6});
  const double sigma = -kS6;
  CHECK(check_entropic(iso, uL, uR, sigma));
  CHECK_FALSE(check_entropic(iso, uR, uL, sigma));
  // hand evaluation: q jump and eta jump from closed forms
  const double eta_jump = (6.0 / 4.0 + 4.0) - 1.0;
  const double q_jump = (-kS6 * kS6 * kS6 / 8.0 + 2.0 * (-kS6) * 2.0) - 0.0;
  CHECK(entropic_margin(iso, uL, uR, sigma) == doctest::Approx(sigma * eta_jump - q_jump));
  CHECK(entropic_margin(iso, uL, uL, iso.lambda(uL, 1)) == 0.0);
  CHECK_THROWS_AS(check_entropic(iso, uL, make_state({2.0, 0.0}), 0.0), PreconditionError);
}

TEST_CASE("check_lax_strong") {
  IsentropicEuler iso(2.0, 1.0);
  const State uL = make_state({1.0, 0.0}), uR = make_state({2.0, -kS6});
  CHECK(check_lax_strong(iso, uL, uR, -kS6, 1));
  CHECK_FALSE(check_lax_strong(iso, uL, uR, -kS6, 2));
  CHECK(check_lax_strong(iso, uL, uL, iso.lambda(uL, 1), 1));
  FullEuler fe(1.4);
  const State a = fe.from_primitive(make_state({1.0, 0.3, 1.0}));
  const State b = fe.from_primitive(make_state({0.5, 0.3, 1.0}));
  CHECK_FALSE(check_lax_strong(fe, a, b, 0.3, 1));
  CHECK(check_lax_strong(fe, a, b, 0.3, 2));
  CHECK_THROWS_AS(check_lax_strong(iso, uL, make_state({2.0, 0.0}), 0.0, 1), PreconditionError);
}

TEST_CASE("sampled H2/H3 certificates for both families") {
  IsentropicEuler iso(2.0, 1.0);
  const StateBox box{make_state({0.5, -1.0}), make_state({2.5, 1.0})};
  HypothesisReport r1, rn;
  check_H2_H3_sampled(iso, box, 1, 40, 7, r1);
  CHECK(r1.h2_ok);
  CHECK(r1.h3_sampled_ok);
  CHECK(r1.h3_pairs > 0);
  CHECK(r1.h3_max_distance < 1e-6);
  check_H2_H3_sampled(iso, box, 2, 40, 8, rn);
  CHECK(rn.h2_ok);
  CHECK(rn.h3_sampled_ok);
  CHECK(rn.h3_pairs > 0);

  FullEuler fe(1.4);
  const StateBox fb{make_state({0.3, -0.5, 0.3}), make_state({1.5, 0.5, 1.5})};
  HypothesisReport rf;
  check_H2_H3_sampled(fe, fb, 1, 15, 9, rf);
  CHECK(rf.h2_ok);
  CHECK(rf.h3_sampled_ok);
}

TEST_CASE("random bases: curves are certified and consistent") {
  IsentropicEuler iso(1.4, 1.0);
  std::mt19937_64 rng(5);
  const StateBox box{make_state({0.3, -2.0}), make_state({3.0, 2.0})};
  for (int i = 0; i < 10; ++i) {
    const State u = box.sample(iso, rng);
    for (int fam : {1, 2}) {
      const ShockCurve c = trace_hugoniot(iso, u, fam, 1.0, 1e-3);
      const HypothesisReport r = check_H1(iso, c);
      CHECK(r.liu_ok);
      CHECK(r.strengthening_ok);
      for (std::size_t k = 1; k < c.samples.size(); k += 50) {
        const State& w = c.samples[k].state;
        const double s = c.samples[k].sigma;
        if (fam == 1) {
          CHECK(check_entropic(iso, u, w, s));
          CHECK(check_lax_strong(iso, u, w, s, 1));
        } else {
          CHECK(check_entropic(iso, w, u, s));
          CHECK(check_lax_strong(iso, w, u, s, 2));
        }
      }
    }
  }
}
